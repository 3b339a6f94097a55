import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from smartchair.api.gateway_api import create_app
from smartchair.api.replay_client import ReplayClient
from smartchair.config import ExperimentConfig
from smartchair.evaluation.report import REPORT_FILE, evaluate_dataset, write_report
from smartchair.models.profile import PopulationSpec
from smartchair.services.feature_service import build_dataset
from smartchair.services.session_store import SessionStore
from smartchair.services.simulator import generate_population
from tests.conftest import FlakySession

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def default_logs():
    return generate_population(PopulationSpec())


@pytest.fixture(scope="module")
def default_dataset(default_logs):
    return build_dataset(default_logs)


def test_default_population_shape(default_dataset):
    labels = default_dataset.player_labels()
    assert len(labels) == 19
    assert sum(labels.values()) == 9
    # 35 分钟 → 每名选手 11 个完整的 3 分钟窗口
    assert default_dataset.n_rows == 19 * 11


def test_lr_and_svm_separate_skill(default_dataset):
    config = ExperimentConfig(models=["lr", "svm"], n_repeats=100, holdout=[5], seed=0)
    report = evaluate_dataset(default_dataset, config)

    assert report.get("lr").auc_mean >= 0.80
    assert report.get("svm").auc_mean >= 0.80

    importances = report.get("lr").importances
    assert importances["axn"] < 0
    assert importances["gyo"] > 0

    assert report.correlations.get("skill", "axn") < 0
    assert report.correlations.get("skill", "gyo") > 0


def test_shuffled_labels_give_chance_level(default_dataset):
    config = ExperimentConfig(models=["lr"], n_repeats=100, holdout=[5], seed=0, shuffle_labels=True)
    report = evaluate_dataset(default_dataset, config)
    assert 0.35 <= report.get("lr").auc_mean <= 0.65


def test_report_bytes_repeat(default_dataset, tmp_path):
    config = ExperimentConfig(models=["lr", "knn"], n_repeats=20, holdout=[5], seed=3)
    for name in ("first", "second"):
        write_report(evaluate_dataset(default_dataset, config), tmp_path / name)
    assert (tmp_path / "first" / REPORT_FILE).read_bytes() == (tmp_path / "second" / REPORT_FILE).read_bytes()
    assert json.loads((tmp_path / "first" / REPORT_FILE).read_text())["dataset"]["n_players"] == 19


def test_gateway_path_matches_direct_path(tmp_path, small_spec):
    logs = generate_population(small_spec)
    store = SessionStore(tmp_path / "sessions", durable=False)

    with TestClient(create_app(store)) as client:
        # 每名选手的第 3 个批次第一次上传时连接中断
        session = FlakySession(client, fail_on={2})
        replay = ReplayClient("http://testserver", session=session, config={"retry_delay": 0})
        for log in logs:
            session.fail_on = {2}
            assert replay.replay(log).closed

    restored = sorted(store.load_sealed_logs(), key=lambda log: log.player_id)
    assert [log.player_id for log in restored] == [log.player_id for log in logs]
    for original, copy in zip(logs, restored):
        assert copy.skill == original.skill
        assert copy.data.tobytes() == original.data.tobytes()

    direct = build_dataset(logs)
    via_gateway = build_dataset(restored)
    np.testing.assert_array_equal(direct.X, via_gateway.X)
    np.testing.assert_array_equal(direct.y, via_gateway.y)
