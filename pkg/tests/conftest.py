import numpy as np
import pytest
import requests
from fastapi.testclient import TestClient

from smartchair.api.gateway_api import create_app
from smartchair.models.profile import BehaviorProfile, PopulationSpec
from smartchair.models.sample import FIELDS, PlayerLog
from smartchair.services.session_store import SessionStore


def make_log(player_id="p1", skill=1, n=300, seed=0, start=0.0, session_id="default"):
    """100 Hz 的随机日志，az 围绕 1 g"""
    rng = np.random.default_rng(seed)
    data = rng.normal(0.0, 0.01, size=(n, len(FIELDS)))
    data[:, 0] = start + np.arange(n) / 100
    data[:, FIELDS.index("az")] += 1.0
    return PlayerLog(player_id=player_id, skill=skill, data=data, session_id=session_id)


def make_profile(**overrides):
    params = dict(
        skill=1,
        active_event_rate=1.0,
        active_event_amplitude=12.0,
        quiescent_std_accel=(0.01, 0.01, 0.006),
        quiescent_std_gyro=(0.5, 1.0, 0.5),
        lean_back_fraction=0.0,
        lean_back_tilt=18.0,
        rng_seed=7,
    )
    params.update(overrides)
    return BehaviorProfile(**params)


class FlakySession:
    """
    把 requests 风格的 post 转给 TestClient

    fail_on 中的批次序号第一次上传时抛出连接错误
    """

    def __init__(self, client: TestClient, fail_on=()):
        self.client = client
        self.fail_on = set(fail_on)
        self.calls = 0

    def post(self, url, json=None, timeout=None):
        self.calls += 1
        seq = (json or {}).get("seq")
        if seq in self.fail_on:
            self.fail_on.discard(seq)
            raise requests.ConnectionError(f"connection dropped on batch {seq}")
        return self.client.post(url, json=json)


@pytest.fixture
def log_factory():
    return make_log


@pytest.fixture
def profile_factory():
    return make_profile


@pytest.fixture
def store(tmp_path):
    return SessionStore(tmp_path / "sessions", durable=False)


@pytest.fixture
def client(store):
    with TestClient(create_app(store)) as test_client:
        yield test_client


@pytest.fixture
def small_spec():
    """6 + 6 名选手、每局 10 分钟的小人群"""
    return PopulationSpec(n_high=6, n_low=6, session_minutes=10.0, master_seed=3)
