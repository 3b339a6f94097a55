import json

import pytest

from smartchair.config import ExperimentConfig, Settings
from smartchair.core.errors import ConfigError


def test_defaults_are_valid():
    config = ExperimentConfig()
    assert config.validate()
    assert config.models == ["lr", "svm", "knn", "rf"]
    assert config.holdout == [5]
    assert config.n_repeats == 100


def test_file_values_and_flag_overrides(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"n_repeats": 20, "holdout": 4, "seed": 3, "knn_k": 7}))

    config = ExperimentConfig.from_file(path)
    assert config.holdout == [4]
    assert config.knn_k == 7

    merged = config.merge({"n_repeats": 50, "seed": None, "models": ["lr"]})
    assert merged.n_repeats == 50
    assert merged.seed == 3
    assert merged.knn_k == 7
    assert merged.models == ["lr"]
    # 原配置不受影响
    assert config.n_repeats == 20


def test_round_trip_through_dict():
    config = ExperimentConfig(models=["svm"], holdout=[4, 5], per_player=True)
    assert ExperimentConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize(
    "content",
    ["{not json", json.dumps([1, 2]), json.dumps({"n_repeat": 10})],
)
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "overrides",
    [
        {"seed": None},
        {"completeness_fraction": 0.0},
        {"window_seconds": -1.0},
        {"n_repeats": 0},
        {"holdout": [0]},
        {"roc_repeat": 100},
        {"workers": 0},
        {"models": ["lr", "xgb"]},
        {"models": []},
        {"logs_dir": "/definitely/not/here"},
    ],
)
def test_invalid_values_are_reported(overrides):
    config = ExperimentConfig(**overrides)
    with pytest.raises(ConfigError):
        config.validate()


def test_settings_validation():
    settings = Settings()
    settings.PORT = "8000"
    settings.MAX_BATCH_SIZE = "1000"
    assert settings.validate()
    assert settings.port == 8000

    settings.PORT = "99999"
    with pytest.raises(ConfigError, match="SMARTCHAIR_PORT"):
        settings.validate()

    settings.PORT = "8000"
    settings.MAX_BATCH_SIZE = "none"
    with pytest.raises(ConfigError, match="SMARTCHAIR_MAX_BATCH_SIZE"):
        settings.validate()


def test_debug_setting_lowers_default_log_level(monkeypatch):
    import logging

    from smartchair.config import settings
    from smartchair.core.logger import setup_logging

    monkeypatch.setattr(settings, "DEBUG", True)
    setup_logging()
    assert logging.getLogger().level == logging.DEBUG

    setup_logging("warning")
    assert logging.getLogger().level == logging.WARNING
    setup_logging("info")
