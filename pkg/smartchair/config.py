import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from smartchair.core.errors import ConfigError

# 加载环境变量
load_dotenv()


class Settings:
    # 采集网关配置
    HOST = os.getenv("SMARTCHAIR_HOST", "0.0.0.0")
    PORT = os.getenv("SMARTCHAIR_PORT", "8000")
    STORAGE_ROOT = os.getenv("SMARTCHAIR_STORAGE_ROOT", "./sessions")
    MAX_BATCH_SIZE = os.getenv("SMARTCHAIR_MAX_BATCH_SIZE", "1000")

    # 应用配置
    DEBUG = os.getenv("DEBUG", "False").lower() == "true"
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @property
    def port(self) -> int:
        return int(self.PORT)

    @property
    def max_batch_size(self) -> int:
        return int(self.MAX_BATCH_SIZE)

    # 验证网关配置是否有效
    def validate(self):
        problems = []
        if not str(self.PORT).isdigit() or not 0 < int(self.PORT) < 65536:
            problems.append(f"SMARTCHAIR_PORT={self.PORT!r}")
        if not str(self.MAX_BATCH_SIZE).isdigit() or int(self.MAX_BATCH_SIZE) < 1:
            problems.append(f"SMARTCHAIR_MAX_BATCH_SIZE={self.MAX_BATCH_SIZE!r}")
        if not self.STORAGE_ROOT:
            problems.append("SMARTCHAIR_STORAGE_ROOT is empty")

        if problems:
            raise ConfigError(f"Invalid environment variables: {', '.join(problems)}")

        return True


# 创建设置实例
settings = Settings()


@dataclass
class ExperimentConfig:
    """
    实验配置

    可从 JSON 文件加载，命令行参数覆盖文件中的值
    """

    # 数据来源
    population_spec: Optional[str] = None
    logs_dir: Optional[str] = None
    store_root: Optional[str] = None
    gateway_url: Optional[str] = None

    # 特征参数
    threshold_g: float = 0.98
    window_seconds: float = 180.0
    completeness_fraction: float = 0.8

    # 模型参数
    models: List[str] = field(default_factory=lambda: ["lr", "svm", "knn", "rf"])
    lr_l2: float = 1e-4
    lr_max_iter: int = 2000
    lr_tol: float = 1e-6
    svm_gamma: float = 1.0
    svm_epochs: int = 3000
    svm_eta0: float = 1.0
    knn_k: int = 5
    rf_n_trees: int = 100
    rf_max_depth: int = 4
    rf_min_leaf: int = 1

    # 评估参数
    n_repeats: int = 100
    holdout: List[int] = field(default_factory=lambda: [5])
    seed: Optional[int] = 0
    per_player: bool = False
    shuffle_labels: bool = False
    roc_repeat: int = 0
    workers: int = 1

    output_dir: str = "./report"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        从字典创建配置，未知字段视为配置错误

        Args:
            data: 配置字典

        Returns:
            配置实例
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        config = cls(**data)
        if isinstance(config.holdout, int):
            config.holdout = [config.holdout]
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def merge(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """
        合并覆盖值，None 表示未指定

        Args:
            overrides: 命令行给出的字段

        Returns:
            新的配置实例
        """
        data = self.to_dict()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return ExperimentConfig.from_dict(data)

    def validate(self) -> bool:
        problems = []
        if self.seed is None:
            problems.append("seed is mandatory")
        if not 0 < self.completeness_fraction <= 1:
            problems.append(f"completeness_fraction={self.completeness_fraction}")
        if self.window_seconds <= 0:
            problems.append(f"window_seconds={self.window_seconds}")
        if self.n_repeats < 1:
            problems.append(f"n_repeats={self.n_repeats}")
        if not self.holdout or any(h < 1 for h in self.holdout):
            problems.append(f"holdout={self.holdout}")
        if not 0 <= self.roc_repeat < max(self.n_repeats, 1):
            problems.append(f"roc_repeat={self.roc_repeat} outside 0..{self.n_repeats - 1}")
        if self.workers < 1:
            problems.append(f"workers={self.workers}")
        unknown_models = [m for m in self.models if m not in ("lr", "svm", "knn", "rf")]
        if not self.models or unknown_models:
            problems.append(f"models={self.models}")
        if self.population_spec and not Path(self.population_spec).is_file():
            problems.append(f"population_spec {self.population_spec} does not exist")
        if self.logs_dir and not Path(self.logs_dir).is_dir():
            problems.append(f"logs_dir {self.logs_dir} does not exist")
        if self.store_root and not Path(self.store_root).is_dir():
            problems.append(f"store_root {self.store_root} does not exist")

        if problems:
            raise ConfigError(f"Invalid experiment config: {'; '.join(problems)}")
        return True
