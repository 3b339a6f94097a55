from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from smartchair.core.errors import InsufficientRows, ModelFormatError


@dataclass(frozen=True, eq=False)
class Standardizer:
    """
    逐特征标准化 (x − μ) / σ

    μ、σ 只从训练行学习；σ 为 0 的常量特征变换后恒为 0
    """

    mean: np.ndarray = field(repr=False)
    std: np.ndarray = field(repr=False)

    def transform(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        constant = self.std == 0
        scale = np.where(constant, 1.0, self.std)
        out = (rows - self.mean) / scale
        out[..., constant] = 0.0
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Standardizer":
        try:
            mean = np.asarray(data["mean"], dtype=np.float64)
            std = np.asarray(data["std"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"Invalid standardizer document: {e}")
        if mean.shape != std.shape or mean.ndim != 1:
            raise ModelFormatError(f"Standardizer mean/std shapes differ: {mean.shape} vs {std.shape}")
        return cls(mean=mean, std=std)


def fit_standardizer(rows) -> Standardizer:
    """
    从训练行学习标准化参数

    Args:
        rows: 训练矩阵，至少 2 行

    Returns:
        标准化器
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise InsufficientRows(f"Standardizer needs at least 2 training rows, got shape {rows.shape}")
    # 常量列的均值有舍入误差，std 可能不是精确的 0
    std = np.where(np.ptp(rows, axis=0) == 0, 0.0, rows.std(axis=0))
    return Standardizer(mean=rows.mean(axis=0), std=std)


def apply(standardizer: Standardizer, rows) -> np.ndarray:
    return standardizer.transform(rows)
