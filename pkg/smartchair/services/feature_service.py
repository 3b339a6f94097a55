"""
特征提取 - 从 3 分钟窗口计算 13 个特征，并汇总为数据集与相关矩阵
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from smartchair.core.errors import EmptySeries, InsufficientRows
from smartchair.models.features import FEATURE_NAMES, Dataset, FeatureVector
from smartchair.models.sample import MOTION_CHANNELS, PlayerLog, SessionWindow
from smartchair.services.telemetry import DEFAULT_COMPLETENESS, DEFAULT_WINDOW_SECONDS, segment_windows

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_G = 0.98
SIGMA_RULE = 3.0


def _series(values) -> np.ndarray:
    series = np.asarray(values, dtype=np.float64).reshape(-1)
    if series.size < 2:
        raise EmptySeries(f"Need at least 2 samples, got {series.size}")
    return series


def active_mask(values) -> np.ndarray:
    """
    主动动作掩码：偏离窗口均值超过 3 倍标准差的样本

    常数序列没有样本被标记
    """
    series = _series(values)
    # 常数序列的 std 可能因均值舍入而略大于 0，按极差判断
    if np.ptp(series) == 0:
        return np.zeros(series.shape, dtype=bool)
    return np.abs(series - series.mean()) > SIGMA_RULE * series.std()


def active_portion(values) -> float:
    """
    主动动作占比

    Args:
        values: 单个通道的样本

    Returns:
        |{i : |v_i − mean| > 3·std}| / N
    """
    mask = active_mask(values)
    return float(np.count_nonzero(mask)) / mask.size


def quiescent_dispersion(values) -> float:
    """
    静息离散度：3σ 带内样本的方差(ddof=1)

    均值与标准差在整个窗口上计算；常数序列或带内样本少于 2 个时返回 0
    """
    series = _series(values)
    quiet = series[~active_mask(series)]
    if quiet.size < 2 or np.ptp(quiet) == 0:
        return 0.0
    return float(quiet.var(ddof=1))


def lean_back_portion(az_values, threshold_g: float = DEFAULT_THRESHOLD_G) -> float:
    """竖直加速度低于阈值的样本占比"""
    az = np.asarray(az_values, dtype=np.float64).reshape(-1)
    if az.size == 0:
        raise EmptySeries("Cannot compute lean-back portion of an empty series")
    return float(np.count_nonzero(az < threshold_g)) / az.size


def extract_features(window: SessionWindow, threshold_g: float = DEFAULT_THRESHOLD_G) -> FeatureVector:
    """
    计算一个窗口的特征向量

    Args:
        window: 分析窗口
        threshold_g: 后仰判定阈值(g)

    Returns:
        特征向量，字段顺序与 FEATURE_NAMES 一致
    """
    features = {}
    for name in MOTION_CHANNELS:
        series = window.channel(name)
        features[f"{name}n"] = active_portion(series)
        features[f"{name}o"] = quiescent_dispersion(series)
    features["lb"] = lean_back_portion(window.channel("az"), threshold_g)

    return FeatureVector(
        player_id=window.player_id,
        window_index=window.window_index,
        skill=window.skill,
        **features,
    )


def build_dataset(
    logs: Sequence[PlayerLog],
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    completeness_fraction: float = DEFAULT_COMPLETENESS,
    threshold_g: float = DEFAULT_THRESHOLD_G,
) -> Dataset:
    """
    日志 → 窗口 → 特征数据集

    Args:
        logs: 选手日志
        window_seconds: 窗口时长
        completeness_fraction: 窗口最低完整度
        threshold_g: 后仰判定阈值

    Returns:
        每行一个窗口的数据集，按选手 ID 与窗口序号排列
    """
    vectors: List[FeatureVector] = []
    for log in sorted(logs, key=lambda item: item.player_id):
        windows = segment_windows(log, window_seconds, completeness_fraction)
        if not windows:
            logger.warning(f"Player {log.player_id} has no complete window and is left out")
        vectors.extend(extract_features(window, threshold_g) for window in windows)

    dataset = Dataset.from_vectors(vectors)
    logger.info(f"Extracted {dataset.n_rows} windows from {len(logs)} logs")
    return dataset


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """13 个特征与技能标签的 Pearson 相关矩阵"""

    labels: Tuple[str, ...]
    values: np.ndarray = field(repr=False)
    # 方差为 0 的变量，与其他变量的相关记为 0
    constant: Tuple[str, ...] = ()

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.labels), columns=list(self.labels))

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index_label="variable")


def correlation_matrix(dataset: Dataset) -> CorrelationMatrix:
    """
    计算特征与技能标签的相关矩阵

    Args:
        dataset: 特征数据集

    Returns:
        14×14 对称矩阵，对角线为 1，取值在 [−1, 1]
    """
    if dataset.n_rows < 2:
        raise InsufficientRows(f"Correlation needs at least 2 rows, got {dataset.n_rows}")

    labels = tuple(dataset.feature_names) + ("skill",)
    table = np.column_stack([dataset.X, dataset.y.astype(np.float64)])
    centered = table - table.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    constant = norms == 0

    safe = np.where(constant, 1.0, norms)
    values = (centered.T @ centered) / np.outer(safe, safe)
    values[constant, :] = 0.0
    values[:, constant] = 0.0
    values = np.clip((values + values.T) / 2, -1.0, 1.0)
    np.fill_diagonal(values, 1.0)

    flagged = tuple(label for label, flag in zip(labels, constant) if flag)
    if flagged:
        logger.warning(f"Zero-variance variables in correlation matrix: {', '.join(flagged)}")
    return CorrelationMatrix(labels=labels, values=values, constant=flagged)


def feature_table(dataset: Dataset) -> pd.DataFrame:
    """按技能分组的特征均值，用于快速核对类别差异"""
    frame = dataset.to_frame()
    return frame.groupby("skill")[list(FEATURE_NAMES)].mean()
