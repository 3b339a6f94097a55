from typing import List, Tuple

import numpy as np
from scipy.stats import rankdata

from smartchair.core.errors import SingleClassLabels


def _check(scores, labels) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ValueError(f"scores and labels differ in length: {scores.size} vs {labels.size}")
    positives = labels == 1
    if positives.all() or not positives.any():
        raise SingleClassLabels("ROC AUC needs both classes among the labels")
    return scores, positives


def roc_auc(scores, labels) -> float:
    """
    秩统计量(Mann–Whitney U)计算的 ROC AUC

    等于所有 (1 类, 0 类) 样本对中 P(score₁ > score₀) + ½P(score₁ = score₀)；
    并列分数取平均秩
    """
    scores, positives = _check(scores, labels)
    n1 = int(positives.sum())
    n0 = positives.size - n1
    ranks = rankdata(scores, method="average")
    u = ranks[positives].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def roc_curve(scores, labels) -> List[Tuple[float, float]]:
    """
    ROC 曲线上的 (FPR, TPR) 点

    从 (0,0) 开始，按分数从高到低在每个不同阈值处取一点，终于 (1,1)
    """
    scores, positives = _check(scores, labels)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp = np.cumsum(positives[order])
    fp = np.cumsum(~positives[order])

    # 每个不同阈值的最后一个位置
    last = np.r_[np.flatnonzero(sorted_scores[1:] != sorted_scores[:-1]), sorted_scores.size - 1]
    tpr = tp[last] / tp[-1]
    fpr = fp[last] / fp[-1]
    return [(0.0, 0.0)] + [(float(f), float(t)) for f, t in zip(fpr, tpr)]


def curve_area(points: List[Tuple[float, float]]) -> float:
    """梯形法求曲线下面积"""
    fpr = np.array([p[0] for p in points])
    tpr = np.array([p[1] for p in points])
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    return float(np.mean(predictions == labels))
