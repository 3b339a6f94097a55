"""
报告图表 - matplotlib 的 Agg 后端输出 SVG
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from smartchair.models.sample import MOTION_CHANNELS, SessionWindow  # noqa: E402

logger = logging.getLogger(__name__)

# 固定 SVG 内部 id 的散列盐，并去掉日期元数据，重复运行输出一致
mpl.rcParams.update(
    {
        "svg.hashsalt": "smartchair",
        "svg.fonttype": "none",
        "font.size": 9,
        "axes.titlesize": 10,
        "legend.fontsize": 8,
        "figure.figsize": (6.0, 4.5),
    }
)

PathLike = Union[str, Path]


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    logger.debug(f"Wrote figure {path}")
    return path


def plot_roc(curves: Dict[str, List[Tuple[float, float]]], path: PathLike, aucs: Dict[str, float] = None) -> Path:
    """
    多模型 ROC 曲线

    Args:
        curves: 模型标签 → (FPR, TPR) 点
        path: 输出路径
        aucs: 模型标签 → 平均 AUC，显示在图例中
    """
    fig, ax = plt.subplots()
    for label, points in curves.items():
        if not points:
            continue
        fpr, tpr = zip(*points)
        legend = f"{label} (mean AUC {aucs[label]:.2f})" if aucs and label in aucs else label
        ax.step(fpr, tpr, where="post", label=legend)
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8, label="random guess")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title("ROC curve")
    ax.legend(loc="lower right")
    return _save(fig, path)


def plot_importance(importances: Dict[str, float], path: PathLike) -> Path:
    """逻辑回归系数条形图，正值对应高水平选手"""
    names = list(importances)
    values = np.array([importances[n] for n in names])
    colors = np.where(values >= 0, "tab:blue", "tab:red")

    fig, ax = plt.subplots()
    ax.barh(names[::-1], values[::-1], color=colors[::-1])
    ax.axvline(0, color="black", linewidth=0.8)
    ax.set_xlabel("Coefficient (standardized units)")
    ax.set_title("Feature importance, logistic regression")
    return _save(fig, path)


def plot_correlations(values: np.ndarray, labels: Sequence[str], path: PathLike) -> Path:
    """相关矩阵热力图"""
    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    image = ax.imshow(values, cmap="coolwarm", vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(len(labels)))
    ax.set_yticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90)
    ax.set_yticklabels(labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            ax.text(j, i, f"{values[i, j]:.2f}", ha="center", va="center", fontsize=5)
    fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04)
    ax.set_title("Feature correlations")
    return _save(fig, path)


def plot_raw_signal(window: SessionWindow, path: PathLike) -> Path:
    """一个窗口的加速度计与陀螺仪原始信号"""
    times = window.channel("t") - window.channel("t")[0]
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8.0, 5.0))
    for name in MOTION_CHANNELS:
        ax = axes[0] if name.startswith("a") else axes[1]
        ax.plot(times, window.channel(name), linewidth=0.4, label=name)
    axes[0].set_ylabel("Acceleration, g")
    axes[1].set_ylabel("Angular rate, deg/s")
    axes[1].set_xlabel("Time in window, s")
    for ax in axes:
        ax.legend(loc="upper right", ncol=3)
    axes[0].set_title(f"Raw signal, {window.player_id} window {window.window_index}")
    return _save(fig, path)
