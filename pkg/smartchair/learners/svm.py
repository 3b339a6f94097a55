"""
软间隔线性 SVM - 原始问题的全批量次梯度下降

目标函数 ½‖w‖² + (γ/2) Σ max(0, 1 − y_i(wᵀx_i + b))，b 不参与正则。
步长 η_t = eta0 / t；次梯度法不保证单调，返回目标值最小的迭代点。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from smartchair.learners.base import Classifier, check_labels

logger = logging.getLogger(__name__)


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, signs: np.ndarray, gamma: float) -> float:
    slack = np.maximum(0.0, 1.0 - signs * (X @ w + b))
    return float(0.5 * (w @ w) + 0.5 * gamma * slack.sum())


def _subgradient(w: np.ndarray, b: float, X: np.ndarray, signs: np.ndarray, gamma: float) -> Tuple[np.ndarray, float]:
    active = signs * (X @ w + b) < 1.0
    weighted = signs[active]
    grad_w = w - 0.5 * gamma * (X[active].T @ weighted)
    grad_b = -0.5 * gamma * float(weighted.sum())
    return grad_w, grad_b


@dataclass(eq=False)
class SvmModel(Classifier):
    """线性 SVM，score(x) = wᵀx + b"""

    weights: np.ndarray = field(repr=False)
    bias: float
    gamma: float = 1.0
    epochs: int = 3000
    eta0: float = 1.0
    objective: float = 0.0
    history: List[float] = field(default_factory=list, repr=False)

    model_type = "svm"
    decision_threshold = 0.0

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.weights + self.bias

    def slacks(self, X, y) -> np.ndarray:
        """训练样本的松弛量 ξ_i = max(0, 1 − y_i(wᵀx_i + b))"""
        signs = np.where(np.asarray(y) == 1, 1.0, -1.0)
        return np.maximum(0.0, 1.0 - signs * self.score(X))

    def hyperparameters(self) -> Dict[str, Any]:
        return {"gamma": self.gamma, "epochs": self.epochs, "eta0": self.eta0}

    def parameters(self) -> Dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias, "objective": self.objective}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SvmModel":
        params = data["parameters"]
        return cls(
            weights=np.asarray(params["weights"], dtype=np.float64),
            bias=float(params["bias"]),
            objective=float(params.get("objective", 0.0)),
            **data["hyperparameters"],
        )


def train_svm(X, y, gamma: float = 1.0, epochs: int = 3000, eta0: float = 1.0) -> SvmModel:
    """
    训练软间隔线性 SVM

    Args:
        X: 标准化后的特征矩阵
        y: 0/1 标签，内部映射为 −1/+1
        gamma: 松弛惩罚权重 γ
        epochs: 全批量迭代次数
        eta0: 初始步长

    Returns:
        训练好的模型；history 为逐轮的最优目标值
    """
    X = np.asarray(X, dtype=np.float64)
    signs = np.where(check_labels(y) == 1, 1.0, -1.0)
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")

    w = np.zeros(X.shape[1])
    b = 0.0
    best_w, best_b = w.copy(), b
    best = svm_objective(w, b, X, signs, gamma)
    history = [best]

    for epoch in range(1, epochs + 1):
        grad_w, grad_b = _subgradient(w, b, X, signs, gamma)
        eta = eta0 / epoch
        w = w - eta * grad_w
        b = b - eta * grad_b

        value = svm_objective(w, b, X, signs, gamma)
        if value < best:
            best, best_w, best_b = value, w.copy(), b
        history.append(best)

    model = SvmModel(
        weights=best_w,
        bias=float(best_b),
        gamma=gamma,
        epochs=epochs,
        eta0=eta0,
        objective=best,
        history=history,
    )
    logger.debug(f"SVM: {epochs} epochs, best objective {best:.6f}")
    return model
