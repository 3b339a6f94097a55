"""
逻辑回归 - 全批量梯度上升 + 回溯步长，最大化带岭惩罚的对数似然
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from scipy.special import expit

from smartchair.learners.base import Classifier, check_labels

logger = logging.getLogger(__name__)

DEFAULT_L2 = 1e-4


def _scores(theta: np.ndarray, X: np.ndarray) -> np.ndarray:
    return X @ theta[:-1] + theta[-1]


def log_likelihood(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> float:
    """
    带岭惩罚的对数似然 log L(θ) − λ‖w‖²/2

    θ 的最后一项为截距，不参与惩罚
    """
    z = _scores(theta, X)
    # log(1 + e^z) 用 logaddexp 计算，避免溢出
    ll = float(np.sum(y * z - np.logaddexp(0.0, z)))
    return ll - 0.5 * l2 * float(theta[:-1] @ theta[:-1])


def log_likelihood_gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> np.ndarray:
    residual = y - expit(_scores(theta, X))
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ residual - l2 * theta[:-1]
    grad[-1] = residual.sum()
    return grad


@dataclass(eq=False)
class LogisticModel(Classifier):
    """逻辑回归模型，score 为预测概率"""

    weights: np.ndarray = field(repr=False)
    intercept: float
    l2: float = DEFAULT_L2
    max_iter: int = 2000
    tol: float = 1e-6
    iterations: int = 0
    objective: float = 0.0
    history: List[float] = field(default_factory=list, repr=False)

    model_type = "lr"

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return expit(X @ self.weights + self.intercept)

    def score(self, X) -> np.ndarray:
        return self.predict_proba(X)

    def hyperparameters(self) -> Dict[str, Any]:
        return {"l2": self.l2, "max_iter": self.max_iter, "tol": self.tol}

    def parameters(self) -> Dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "iterations": self.iterations,
            "objective": self.objective,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LogisticModel":
        params = data["parameters"]
        return cls(
            weights=np.asarray(params["weights"], dtype=np.float64),
            intercept=float(params["intercept"]),
            iterations=int(params.get("iterations", 0)),
            objective=float(params.get("objective", 0.0)),
            **data["hyperparameters"],
        )


def train_logreg(
    X,
    y,
    l2: float = DEFAULT_L2,
    max_iter: int = 2000,
    tol: float = 1e-6,
    step: float = 1.0,
) -> LogisticModel:
    """
    训练逻辑回归

    Args:
        X: 标准化后的特征矩阵
        y: 0/1 标签
        l2: 权重的岭惩罚系数，截距不惩罚
        max_iter: 最大迭代次数
        tol: 梯度无穷范数小于该值即收敛
        step: 初始步长

    Returns:
        训练好的模型；history 为每次迭代后的目标值，单调不减
    """
    X = np.asarray(X, dtype=np.float64)
    y = check_labels(y).astype(np.float64)
    if l2 < 0:
        raise ValueError(f"l2 must be >= 0, got {l2}")

    theta = np.zeros(X.shape[1] + 1)
    current = log_likelihood(theta, X, y, l2)
    history = [current]
    iterations = 0

    for iterations in range(1, max_iter + 1):
        grad = log_likelihood_gradient(theta, X, y, l2)
        if np.max(np.abs(grad)) < tol:
            iterations -= 1
            break

        # Armijo 回溯：只接受充分上升的步长
        sq_norm = float(grad @ grad)
        while True:
            candidate = theta + step * grad
            value = log_likelihood(candidate, X, y, l2)
            if value >= current + 0.5 * step * sq_norm:
                break
            step *= 0.5
            if step < 1e-20:
                break
        if step < 1e-20:
            logger.debug(f"Line search stalled after {iterations} iterations")
            break

        theta, current = candidate, value
        history.append(current)
        step *= 2.0

    model = LogisticModel(
        weights=theta[:-1].copy(),
        intercept=float(theta[-1]),
        l2=l2,
        max_iter=max_iter,
        tol=tol,
        iterations=iterations,
        objective=current,
        history=history,
    )
    logger.debug(f"Logistic regression: {iterations} iterations, objective {current:.6f}")
    return model
