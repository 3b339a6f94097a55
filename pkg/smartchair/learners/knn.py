from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from smartchair.core.errors import KTooLarge
from smartchair.learners.base import Classifier, check_labels

DEFAULT_K = 5


@dataclass(eq=False)
class KnnModel(Classifier):
    """
    k 近邻分类器

    score 为最近 k 个训练样本中 1 类的比例；距离相同按训练行序号靠前者优先。
    predict 时恰好 0.5 判为 1 类。
    """

    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    k: int = DEFAULT_K

    model_type = "knn"

    def neighbours(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        distances = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(distances, axis=1, kind="stable")[:, : self.k]

    def score(self, X) -> np.ndarray:
        return self.y[self.neighbours(X)].mean(axis=1)

    def hyperparameters(self) -> Dict[str, Any]:
        return {"k": self.k}

    def parameters(self) -> Dict[str, Any]:
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KnnModel":
        params = data["parameters"]
        return train_knn(params["X"], params["y"], **data["hyperparameters"])


def train_knn(X, y, k: int = DEFAULT_K) -> KnnModel:
    """保存标准化后的训练集"""
    X = np.asarray(X, dtype=np.float64)
    y = check_labels(y, require_both=False).astype(np.float64)
    if k < 1 or k > X.shape[0]:
        raise KTooLarge(f"k={k} must be between 1 and the {X.shape[0]} training rows", k=k, rows=int(X.shape[0]))
    return KnnModel(X=X, y=y, k=int(k))


def knn_score(model: KnnModel, x) -> float:
    """单个样本的 1 类邻居比例"""
    return float(model.score(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])
