from typing import Any, Dict

import numpy as np

from smartchair.core.errors import NonBinaryLabels, SingleClassTraining

MODEL_FORMAT_VERSION = 1


def check_labels(y, require_both: bool = True) -> np.ndarray:
    """
    校验二分类标签

    Args:
        y: 标签
        require_both: 是否要求两类都出现

    Returns:
        int64 标签数组
    """
    y = np.asarray(y)
    if y.size == 0 or not np.isin(y, (0, 1)).all():
        raise NonBinaryLabels(f"Labels must be 0 or 1, got values {sorted(set(np.unique(y).tolist()))[:5]}")
    y = y.astype(np.int64)
    if require_both and np.unique(y).size < 2:
        raise SingleClassTraining(f"Training labels contain a single class ({int(y[0])})")
    return y


class Classifier:
    """
    分类器公共接口

    score 越大越可能是 1 类；predict 以 decision_threshold 截断 score
    """

    model_type = "base"
    decision_threshold = 0.5

    def score(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= self.decision_threshold).astype(np.int64)

    def hyperparameters(self) -> Dict[str, Any]:
        raise NotImplementedError

    def parameters(self) -> Dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_type": self.model_type,
            "hyperparameters": self.hyperparameters(),
            "parameters": self.parameters(),
        }
