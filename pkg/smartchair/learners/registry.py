"""
模型注册表与序列化

模型文档为带版本号的 JSON：模型类型、超参数、参数与标准化器。
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from smartchair.core.errors import ModelFormatError
from smartchair.learners.base import MODEL_FORMAT_VERSION, Classifier
from smartchair.learners.forest import ForestModel, train_forest
from smartchair.learners.knn import KnnModel, train_knn
from smartchair.learners.logistic import LogisticModel, train_logreg
from smartchair.learners.standardizer import Standardizer, fit_standardizer
from smartchair.learners.svm import SvmModel, train_svm
from smartchair.models.features import FEATURE_NAMES

logger = logging.getLogger(__name__)

# 模型名 → 训练函数，训练函数接收标准化后的 X、y 与超参数
MODEL_FACTORIES: Dict[str, Callable[..., Classifier]] = {
    "lr": train_logreg,
    "svm": train_svm,
    "knn": train_knn,
    "rf": train_forest,
}

MODEL_CLASSES = {
    "lr": LogisticModel,
    "svm": SvmModel,
    "knn": KnnModel,
    "rf": ForestModel,
}

MODEL_LABELS = {
    "lr": "Logistic Regression",
    "svm": "SVM",
    "knn": "KNN, k=5",
    "rf": "Random Forest, depth 4",
}


@dataclass(frozen=True)
class ModelSpec:
    """模型名与超参数"""

    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in MODEL_FACTORIES:
            raise ModelFormatError(f"Unknown model {self.name!r}, expected one of {sorted(MODEL_FACTORIES)}")

    @property
    def label(self) -> str:
        if self.name == "knn" and "k" in self.params:
            return f"KNN, k={self.params['k']}"
        if self.name == "rf" and "max_depth" in self.params:
            return f"Random Forest, depth {self.params['max_depth']}"
        return MODEL_LABELS[self.name]

    def with_params(self, **params: Any) -> "ModelSpec":
        return ModelSpec(self.name, {**self.params, **params})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(eq=False)
class FittedPipeline:
    """标准化器 + 模型，输入为原始特征"""

    standardizer: Standardizer
    model: Classifier
    feature_names: Sequence[str] = FEATURE_NAMES

    @property
    def model_type(self) -> str:
        return self.model.model_type

    def score(self, X) -> np.ndarray:
        return self.model.score(self.standardizer.transform(X))

    def predict(self, X) -> np.ndarray:
        return self.model.predict(self.standardizer.transform(X))

    def to_dict(self) -> Dict[str, Any]:
        doc = self.model.to_dict()
        doc["format_version"] = MODEL_FORMAT_VERSION
        doc["standardizer"] = self.standardizer.to_dict()
        doc["feature_names"] = list(self.feature_names)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, json_str: str) -> "FittedPipeline":
        try:
            doc = json.loads(json_str)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"Model document is not valid JSON: {e}")
        return model_from_dict(doc)


def model_from_dict(doc: Dict[str, Any]) -> FittedPipeline:
    """
    从模型文档恢复流水线

    Args:
        doc: FittedPipeline.to_dict 的输出

    Returns:
        可直接打分的流水线
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("Model document must be an object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported model format version {version!r}, expected {MODEL_FORMAT_VERSION}")
    model_type = doc.get("model_type")
    if model_type not in MODEL_CLASSES:
        raise ModelFormatError(f"Unknown model type {model_type!r}")

    try:
        model = MODEL_CLASSES[model_type].from_dict(doc)
        standardizer = Standardizer.from_dict(doc["standardizer"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"Invalid {model_type} document: {e}")
    return FittedPipeline(standardizer=standardizer, model=model, feature_names=tuple(doc.get("feature_names", FEATURE_NAMES)))


def fit_model(spec: ModelSpec, X, y, feature_names: Optional[Sequence[str]] = None) -> FittedPipeline:
    """
    在训练行上拟合标准化器与模型

    Args:
        spec: 模型规格
        X: 原始特征矩阵
        y: 0/1 标签
        feature_names: 特征名

    Returns:
        拟合好的流水线
    """
    standardizer = fit_standardizer(X)
    model = MODEL_FACTORIES[spec.name](standardizer.transform(X), y, **spec.params)
    return FittedPipeline(standardizer=standardizer, model=model, feature_names=tuple(feature_names or FEATURE_NAMES))
