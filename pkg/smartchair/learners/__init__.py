"""
从零实现的四种分类器：逻辑回归、软间隔线性 SVM、KNN 与随机森林
"""

from smartchair.learners.registry import MODEL_FACTORIES, FittedPipeline, ModelSpec, fit_model, model_from_dict
from smartchair.learners.standardizer import Standardizer, fit_standardizer

__all__ = [
    "MODEL_FACTORIES",
    "FittedPipeline",
    "ModelSpec",
    "Standardizer",
    "fit_model",
    "fit_standardizer",
    "model_from_dict",
]
