"""
实验流程 - 每次重复只在训练选手的窗口上拟合标准化器与模型，在测试选手上计算 AUC
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from smartchair.config import ExperimentConfig
from smartchair.core.errors import DegenerateFold, EvaluationError
from smartchair.evaluation.metrics import accuracy, roc_auc, roc_curve
from smartchair.evaluation.splits import GroupSplit, shuffle_labels_by_player
from smartchair.learners.logistic import LogisticModel
from smartchair.learners.registry import FittedPipeline, ModelSpec, fit_model
from smartchair.models.features import Dataset
from smartchair.services.feature_service import CorrelationMatrix

logger = logging.getLogger(__name__)


@dataclass
class RepeatResult:
    repeat: int
    auc: float
    accuracy: float
    n_test_players: int
    roc: List[Tuple[float, float]] = field(default_factory=list)


@dataclass
class EvalReport:
    """
    一个模型在全部重复上的结果

    auc_mean / auc_std 由 aucs 计算(总体标准差)，roc 来自 roc_repeat 指定的那次重复
    """

    model: str
    label: str
    hyperparameters: Dict[str, Any]
    aucs: List[float]
    accuracies: List[float]
    roc_repeat: int
    roc: List[Tuple[float, float]]
    per_player: bool = False
    importances: Optional[Dict[str, float]] = None

    @property
    def auc_mean(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def auc_std(self) -> float:
        return float(np.std(self.aucs))

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.accuracies))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["roc"] = [list(point) for point in self.roc]
        data["auc_mean"] = self.auc_mean
        data["auc_std"] = self.auc_std
        data["accuracy_mean"] = self.accuracy_mean
        return data


@dataclass
class ExperimentReport:
    """一次完整实验：数据集概况、各模型结果与相关矩阵"""

    settings: Dict[str, Any]
    dataset: Dict[str, Any]
    models: List[EvalReport]
    correlations: Optional[CorrelationMatrix] = None

    def get(self, model: str) -> EvalReport:
        for report in self.models:
            if report.model == model:
                return report
        raise KeyError(model)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "settings": self.settings,
            "dataset": self.dataset,
            "models": {report.model: report.to_dict() for report in self.models},
        }
        if self.correlations is not None:
            data["correlations"] = {
                "file": "correlations.csv",
                "labels": list(self.correlations.labels),
                "constant": list(self.correlations.constant),
                "skill": dict(zip(self.correlations.labels, self.correlations.values[-1].tolist())),
            }
        return data


def feature_importance(model: Union[LogisticModel, FittedPipeline], feature_names: Optional[Sequence[str]] = None) -> Dict[str, float]:
    """
    逻辑回归的特征重要性：标准化单位下的权重系数(不含截距)

    Args:
        model: 逻辑回归模型或包含它的流水线
        feature_names: 特征名，默认取流水线中的特征名

    Returns:
        特征名 → 系数，顺序与特征顺序一致；正系数对应高水平选手
    """
    if isinstance(model, FittedPipeline):
        feature_names = feature_names or model.feature_names
        model = model.model
    if not isinstance(model, LogisticModel):
        raise EvaluationError(f"Feature importance needs a logistic regression model, got {type(model).__name__}")
    names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(model.weights.size)]
    return dict(zip(names, model.weights.tolist()))


def _player_means(scores: np.ndarray, labels: np.ndarray, groups: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    players = sorted(set(groups.tolist()))
    mean_scores = np.array([scores[groups == p].mean() for p in players])
    player_labels = np.array([labels[groups == p][0] for p in players])
    return mean_scores, player_labels


def _run_repeat(
    dataset: Dataset, spec: ModelSpec, split: GroupSplit, per_player: bool, keep_roc: bool, shuffle_labels: bool = False
) -> RepeatResult:
    overlap = set(split.train) & set(split.test)
    if overlap:
        raise EvaluationError(f"Repeat {split.repeat}: players {sorted(overlap)} are in both train and test")
    if shuffle_labels:
        dataset = shuffle_labels_by_player(dataset, split.seed, split)

    train = dataset.subset(dataset.mask_for(split.train))
    test = dataset.subset(dataset.mask_for(split.test))
    if np.unique(test.y).size < 2 or np.unique(train.y).size < 2:
        raise DegenerateFold(
            f"Repeat {split.repeat}: a fold lacks one class (train {np.bincount(train.y, minlength=2).tolist()}, "
            f"test {np.bincount(test.y, minlength=2).tolist()})",
            repeat=split.repeat,
            test=list(split.test),
        )

    if spec.name == "rf" and "seed" not in spec.params:
        spec = spec.with_params(seed=split.seed)
    pipeline = fit_model(spec, train.X, train.y, dataset.feature_names)

    scores = pipeline.score(test.X)
    labels = test.y
    threshold = pipeline.model.decision_threshold
    if per_player:
        scores, labels = _player_means(scores, labels, test.groups)
    predictions = (scores >= threshold).astype(np.int64)

    return RepeatResult(
        repeat=split.repeat,
        auc=roc_auc(scores, labels),
        accuracy=accuracy(predictions, labels),
        n_test_players=len(split.test),
        roc=roc_curve(scores, labels) if keep_roc else [],
    )


def run_experiment(
    dataset: Dataset,
    spec: ModelSpec,
    splits: Sequence[GroupSplit],
    roc_repeat: int = 0,
    per_player: bool = False,
    workers: int = 1,
    shuffle_labels: bool = False,
) -> EvalReport:
    """
    在所有划分上评估一个模型

    Args:
        dataset: 特征数据集
        spec: 模型规格
        splits: 分组划分
        roc_repeat: 输出 ROC 曲线的重复序号
        per_player: 是否先对每名测试选手的窗口得分取平均，再按选手计算 AUC
        workers: 并行线程数
        shuffle_labels: 零假设运行，每次重复以划分种子在训练与测试选手内部各自置换标签

    Returns:
        评估报告；逻辑回归另附在全部数据上拟合一次得到的特征重要性
    """
    known = set(dataset.groups.tolist())
    for split in splits:
        missing = (set(split.train) | set(split.test)) - known
        if missing:
            raise EvaluationError(f"Split {split.repeat} names players absent from the dataset: {sorted(missing)}")

    started = time.monotonic()

    def run(split: GroupSplit) -> RepeatResult:
        return _run_repeat(dataset, spec, split, per_player, split.repeat == roc_repeat, shuffle_labels)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, splits))
    else:
        results = [run(split) for split in splits]

    roc = next((r.roc for r in results if r.repeat == roc_repeat), [])
    importances = None
    if spec.name == "lr":
        fit_data = shuffle_labels_by_player(dataset, splits[0].seed) if shuffle_labels and splits else dataset
        importances = feature_importance(fit_model(spec, fit_data.X, fit_data.y, dataset.feature_names))

    report = EvalReport(
        model=spec.name,
        label=spec.label,
        hyperparameters=dict(spec.params),
        aucs=[r.auc for r in results],
        accuracies=[r.accuracy for r in results],
        roc_repeat=roc_repeat,
        roc=roc,
        per_player=per_player,
        importances=importances,
    )
    logger.info(
        f"{spec.label}: AUC {report.auc_mean:.3f} ± {report.auc_std:.3f} over {len(results)} repeats "
        f"({time.monotonic() - started:.1f}s)"
    )
    return report


def model_specs(config: ExperimentConfig) -> List[ModelSpec]:
    """按配置构造模型规格"""
    params = {
        "lr": {"l2": config.lr_l2, "max_iter": config.lr_max_iter, "tol": config.lr_tol},
        "svm": {"gamma": config.svm_gamma, "epochs": config.svm_epochs, "eta0": config.svm_eta0},
        "knn": {"k": config.knn_k},
        "rf": {"n_trees": config.rf_n_trees, "max_depth": config.rf_max_depth, "min_leaf": config.rf_min_leaf},
    }
    return [ModelSpec(name, params[name]) for name in config.models]
