"""
随机森林 - Gini 不纯度的轴对齐决策树 + 自助采样 + 逐节点特征子采样
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from smartchair.core.errors import ModelFormatError
from smartchair.learners.base import Classifier, check_labels

logger = logging.getLogger(__name__)

LEAF = -1


def _gini(positives: np.ndarray, totals: np.ndarray) -> np.ndarray:
    p = positives / totals
    return 1.0 - p ** 2 - (1.0 - p) ** 2


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int = 1) -> Optional[Tuple[float, float]]:
    """
    单个特征上的最优阈值

    候选阈值为排序后相邻不同取值的中点；x <= 阈值的样本进入左子树。

    Returns:
        (加权 Gini, 阈值)；没有合法切分时返回 None
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.size
    left_n = np.arange(1, n)
    valid = (xs[1:] > xs[:-1]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
    if not valid.any():
        return None

    left_pos = np.cumsum(ys)[:-1]
    right_pos = ys.sum() - left_pos
    right_n = n - left_n
    impurity = (left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)) / n
    impurity = np.where(valid, impurity, np.inf)

    i = int(np.argmin(impurity))
    return float(impurity[i]), float((xs[i] + xs[i + 1]) / 2)


@dataclass(eq=False)
class DecisionTree:
    """以并列数组保存的二叉树，节点 0 为根；叶子保存 1 类比例"""

    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)

    def _add(self, value: float) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.value) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.value)

    def depth(self, node: int = 0) -> int:
        if self.feature[node] == LEAF:
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] != LEAF:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionTree":
        tree = cls(
            feature=[int(v) for v in data["feature"]],
            threshold=[float(v) for v in data["threshold"]],
            left=[int(v) for v in data["left"]],
            right=[int(v) for v in data["right"]],
            value=[float(v) for v in data["value"]],
        )
        if len({len(tree.feature), len(tree.threshold), len(tree.left), len(tree.right), len(tree.value)}) != 1:
            raise ModelFormatError("Decision tree arrays have different lengths")
        return tree


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_leaf: int = 1,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DecisionTree:
    """
    生长一棵 CART 树

    节点不纯且存在合法切分时总是切分，直到 max_depth。
    每个节点随机抽取 max_features 个候选特征(None 为全部特征，按序号顺序)，
    Gini 相同时取先出现的特征和较小的阈值。
    """
    tree = DecisionTree()
    n_features = X.shape[1]

    def build(index: np.ndarray, depth: int) -> int:
        labels = y[index]
        node = tree._add(float(labels.mean()))
        if depth >= max_depth or labels.min() == labels.max():
            return node

        if max_features is None or max_features >= n_features:
            candidates = np.arange(n_features)
        else:
            candidates = np.sort(rng.choice(n_features, size=max_features, replace=False))

        best = None
        for f in candidates.tolist():
            found = best_split(X[index, f], labels, min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], found[1], f)
        if best is None:
            return node

        _, threshold, f = best
        goes_left = X[index, f] <= threshold
        tree.feature[node] = f
        tree.threshold[node] = threshold
        tree.left[node] = build(index[goes_left], depth + 1)
        tree.right[node] = build(index[~goes_left], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return tree


def default_max_features(n_features: int) -> int:
    return max(1, int(math.sqrt(n_features)))


@dataclass(eq=False)
class ForestModel(Classifier):
    """随机森林，score 为各树叶子 1 类比例的均值"""

    trees: List[DecisionTree] = field(repr=False)
    tree_seeds: List[int] = field(repr=False)
    n_trees: int = 100
    max_depth: int = 4
    min_leaf: int = 1
    max_features: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0

    model_type = "rf"

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)

    def max_tree_depth(self) -> int:
        return max(tree.depth() for tree in self.trees)

    def hyperparameters(self) -> Dict[str, Any]:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }

    def parameters(self) -> Dict[str, Any]:
        return {"tree_seeds": list(self.tree_seeds), "trees": [tree.to_dict() for tree in self.trees]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ForestModel":
        params = data["parameters"]
        return cls(
            trees=[DecisionTree.from_dict(t) for t in params["trees"]],
            tree_seeds=[int(s) for s in params["tree_seeds"]],
            **data["hyperparameters"],
        )


def train_forest(
    X,
    y,
    n_trees: int = 100,
    max_depth: int = 4,
    min_leaf: int = 1,
    max_features: Optional[int] = -1,
    bootstrap: bool = True,
    seed: int = 0,
) -> ForestModel:
    """
    训练随机森林

    Args:
        X: 特征矩阵
        y: 0/1 标签
        n_trees: 树的数量
        max_depth: 最大深度
        min_leaf: 叶子最少样本数
        max_features: 每次切分考虑的特征数；-1 为 floor(√d)，None 为全部特征
        bootstrap: 是否对每棵树自助采样
        seed: 随机种子

    Returns:
        训练好的森林
    """
    X = np.asarray(X, dtype=np.float64)
    y = check_labels(y, require_both=False).astype(np.float64)
    if n_trees < 1 or max_depth < 0 or min_leaf < 1:
        raise ValueError(f"Invalid forest settings: n_trees={n_trees}, max_depth={max_depth}, min_leaf={min_leaf}")
    if max_features == -1:
        max_features = default_max_features(X.shape[1])

    tree_seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(n_trees)]
    trees = []
    for tree_seed in tree_seeds:
        rng = np.random.default_rng(tree_seed)
        if bootstrap:
            rows = rng.integers(0, X.shape[0], size=X.shape[0])
        else:
            rows = np.arange(X.shape[0])
        trees.append(grow_tree(X[rows], y[rows], max_depth, min_leaf, max_features, rng))

    model = ForestModel(
        trees=trees,
        tree_seeds=tree_seeds,
        n_trees=n_trees,
        max_depth=max_depth,
        min_leaf=min_leaf,
        max_features=max_features,
        bootstrap=bootstrap,
        seed=seed,
    )
    logger.debug(f"Random forest: {n_trees} trees, deepest {model.max_tree_depth()}")
    return model
