"""
按选手分组的重复留出划分
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from smartchair.core.errors import InfeasibleSplit
from smartchair.models.features import Dataset

logger = logging.getLogger(__name__)

MAX_DRAWS = 10000


@dataclass(frozen=True)
class GroupSplit:
    """一次重复中的训练/测试选手"""

    train: Tuple[str, ...]
    test: Tuple[str, ...]
    repeat: int
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["train"] = list(self.train)
        data["test"] = list(self.test)
        return data


def _holdout_sizes(holdout: Union[int, Sequence[int]]) -> List[int]:
    if isinstance(holdout, (int, np.integer)):
        return [int(holdout)]
    return sorted({int(h) for h in holdout})


def check_feasible(player_labels: Mapping[str, int], holdout: Union[int, Sequence[int]]) -> None:
    """
    检查训练与测试两侧是否都能包含两类选手

    每类至少 2 名选手，且 2 <= holdout <= 选手数 − 2
    """
    counts = np.bincount(np.fromiter(player_labels.values(), dtype=np.int64), minlength=2)
    n_players = len(player_labels)
    for size in _holdout_sizes(holdout):
        if counts.min() < 2:
            raise InfeasibleSplit(
                f"Need at least 2 players per class, got {int(counts[0])} labeled 0 and {int(counts[1])} labeled 1",
                holdout=size,
            )
        if not 2 <= size <= n_players - 2:
            raise InfeasibleSplit(
                f"Holding out {size} of {n_players} players cannot leave both classes on both sides",
                holdout=size,
            )


def make_splits(
    player_labels: Mapping[str, int],
    n_repeats: int = 100,
    holdout: Union[int, Sequence[int]] = 5,
    seed: int = 0,
) -> List[GroupSplit]:
    """
    生成重复的分组留出划分

    Args:
        player_labels: 选手 → 标签
        n_repeats: 重复次数
        holdout: 测试选手数；给出多个值时每次重复均匀抽取一个
        seed: 随机种子

    Returns:
        n_repeats 个划分，测试集两类都至少 1 名选手，训练集同样包含两类
    """
    check_feasible(player_labels, holdout)
    players = sorted(player_labels)
    labels = np.array([player_labels[p] for p in players])
    sizes = _holdout_sizes(holdout)
    rng = np.random.default_rng(seed)

    splits = []
    redraws = 0
    for repeat in range(n_repeats):
        size = sizes[0] if len(sizes) == 1 else int(rng.choice(sizes))
        for _ in range(MAX_DRAWS):
            chosen = np.zeros(len(players), dtype=bool)
            chosen[rng.choice(len(players), size=size, replace=False)] = True
            if np.unique(labels[chosen]).size == 2 and np.unique(labels[~chosen]).size == 2:
                break
            redraws += 1
        else:
            raise InfeasibleSplit(f"No valid split found for repeat {repeat} after {MAX_DRAWS} draws", repeat=repeat)

        splits.append(
            GroupSplit(
                train=tuple(p for p, c in zip(players, chosen) if not c),
                test=tuple(p for p, c in zip(players, chosen) if c),
                repeat=repeat,
                seed=int(rng.integers(2**31 - 1)),
            )
        )

    logger.debug(f"Drew {n_repeats} splits of {len(players)} players with {redraws} redraws")
    return splits


def shuffle_labels_by_player(dataset: Dataset, seed: int = 0, split: Optional[GroupSplit] = None) -> Dataset:
    """
    在选手之间随机置换标签，得到零假设数据集

    每名选手的所有窗口仍共享一个标签。给出 split 时只在训练选手之间、测试选手之间分别置换，
    两折的类别构成保持不变。

    Args:
        dataset: 特征数据集
        seed: 随机种子
        split: 可选的分组划分

    Returns:
        标签被替换的数据集
    """
    labels = dataset.player_labels()
    folds = [list(labels)] if split is None else [list(split.train), list(split.test)]

    rng = np.random.default_rng(seed)
    mapping: Dict[str, int] = {}
    for players in folds:
        mapping.update(zip(players, rng.permutation([labels[p] for p in players]).tolist()))

    y = np.array([mapping.get(p, labels[p]) for p in dataset.groups.tolist()], dtype=np.int64)
    return dataset.with_labels(y)
