import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from smartchair.core.errors import MalformedRecord

# 特征顺序固定：六个主动动作占比、后仰占比、六个静息离散度
FEATURE_NAMES = (
    "axn", "ayn", "azn", "gxn", "gyn", "gzn",
    "lb",
    "axo", "ayo", "azo", "gxo", "gyo", "gzo",
)
ID_COLUMNS = ("player_id", "window_index", "skill")


@dataclass(frozen=True)
class FeatureVector:
    """一个窗口的 13 个特征"""

    player_id: str
    window_index: int
    skill: int
    axn: float
    ayn: float
    azn: float
    gxn: float
    gyn: float
    gzn: float
    lb: float
    axo: float
    ayo: float
    azo: float
    gxo: float
    gyo: float
    gzo: float

    def values(self) -> List[float]:
        return [getattr(self, name) for name in FEATURE_NAMES]

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in ID_COLUMNS}
        data.update(zip(FEATURE_NAMES, self.values()))
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureVector":
        return cls(
            player_id=str(data["player_id"]),
            window_index=int(data["window_index"]),
            skill=int(data["skill"]),
            **{name: float(data[name]) for name in FEATURE_NAMES},
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    特征数据集

    每行一个窗口；groups 为每行所属选手，同一选手的所有行共享一个标签。
    """

    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    groups: np.ndarray = field(repr=False)
    window_index: np.ndarray = field(repr=False)
    feature_names: Sequence[str] = FEATURE_NAMES

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64).reshape(-1, len(self.feature_names))
        y = np.array(self.y, dtype=np.int64).reshape(-1)
        groups = np.array(self.groups, dtype=object).reshape(-1)
        window_index = np.array(self.window_index, dtype=np.int64).reshape(-1)
        if not (X.shape[0] == y.shape[0] == groups.shape[0] == window_index.shape[0]):
            raise MalformedRecord(
                f"Dataset columns disagree on row count: X={X.shape[0]}, y={y.shape[0]}, groups={groups.shape[0]}"
            )
        for array in (X, y, groups, window_index):
            array.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "window_index", window_index)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    def players(self) -> List[str]:
        return sorted(set(self.groups.tolist()))

    def player_labels(self) -> Dict[str, int]:
        """每名选手的标签；同一选手出现两种标签时报错"""
        labels: Dict[str, int] = {}
        for player, label in zip(self.groups.tolist(), self.y.tolist()):
            if labels.setdefault(player, label) != label:
                raise MalformedRecord(f"Player {player} has windows with both labels", player_id=player)
        return dict(sorted(labels.items()))

    def mask_for(self, players: Iterable[str]) -> np.ndarray:
        return np.isin(self.groups, list(players))

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(
            X=self.X[mask],
            y=self.y[mask],
            groups=self.groups[mask],
            window_index=self.window_index[mask],
            feature_names=self.feature_names,
        )

    def with_labels(self, y: np.ndarray) -> "Dataset":
        return Dataset(X=self.X, y=y, groups=self.groups, window_index=self.window_index, feature_names=self.feature_names)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(self.feature_names))
        frame["player_id"] = self.groups.astype(str)
        frame["window_index"] = self.window_index
        frame["skill"] = self.y
        return frame

    def to_csv(self, path: str) -> None:
        # 浮点数按最短往返表示写出
        self.to_frame().to_csv(path, index=False, float_format=None)

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector]) -> "Dataset":
        return cls(
            X=np.array([v.values() for v in vectors], dtype=np.float64).reshape(-1, len(FEATURE_NAMES)),
            y=np.array([v.skill for v in vectors], dtype=np.int64),
            groups=np.array([v.player_id for v in vectors], dtype=object),
            window_index=np.array([v.window_index for v in vectors], dtype=np.int64),
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Dataset":
        missing = [name for name in FEATURE_NAMES + ID_COLUMNS if name not in frame.columns]
        if missing:
            raise MalformedRecord(f"Dataset is missing columns: {', '.join(missing)}", field=missing[0])
        return cls(
            X=frame[list(FEATURE_NAMES)].to_numpy(dtype=np.float64),
            y=frame["skill"].to_numpy(dtype=np.int64),
            groups=frame["player_id"].astype(str).to_numpy(dtype=object),
            window_index=frame["window_index"].to_numpy(dtype=np.int64),
        )

    @classmethod
    def read_csv(cls, path: str) -> "Dataset":
        frame = pd.read_csv(path, float_precision="round_trip", dtype={"player_id": str})
        return cls.from_frame(frame)
