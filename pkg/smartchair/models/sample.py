import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List

import numpy as np

from smartchair.core.errors import MalformedRecord

# 通道顺序固定：加速度计(g)、陀螺仪(deg/s)、磁力计(任意单位)
CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")
FIELDS = ("t",) + CHANNELS
MOTION_CHANNELS = CHANNELS[:6]

# 标称采样间隔(秒)
SAMPLE_PERIOD = 0.01


@dataclass(frozen=True)
class ImuSample:
    """
    单次 IMU 读数

    t 为相对会话开始的秒数，z 轴为竖直方向
    """

    t: float
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float
    mx: float
    my: float
    mz: float

    def as_row(self) -> List[float]:
        return [getattr(self, name) for name in FIELDS]

    def to_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ImuSample":
        return cls(**{name: float(data[name]) for name in FIELDS})

    @classmethod
    def from_json(cls, json_str: str) -> "ImuSample":
        return cls.from_dict(json.loads(json_str))


@dataclass(frozen=True, eq=False)
class PlayerLog:
    """
    一名选手的会话日志

    样本以列式数组保存，形状为 (N, 10)，列顺序与 FIELDS 一致
    """

    player_id: str
    skill: int
    data: np.ndarray = field(repr=False)
    session_id: str = "default"

    def __post_init__(self):
        if self.skill not in (0, 1):
            raise MalformedRecord(f"Skill of player {self.player_id} must be 0 or 1, got {self.skill!r}", field="skill")
        data = np.array(self.data, dtype=np.float64)
        if data.size == 0:
            data = data.reshape(0, len(FIELDS))
        elif data.ndim != 2 or data.shape[1] != len(FIELDS):
            raise MalformedRecord(f"Log of player {self.player_id} must have {len(FIELDS)} columns, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[0])

    @property
    def times(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def duration(self) -> float:
        if self.n_samples == 0:
            return 0.0
        return float(self.times[-1] - self.times[0]) + SAMPLE_PERIOD

    def channel(self, name: str) -> np.ndarray:
        return self.data[:, FIELDS.index(name)]

    def iter_samples(self) -> Iterator[ImuSample]:
        for row in self.data.tolist():
            yield ImuSample(*row)

    def equals(self, other: "PlayerLog") -> bool:
        """比较两个日志是否逐位相同"""
        return (
            self.player_id == other.player_id
            and self.skill == other.skill
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )

    def metadata(self) -> Dict[str, Any]:
        return {"player_id": self.player_id, "skill": self.skill}

    @classmethod
    def from_samples(cls, player_id: str, skill: int, samples: Iterable[ImuSample], session_id: str = "default") -> "PlayerLog":
        rows = [s.as_row() for s in samples]
        data = np.array(rows, dtype=np.float64).reshape(-1, len(FIELDS))
        return cls(player_id=player_id, skill=skill, data=data, session_id=session_id)


@dataclass(frozen=True, eq=False)
class SessionWindow:
    """3 分钟分析窗口，特征提取的基本单位"""

    player_id: str
    skill: int
    window_index: int
    data: np.ndarray = field(repr=False)
    start_time: float = 0.0

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[0])

    def channel(self, name: str) -> np.ndarray:
        return self.data[:, FIELDS.index(name)]
