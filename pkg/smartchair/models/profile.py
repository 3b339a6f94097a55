import json
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

from smartchair.core.errors import InvalidProfile, InvalidSpec

Range = Tuple[float, float]
Triple = Tuple[float, float, float]


@dataclass(frozen=True)
class BehaviorProfile:
    """
    单个模拟选手的行为参数

    事件速率为每轴每分钟的主动动作次数；事件幅度以静息噪声标准差为单位，必须大于 3，
    保证事件能被 3σ 规则检出。
    """

    skill: int
    active_event_rate: float
    active_event_amplitude: float
    quiescent_std_accel: Triple
    quiescent_std_gyro: Triple
    lean_back_fraction: float
    lean_back_tilt: float
    rng_seed: int

    event_min_seconds: float = 0.2
    event_max_seconds: float = 1.0
    lean_back_episode_seconds: float = 150.0
    mag_baseline: Triple = (25.0, -8.0, 40.0)
    mag_std: float = 0.3

    def validate(self) -> None:
        problems = []
        if self.skill not in (0, 1):
            problems.append(f"skill={self.skill!r}")
        if not self.active_event_rate >= 0:
            problems.append(f"active_event_rate={self.active_event_rate}")
        if not self.active_event_amplitude > 3:
            problems.append(f"active_event_amplitude={self.active_event_amplitude} (must exceed 3)")
        for name in ("quiescent_std_accel", "quiescent_std_gyro"):
            values = getattr(self, name)
            if len(values) != 3 or not all(v > 0 for v in values):
                problems.append(f"{name}={values}")
        if not 0 <= self.lean_back_fraction <= 1:
            problems.append(f"lean_back_fraction={self.lean_back_fraction}")
        if not 0 <= self.lean_back_tilt < 90:
            problems.append(f"lean_back_tilt={self.lean_back_tilt}")
        if not 0 < self.event_min_seconds <= self.event_max_seconds:
            problems.append(f"event duration range ({self.event_min_seconds}, {self.event_max_seconds})")
        if self.lean_back_episode_seconds <= 0:
            problems.append(f"lean_back_episode_seconds={self.lean_back_episode_seconds}")
        if self.mag_std <= 0:
            problems.append(f"mag_std={self.mag_std}")

        if problems:
            raise InvalidProfile(f"Invalid behavior profile: {', '.join(problems)}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BehaviorProfile":
        data = dict(data)
        for name in ("quiescent_std_accel", "quiescent_std_gyro", "mag_baseline"):
            if name in data:
                data[name] = tuple(data[name])
        return cls(**data)


@dataclass(frozen=True)
class ProfileDistribution:
    """一个技能等级的参数分布，每个字段为均匀分布的 (下界, 上界)"""

    active_event_rate: Range
    active_event_amplitude: Range
    accel_std_x: Range
    accel_std_y: Range
    accel_std_z: Range
    gyro_std_x: Range
    gyro_std_y: Range
    gyro_std_z: Range
    lean_back_fraction: Range
    lean_back_tilt: Range

    def validate(self, label: str) -> None:
        for name, (low, high) in asdict(self).items():
            if not low <= high:
                raise InvalidSpec(f"{label}.{name}: lower bound {low} exceeds upper bound {high}")

    def midpoint(self, other: "ProfileDistribution") -> "ProfileDistribution":
        """两个分布逐字段取中点，用于中间水平选手"""
        mine, theirs = asdict(self), asdict(other)
        return ProfileDistribution(
            **{name: ((mine[name][0] + theirs[name][0]) / 2, (mine[name][1] + theirs[name][1]) / 2) for name in mine}
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProfileDistribution":
        return cls(**{name: tuple(value) for name, value in data.items()})


# 默认参数是模拟器自身的选择：高水平选手主动动作少、后仰少，x 向平移与 y 轴摇摆的细微晃动更强
HIGH_SKILL = ProfileDistribution(
    active_event_rate=(0.8, 2.0),
    active_event_amplitude=(20.0, 30.0),
    accel_std_x=(0.013, 0.018),
    accel_std_y=(0.008, 0.011),
    accel_std_z=(0.005, 0.007),
    gyro_std_x=(0.4, 0.6),
    gyro_std_y=(0.9, 1.3),
    gyro_std_z=(0.4, 0.6),
    lean_back_fraction=(0.0, 0.2),
    lean_back_tilt=(14.0, 22.0),
)

LOW_SKILL = ProfileDistribution(
    active_event_rate=(2.2, 4.5),
    active_event_amplitude=(20.0, 30.0),
    accel_std_x=(0.008, 0.012),
    accel_std_y=(0.008, 0.011),
    accel_std_z=(0.005, 0.007),
    gyro_std_x=(0.4, 0.6),
    gyro_std_y=(0.5, 0.8),
    gyro_std_z=(0.4, 0.6),
    lean_back_fraction=(0.25, 0.6),
    lean_back_tilt=(14.0, 22.0),
)


@dataclass(frozen=True)
class PopulationSpec:
    """
    模拟人群规格

    默认 9 名高水平选手与 10 名业余选手，每局约 35 分钟。可选的中间水平选手按自评标签计入。
    """

    n_high: int = 9
    n_low: int = 10
    n_intermediate: int = 0
    intermediate_label: int = 0
    high: ProfileDistribution = HIGH_SKILL
    low: ProfileDistribution = LOW_SKILL
    session_minutes: float = 35.0
    duration_jitter_minutes: float = 0.0
    gap_rate: float = 0.0
    master_seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.n_high < 0 or self.n_low < 0 or self.n_intermediate < 0:
            problems.append(f"counts ({self.n_high}, {self.n_low}, {self.n_intermediate})")
        if self.n_high + self.n_low + self.n_intermediate == 0:
            problems.append("population is empty")
        if self.intermediate_label not in (0, 1):
            problems.append(f"intermediate_label={self.intermediate_label}")
        if self.session_minutes <= 0:
            problems.append(f"session_minutes={self.session_minutes}")
        if not 0 <= self.duration_jitter_minutes < self.session_minutes:
            problems.append(f"duration_jitter_minutes={self.duration_jitter_minutes}")
        if not 0 <= self.gap_rate < 1:
            problems.append(f"gap_rate={self.gap_rate}")
        if problems:
            raise InvalidSpec(f"Invalid population spec: {', '.join(problems)}")
        self.high.validate("high")
        self.low.validate("low")

    @property
    def n_players(self) -> int:
        return self.n_high + self.n_low + self.n_intermediate

    def class_counts(self) -> Dict[int, int]:
        counts = {0: self.n_low, 1: self.n_high}
        counts[self.intermediate_label] += self.n_intermediate
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PopulationSpec":
        data = dict(data)
        try:
            # 分布字段可只给出需要覆盖的部分
            for name, default in (("high", HIGH_SKILL), ("low", LOW_SKILL)):
                if name in data:
                    data[name] = ProfileDistribution.from_dict({**asdict(default), **data[name]})
            return cls(**data)
        except TypeError as e:
            raise InvalidSpec(f"Invalid population spec: {e}")

    @classmethod
    def from_file(cls, path: str) -> "PopulationSpec":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidSpec(f"Cannot read population spec {path}: {e}")
        return cls.from_dict(data)
