"""
座椅数据模拟器 - 按行为参数生成 100 Hz 的选手日志

每个通道的信号 = 基线 + 静息高斯噪声 + 泊松到达的半正弦主动动作。
后仰区间内 az 基线降为 cos(倾角)，其余时间为 1 g。
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from smartchair.core.errors import InvalidProfile
from smartchair.models.profile import BehaviorProfile, PopulationSpec, ProfileDistribution
from smartchair.models.sample import FIELDS, SAMPLE_PERIOD, PlayerLog
from smartchair.services.log_io import write_log

logger = logging.getLogger(__name__)

SAMPLE_RATE_HZ = 100

_AXES = ("x", "y", "z")


def _lean_back_mask(times: np.ndarray, duration: float, profile: BehaviorProfile, rng: np.random.Generator) -> np.ndarray:
    """
    生成后仰区间掩码

    后仰总时长为 lean_back_fraction × duration，拆成约 episode 秒一段的若干次，
    与直立间隔交替出现，间隔长度按 Dirichlet 分配。
    """
    fraction = profile.lean_back_fraction
    if fraction <= 0:
        return np.zeros(times.shape, dtype=bool)
    if fraction >= 1:
        return np.ones(times.shape, dtype=bool)

    lean_total = fraction * duration
    episodes = max(1, round(lean_total / profile.lean_back_episode_seconds))
    lean_parts = rng.dirichlet(np.ones(episodes)) * lean_total
    upright_parts = rng.dirichlet(np.ones(episodes + 1)) * (duration - lean_total)

    mask = np.zeros(times.shape, dtype=bool)
    cursor = upright_parts[0]
    for lean, upright in zip(lean_parts, upright_parts[1:]):
        mask |= (times >= cursor) & (times < cursor + lean)
        cursor += lean + upright
    return mask


def _add_events(signal: np.ndarray, times: np.ndarray, duration: float, sigma: float, profile: BehaviorProfile, rng: np.random.Generator) -> int:
    """在一个通道上叠加主动动作，返回事件数"""
    count = rng.poisson(profile.active_event_rate * duration / 60.0)
    onsets = rng.uniform(0.0, duration, size=count)
    lengths = rng.uniform(profile.event_min_seconds, profile.event_max_seconds, size=count)
    signs = rng.choice((-1.0, 1.0), size=count)
    amplitude = profile.active_event_amplitude * sigma

    for onset, length, sign in zip(onsets, lengths, signs):
        start = int(np.searchsorted(times, onset, side="left"))
        stop = int(np.searchsorted(times, onset + length, side="left"))
        if start >= stop:
            continue
        phase = (times[start:stop] - onset) / length
        signal[start:stop] += sign * amplitude * np.sin(np.pi * phase)
    return int(count)


def _drop_gaps(data: np.ndarray, gap_rate: float, rng: np.random.Generator) -> np.ndarray:
    """按 gap_rate 丢弃整秒的上传，首秒保留以固定窗口对齐"""
    seconds = np.floor(data[:, 0] + SAMPLE_PERIOD / 2).astype(np.int64)
    n_seconds = int(seconds[-1]) + 1
    lost = rng.random(n_seconds) < gap_rate
    lost[0] = False
    return data[~lost[seconds]]


def generate_log(
    profile: BehaviorProfile,
    duration: float,
    player_id: Optional[str] = None,
    session_id: str = "default",
    gap_rate: float = 0.0,
) -> PlayerLog:
    """
    按行为参数生成一份选手日志

    Args:
        profile: 行为参数
        duration: 日志时长(秒)
        player_id: 选手 ID，默认由随机种子生成
        session_id: 会话 ID
        gap_rate: 每秒上传丢失的概率

    Returns:
        100 Hz 的选手日志，给定 rng_seed 时完全确定
    """
    profile.validate()
    if not duration > 0 or not math.isfinite(duration):
        raise InvalidProfile(f"Duration must be a positive number of seconds, got {duration}")
    if not 0 <= gap_rate < 1:
        raise InvalidProfile(f"gap_rate must be in [0, 1), got {gap_rate}")

    player_id = player_id or f"sim{profile.rng_seed}"
    rng = np.random.default_rng(profile.rng_seed)

    n = int(round(duration * SAMPLE_RATE_HZ))
    # 用整数序号除以采样率，避免累加误差
    times = np.arange(n) / SAMPLE_RATE_HZ
    lean = _lean_back_mask(times, duration, profile, rng)

    data = np.empty((n, len(FIELDS)), dtype=np.float64)
    data[:, 0] = times

    events = 0
    motion = [("a", profile.quiescent_std_accel), ("g", profile.quiescent_std_gyro)]
    for prefix, stds in motion:
        for axis, sigma in zip(_AXES, stds):
            column = FIELDS.index(prefix + axis)
            signal = rng.normal(0.0, sigma, size=n)
            if prefix == "a" and axis == "z":
                signal += np.where(lean, math.cos(math.radians(profile.lean_back_tilt)), 1.0)
            events += _add_events(signal, times, duration, sigma, profile, rng)
            data[:, column] = signal

    for axis, baseline in zip(_AXES, profile.mag_baseline):
        data[:, FIELDS.index("m" + axis)] = baseline + rng.normal(0.0, profile.mag_std, size=n)

    if gap_rate > 0 and n:
        data = _drop_gaps(data, gap_rate, rng)

    logger.debug(
        f"Generated {player_id}: {data.shape[0]} samples, {events} active events, "
        f"{lean.mean() if n else 0.0:.3f} lean-back portion"
    )
    return PlayerLog(player_id=player_id, skill=profile.skill, data=data, session_id=session_id)


def draw_profile(distribution: ProfileDistribution, skill: int, rng: np.random.Generator) -> BehaviorProfile:
    """
    从一个技能等级的参数分布中抽取一名选手的行为参数

    Args:
        distribution: 参数分布
        skill: 技能标签
        rng: 随机数生成器

    Returns:
        行为参数
    """

    def draw(bounds) -> float:
        low, high = bounds
        return float(rng.uniform(low, high))

    d = distribution
    return BehaviorProfile(
        skill=skill,
        active_event_rate=draw(d.active_event_rate),
        active_event_amplitude=draw(d.active_event_amplitude),
        quiescent_std_accel=(draw(d.accel_std_x), draw(d.accel_std_y), draw(d.accel_std_z)),
        quiescent_std_gyro=(draw(d.gyro_std_x), draw(d.gyro_std_y), draw(d.gyro_std_z)),
        lean_back_fraction=draw(d.lean_back_fraction),
        lean_back_tilt=draw(d.lean_back_tilt),
        rng_seed=int(rng.integers(2**63 - 1)),
    )


def population_profiles(spec: PopulationSpec) -> List[Tuple[str, BehaviorProfile, float]]:
    """
    为人群中的每名选手抽取 (player_id, 行为参数, 时长)

    每名选手使用主种子派生的独立随机流，新增选手不影响已有选手的数据。
    """
    spec.validate()
    tiers = (
        [(spec.high, 1)] * spec.n_high
        + [(spec.low, 0)] * spec.n_low
        + [(spec.high.midpoint(spec.low), spec.intermediate_label)] * spec.n_intermediate
    )
    children = np.random.SeedSequence(spec.master_seed).spawn(len(tiers))
    width = max(2, len(str(len(tiers))))

    players = []
    for number, ((distribution, skill), child) in enumerate(zip(tiers, children), start=1):
        rng = np.random.default_rng(child)
        profile = draw_profile(distribution, skill, rng)
        minutes = spec.session_minutes
        if spec.duration_jitter_minutes > 0:
            minutes += float(rng.uniform(-spec.duration_jitter_minutes, spec.duration_jitter_minutes))
        players.append((f"player{number:0{width}d}", profile, minutes * 60.0))
    return players


def generate_population(spec: PopulationSpec) -> List[PlayerLog]:
    """
    生成整个模拟人群的日志

    Args:
        spec: 人群规格

    Returns:
        每名选手一份日志，按选手 ID 排序
    """
    logs = [
        generate_log(profile, duration, player_id=player_id, gap_rate=spec.gap_rate)
        for player_id, profile, duration in population_profiles(spec)
    ]
    counts = spec.class_counts()
    logger.info(f"Generated {len(logs)} logs ({counts[1]} labeled 1, {counts[0]} labeled 0), master seed {spec.master_seed}")
    return logs


def write_population(logs: List[PlayerLog], directory: Union[str, Path]) -> List[Path]:
    """把日志逐个写入目录，返回 JSONL 路径"""
    return [write_log(log, directory) for log in logs]
