"""
遥测数据校验与窗口切分
"""

import logging
import math
from numbers import Real
from typing import Any, List, Mapping, Union

import numpy as np

from smartchair.core.errors import MalformedRecord, NegativeTimestamp, NonFiniteChannel, UnsortedLog
from smartchair.models.sample import FIELDS, SAMPLE_PERIOD, ImuSample, PlayerLog, SessionWindow

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_SECONDS = 180.0
DEFAULT_COMPLETENESS = 0.8


def _as_number(raw: Mapping[str, Any], name: str, index: Union[int, None]) -> float:
    if name not in raw:
        raise MalformedRecord(f"Missing field {name}", field=name, index=index)
    value = raw[name]
    # bool 是 int 的子类，需要单独排除
    if isinstance(value, bool) or not isinstance(value, Real):
        raise MalformedRecord(f"Field {name} should be a number, got {type(value).__name__}", field=name, index=index)
    try:
        return float(value)
    except OverflowError:
        raise MalformedRecord(f"Field {name} does not fit a float: {value!r}", field=name, index=index)


def validate_sample(raw: Union[Mapping[str, Any], ImuSample], index: Union[int, None] = None) -> ImuSample:
    """
    校验一条候选样本

    Args:
        raw: 含 t 与九个通道的字典，或已构造的样本
        index: 样本在批次中的序号，用于错误定位

    Returns:
        通道值全部有限的样本
    """
    if isinstance(raw, ImuSample):
        raw = raw.to_dict()
    if not isinstance(raw, Mapping):
        raise MalformedRecord(f"Sample should be an object, got {type(raw).__name__}", index=index)

    values = {name: _as_number(raw, name, index) for name in FIELDS}
    for name in FIELDS:
        if not math.isfinite(values[name]):
            raise NonFiniteChannel(name, values[name], index=index)
    if values["t"] < 0:
        raise NegativeTimestamp(values["t"], index=index)

    return ImuSample(**values)


def check_sorted(log: PlayerLog) -> None:
    """时间戳必须严格递增"""
    if log.n_samples < 2:
        return
    bad = np.flatnonzero(np.diff(log.times) <= 0)
    if bad.size:
        raise UnsortedLog(log.player_id, int(bad[0]) + 1)


def check_finite(data: np.ndarray) -> None:
    """检查列式数组中的非有限值，定位到第一个出错的样本和字段"""
    finite = np.isfinite(data)
    if finite.all():
        return
    row, col = np.argwhere(~finite)[0]
    raise NonFiniteChannel(FIELDS[col], data[row, col], index=int(row))


def segment_windows(
    log: PlayerLog,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    completeness_fraction: float = DEFAULT_COMPLETENESS,
) -> List[SessionWindow]:
    """
    将选手日志切分为不重叠的固定时长窗口

    窗口对齐到日志首个时间戳；样本数不足 completeness_fraction × 标称样本数的窗口被丢弃。
    边界判断留有半个采样周期的容差，吸收时间戳的浮点误差。

    Args:
        log: 选手日志
        window_seconds: 窗口时长(秒)
        completeness_fraction: 最低完整度

    Returns:
        按时间顺序排列的窗口列表
    """
    if window_seconds <= 0:
        raise ValueError("window_seconds must be > 0")
    if not 0 < completeness_fraction <= 1:
        raise ValueError("completeness_fraction must be in (0, 1]")

    check_sorted(log)
    if log.n_samples == 0:
        return []

    times = log.times
    slots = np.floor((times - times[0] + SAMPLE_PERIOD / 2) / window_seconds).astype(np.int64)
    nominal = round(window_seconds / SAMPLE_PERIOD)
    min_samples = completeness_fraction * nominal - 1e-9

    slot_ids, starts, counts = np.unique(slots, return_index=True, return_counts=True)
    windows = []
    for slot, start, count in zip(slot_ids.tolist(), starts.tolist(), counts.tolist()):
        if count < min_samples:
            logger.debug(f"Dropping window {slot} of {log.player_id}: {count} of {nominal} samples")
            continue
        windows.append(
            SessionWindow(
                player_id=log.player_id,
                skill=log.skill,
                window_index=slot,
                data=log.data[start:start + count],
                start_time=float(times[0] + slot * window_seconds),
            )
        )

    logger.debug(f"Log {log.player_id}: {len(windows)} windows from {log.n_samples} samples")
    return windows


