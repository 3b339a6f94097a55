import math

import numpy as np
import pytest

from smartchair.core.errors import MalformedRecord, NegativeTimestamp, NonFiniteChannel, UnsortedLog
from smartchair.models.sample import FIELDS, ImuSample, PlayerLog
from smartchair.services.telemetry import segment_windows, validate_sample


def _raw(**overrides):
    raw = {name: 0.0 for name in FIELDS}
    raw.update(az=1.0, t=1.5)
    raw.update(overrides)
    return raw


def test_validate_sample_accepts_finite_record():
    sample = validate_sample(_raw(gx=-3.25))
    assert isinstance(sample, ImuSample)
    assert sample.t == 1.5
    assert sample.gx == -3.25


@pytest.mark.parametrize("value", [math.nan, math.inf, -math.inf])
def test_validate_sample_rejects_non_finite_channel(value):
    with pytest.raises(NonFiniteChannel) as exc:
        validate_sample(_raw(gy=value), index=4)
    assert exc.value.details["field"] == "gy"
    assert exc.value.details["index"] == 4


def test_validate_sample_rejects_negative_timestamp():
    with pytest.raises(NegativeTimestamp):
        validate_sample(_raw(t=-0.01))


def test_validate_sample_rejects_missing_and_non_numeric_fields():
    raw = _raw()
    del raw["mz"]
    with pytest.raises(MalformedRecord) as exc:
        validate_sample(raw)
    assert exc.value.details["field"] == "mz"

    with pytest.raises(MalformedRecord):
        validate_sample(_raw(ax=True))
    with pytest.raises(MalformedRecord):
        validate_sample(_raw(ax=[1.0]))
    with pytest.raises(MalformedRecord):
        validate_sample([0.0] * len(FIELDS))


def test_segment_windows_counts_complete_windows(log_factory):
    # 35 分钟 → 11 个完整窗口，最后 2 分钟不足 80% 被丢弃
    log = log_factory(n=35 * 60 * 100)
    windows = segment_windows(log)
    assert len(windows) == 11
    assert all(w.n_samples == 18000 for w in windows)
    assert [w.window_index for w in windows] == list(range(11))
    assert windows[1].start_time == pytest.approx(180.0)


def test_segment_windows_keeps_window_at_completeness_boundary(log_factory):
    log = log_factory(n=18000 + 14400)
    assert len(segment_windows(log, completeness_fraction=0.8)) == 2
    log = log_factory(n=18000 + 14399)
    assert len(segment_windows(log, completeness_fraction=0.8)) == 1


def test_segment_windows_keeps_slot_index_across_gaps(log_factory):
    log = log_factory(n=3 * 18000)
    keep = np.ones(log.n_samples, dtype=bool)
    keep[18000:18000 + 9000] = False
    gapped = PlayerLog(player_id=log.player_id, skill=log.skill, data=log.data[keep])

    windows = segment_windows(gapped)
    assert [w.window_index for w in windows] == [0, 2]


def test_segment_windows_handles_empty_and_unsorted_logs(log_factory):
    empty = PlayerLog(player_id="p0", skill=0, data=np.empty((0, len(FIELDS))))
    assert segment_windows(empty) == []

    log = log_factory(n=10)
    data = log.data.copy()
    data[[3, 4]] = data[[4, 3]]
    with pytest.raises(UnsortedLog) as exc:
        segment_windows(PlayerLog(player_id="p9", skill=0, data=data))
    assert exc.value.details["player_id"] == "p9"


def test_windows_share_player_label(log_factory):
    log = log_factory(player_id="alice", skill=0, n=2 * 18000)
    for window in segment_windows(log):
        assert window.player_id == "alice"
        assert window.skill == 0


@pytest.mark.parametrize("value", ["1.5", "abc", "", None, 10 ** 400])
def test_validate_sample_rejects_strings_and_non_floats(value):
    with pytest.raises(MalformedRecord) as exc:
        validate_sample(_raw(t=value), index=2)
    assert exc.value.details["field"] == "t"
    assert exc.value.details["index"] == 2
