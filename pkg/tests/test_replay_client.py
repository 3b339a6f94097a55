import numpy as np
import pytest
import requests

from smartchair.api.replay_client import ReplayClient, iter_batches
from smartchair.core.errors import AlreadyClosed, GatewayUnreachable, StoreError
from smartchair.models.sample import PlayerLog
from tests.conftest import FlakySession


def _client(client, fail_on=(), **config):
    config.setdefault("retry_delay", 0)
    session = FlakySession(client, fail_on=fail_on)
    return ReplayClient("http://testserver", session=session, config=config), session


def test_iter_batches_groups_by_second(log_factory):
    batches = list(iter_batches(log_factory(n=300)))
    assert [slot for slot, _ in batches] == [0, 1, 2]
    assert all(rows.shape[0] == 100 for _, rows in batches)


def test_iter_batches_skips_empty_seconds(log_factory):
    log = log_factory(n=500)
    keep = np.ones(log.n_samples, dtype=bool)
    keep[200:300] = False
    gapped = PlayerLog(player_id=log.player_id, skill=log.skill, data=log.data[keep])
    assert [slot for slot, _ in iter_batches(gapped)] == [0, 1, 3, 4]


def test_replay_round_trip_is_bit_identical(client, store, log_factory):
    log = log_factory(player_id="p5", skill=0, n=300)
    replay, _ = _client(client)

    summary = replay.replay(log, session_id="s1")
    assert summary.batches_sent == 3
    assert summary.samples_sent == 300
    assert summary.retries == 0
    assert summary.closed

    stored = store.load_log("p5", "s1")
    assert stored.skill == 0
    assert stored.data.tobytes() == log.data.tobytes()


def test_replay_retries_without_duplicating(client, store, log_factory):
    log = log_factory(n=300)
    replay, session = _client(client, fail_on={1})

    summary = replay.replay(log, session_id="s1")
    assert summary.retries == 1
    assert session.calls == 5
    assert store.session_info("p1", "s1")["sample_count"] == 300
    assert store.load_log("p1", "s1").data.tobytes() == log.data.tobytes()


def test_replay_counts_gaps(client, store, log_factory):
    log = log_factory(n=400)
    keep = np.ones(log.n_samples, dtype=bool)
    keep[100:200] = False
    gapped = PlayerLog(player_id="p2", skill=1, data=log.data[keep])
    replay, _ = _client(client)

    summary = replay.replay(gapped, session_id="s1")
    assert summary.gaps == 1
    assert summary.batches_sent == 3
    # 网关按序号连续接收，没有缺口
    assert store.session_info("p2", "s1")["gaps"] == []


def test_unreachable_gateway_raises(client, log_factory):
    class DeadSession:
        def post(self, url, json=None, timeout=None):
            raise requests.ConnectionError("refused")

    replay = ReplayClient("http://testserver", session=DeadSession(), config={"retry_delay": 0, "max_retries": 3})
    with pytest.raises(GatewayUnreachable):
        replay.replay(log_factory(n=100), session_id="s1")


def test_rejected_batch_is_not_retried(client, store, log_factory):
    replay, session = _client(client)
    replay.replay(log_factory(n=100), session_id="s1")

    calls = session.calls
    with pytest.raises(StoreError) as exc:
        replay.replay(log_factory(n=100), session_id="s1")
    assert exc.value.details["error_code"] == AlreadyClosed.error_code
    assert session.calls == calls + 1
