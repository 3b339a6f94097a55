import pytest

from smartchair.core.errors import (
    AlreadyClosed,
    CorruptLog,
    DuplicateSeq,
    SchemaError,
    SeqRegression,
    SessionNotSealed,
    StorageError,
    UnknownSession,
)
from smartchair.models.sample import FIELDS
from smartchair.services.session_store import BATCHES_FILE, SAMPLES_FILE, SessionStore


def _batch(log, seq, size=100):
    rows = log.data[seq * size:(seq + 1) * size]
    return [dict(zip(FIELDS, row)) for row in rows.tolist()]


def test_batches_round_trip_bit_identical(store, log_factory):
    log = log_factory(player_id="p1", n=300)
    for seq in range(3):
        ack = store.post_batch("p1", "s1", seq, _batch(log, seq))
        assert ack.accepted_count == 100
        assert ack.next_expected_seq == seq + 1

    sealed = store.close_session("p1", "s1", skill=1)
    assert sealed.n_samples == 300
    assert sealed.data.tobytes() == log.data.tobytes()
    assert store.session_info("p1", "s1")["status"] == "sealed"


def test_duplicate_batch_is_acknowledged_without_new_rows(store, log_factory):
    log = log_factory(n=200)
    store.post_batch("p1", "s1", 0, _batch(log, 0))
    store.post_batch("p1", "s1", 1, _batch(log, 1))

    with pytest.raises(DuplicateSeq) as exc:
        store.post_batch("p1", "s1", 1, _batch(log, 1))
    assert exc.value.accepted_count == 100
    assert exc.value.next_expected_seq == 2
    assert store.close_session("p1", "s1", 0).n_samples == 200


def test_skipped_seq_records_gap_and_late_batch_is_rejected(store, log_factory):
    log = log_factory(n=500)
    store.post_batch("p1", "s1", 0, _batch(log, 0))
    ack = store.post_batch("p1", "s1", 3, _batch(log, 3))
    assert ack.gap == (1, 2)
    assert store.session_info("p1", "s1")["gaps"] == [[1, 2]]

    with pytest.raises(SeqRegression):
        store.post_batch("p1", "s1", 1, _batch(log, 1))


def test_invalid_batch_is_rejected_whole(store, log_factory):
    log = log_factory(n=100)
    samples = _batch(log, 0)
    samples[37]["gy"] = float("nan")
    with pytest.raises(SchemaError) as exc:
        store.post_batch("p1", "s1", 0, samples)
    assert exc.value.details["index"] == 37
    assert exc.value.details["field"] == "gy"

    store.post_batch("p1", "s1", 0, _batch(log, 0))
    assert store.session_info("p1", "s1")["sample_count"] == 100


def test_timestamp_regression_across_batches(store, log_factory):
    log = log_factory(n=200)
    store.post_batch("p1", "s1", 0, _batch(log, 1))
    with pytest.raises(SchemaError) as exc:
        store.post_batch("p1", "s1", 1, _batch(log, 0))
    assert exc.value.details["field"] == "t"


def test_oversized_batch_is_rejected(tmp_path, log_factory):
    store = SessionStore(tmp_path, max_batch_size=50, durable=False)
    with pytest.raises(SchemaError):
        store.post_batch("p1", "s1", 0, _batch(log_factory(n=100), 0))


def test_session_lifecycle_errors(store, log_factory):
    log = log_factory(n=100)
    with pytest.raises(UnknownSession):
        store.close_session("ghost", "s1", 1)

    store.post_batch("p1", "s1", 0, _batch(log, 0))
    with pytest.raises(SessionNotSealed):
        store.load_log("p1", "s1")

    store.close_session("p1", "s1", 1)
    with pytest.raises(AlreadyClosed):
        store.close_session("p1", "s1", 1)
    with pytest.raises(AlreadyClosed):
        store.post_batch("p1", "s1", 1, _batch(log, 0))


def test_restart_truncates_torn_tail(tmp_path, log_factory):
    root = tmp_path / "sessions"
    log = log_factory(n=300)
    store = SessionStore(root, durable=False)
    store.post_batch("p1", "s1", 0, _batch(log, 0))
    store.post_batch("p1", "s1", 1, _batch(log, 1))

    # 模拟写到一半被杀：样本写了一部分，提交记录只写了半行
    session_dir = root / "p1" / "s1"
    with open(session_dir / SAMPLES_FILE, "ab") as fh:
        fh.write(b'{"t": 2.0, "ax": 0.1')
    with open(session_dir / BATCHES_FILE, "ab") as fh:
        fh.write(b'{"count": 100, "length"')

    restarted = SessionStore(root, durable=False)
    info = restarted.session_info("p1", "s1")
    assert info["sample_count"] == 200
    assert info["next_expected_seq"] == 2

    restarted.post_batch("p1", "s1", 2, _batch(log, 2))
    assert restarted.close_session("p1", "s1", 1).data.tobytes() == log.data.tobytes()


def test_checksum_mismatch_is_reported_with_line(tmp_path, log_factory):
    root = tmp_path / "sessions"
    log = log_factory(n=200)
    store = SessionStore(root, durable=False)
    store.post_batch("p1", "s1", 0, _batch(log, 0))
    store.post_batch("p1", "s1", 1, _batch(log, 1))
    store.close_session("p1", "s1", 0)

    path = root / "p1" / "s1" / SAMPLES_FILE
    lines = path.read_bytes().splitlines(keepends=True)
    # 改动第 151 行最后一位数字，行仍可解析但批次校验和不再匹配
    line = bytearray(lines[150])
    pos = line.rindex(b"}") - 1
    line[pos] = ord("1") if line[pos] != ord("1") else ord("2")
    lines[150] = bytes(line)
    path.write_bytes(b"".join(lines))

    with pytest.raises(CorruptLog) as exc:
        SessionStore(root, durable=False).load_log("p1", "s1")
    assert exc.value.line == 101


def test_list_sessions_filters_by_status(store, log_factory):
    log = log_factory(n=100)
    store.post_batch("a", "s1", 0, _batch(log, 0))
    store.post_batch("b", "s1", 0, _batch(log, 0))
    store.close_session("b", "s1", 1)

    assert [s["player_id"] for s in store.list_sessions()] == ["a", "b"]
    assert [s["player_id"] for s in store.list_sessions("sealed")] == ["b"]
    assert [log.player_id for log in store.load_sealed_logs()] == ["b"]


def test_invalid_session_path_is_rejected(store, log_factory):
    with pytest.raises(SchemaError):
        store.post_batch("../etc", "s1", 0, _batch(log_factory(n=100), 0))


def _fail_once(store, monkeypatch, fail_path_name):
    """下一次写 fail_path_name 时只写入一半字节并抛出 OSError"""
    real_append = store._append
    state = {"failed": False}

    def flaky_append(path, offset, payload):
        if not state["failed"] and path.name == fail_path_name:
            state["failed"] = True
            with open(path, "ab") as fh:
                fh.write(payload[: len(payload) // 2])
            raise OSError("disk full")
        real_append(path, offset, payload)

    monkeypatch.setattr(store, "_append", flaky_append)


@pytest.mark.parametrize("fail_path_name", [SAMPLES_FILE, BATCHES_FILE])
def test_failed_write_leaves_no_residue_for_retry(store, log_factory, monkeypatch, fail_path_name):
    log = log_factory(n=300)
    store.post_batch("p1", "s1", 0, _batch(log, 0))

    _fail_once(store, monkeypatch, fail_path_name)
    with pytest.raises(StorageError):
        store.post_batch("p1", "s1", 1, _batch(log, 1))
    assert store.session_info("p1", "s1")["next_expected_seq"] == 1

    ack = store.post_batch("p1", "s1", 1, _batch(log, 1))
    assert ack.next_expected_seq == 2
    store.post_batch("p1", "s1", 2, _batch(log, 2))
    assert store.close_session("p1", "s1", 1).data.tobytes() == log.data.tobytes()


def test_failed_gap_write_records_gap_once(store, log_factory, monkeypatch):
    log = log_factory(n=400)
    store.post_batch("p1", "s1", 0, _batch(log, 0))

    _fail_once(store, monkeypatch, SAMPLES_FILE)
    with pytest.raises(StorageError):
        store.post_batch("p1", "s1", 3, _batch(log, 3))
    assert store.session_info("p1", "s1")["gaps"] == []

    store.post_batch("p1", "s1", 3, _batch(log, 3))
    assert store.session_info("p1", "s1")["gaps"] == [[1, 2]]
