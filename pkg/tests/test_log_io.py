import json

import pytest

from smartchair.core.errors import CorruptLog, MalformedRecord, NonFiniteChannel
from smartchair.services.log_io import load_log_directory, read_log, write_log


def test_write_then_read_is_bit_identical(tmp_path, log_factory):
    log = log_factory(player_id="p07", skill=0, n=500, seed=11)
    path = write_log(log, tmp_path)

    loaded = read_log(path)
    assert loaded.equals(log)
    assert json.loads((tmp_path / "p07.meta.json").read_text()) == {"player_id": "p07", "skill": 0}


def test_missing_sidecar_names_the_player(tmp_path, log_factory):
    path = write_log(log_factory(player_id="bob"), tmp_path)
    (tmp_path / "bob.meta.json").unlink()
    with pytest.raises(MalformedRecord, match="bob"):
        read_log(path)


def test_missing_skill_names_the_player(tmp_path, log_factory):
    path = write_log(log_factory(player_id="carol"), tmp_path)
    (tmp_path / "carol.meta.json").write_text(json.dumps({"player_id": "carol"}))
    with pytest.raises(MalformedRecord) as exc:
        read_log(path)
    assert exc.value.details["player_id"] == "carol"


def test_unparsable_line_reports_line_number(tmp_path, log_factory):
    path = write_log(log_factory(n=5), tmp_path)
    lines = path.read_text().splitlines()
    lines[2] = lines[2][:-7]
    path.write_text("\n".join(lines) + "\n")

    with pytest.raises(CorruptLog) as exc:
        read_log(path)
    assert exc.value.line == 3


def test_missing_key_is_malformed(tmp_path, log_factory):
    path = write_log(log_factory(n=3), tmp_path)
    lines = path.read_text().splitlines()
    record = json.loads(lines[1])
    del record["gz"]
    lines[1] = json.dumps(record)
    path.write_text("\n".join(lines) + "\n")

    with pytest.raises(MalformedRecord) as exc:
        read_log(path)
    assert exc.value.details["field"] == "gz"


def test_non_finite_value_in_file_is_rejected(tmp_path, log_factory):
    path = write_log(log_factory(n=3), tmp_path)
    lines = path.read_text().splitlines()
    record = json.loads(lines[0])
    record["ax"] = float("nan")
    lines[0] = json.dumps(record)
    path.write_text("\n".join(lines) + "\n")

    with pytest.raises(NonFiniteChannel):
        read_log(path)


def test_load_log_directory_sorts_by_player(tmp_path, log_factory):
    for player_id in ("p3", "p1", "p2"):
        write_log(log_factory(player_id=player_id, n=10), tmp_path)
    logs = load_log_directory(tmp_path)
    assert [log.player_id for log in logs] == ["p1", "p2", "p3"]
