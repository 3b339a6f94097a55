import pytest

from smartchair.core.errors import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_INTERNAL,
    ConfigError,
    EmptySeries,
    InfeasibleSplit,
    InvalidSpec,
    KTooLarge,
    NonFiniteChannel,
    UnsortedLog,
    exit_code_for,
)


def test_error_dict_carries_code_message_and_details():
    error = NonFiniteChannel("gy", float("inf"), index=12)
    doc = error.to_dict()
    assert doc["error_code"] == "non_finite_channel"
    assert "gy" in doc["error_message"]
    assert doc["field"] == "gy"
    assert doc["index"] == 12


def test_unsorted_log_names_the_player():
    assert UnsortedLog("player03", 7).to_dict()["player_id"] == "player03"


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("bad"), EXIT_CONFIG),
        (UnsortedLog("p", 1), EXIT_DATA),
        (EmptySeries("empty"), EXIT_DATA),
        (InvalidSpec("bad spec"), EXIT_DATA),
        (KTooLarge("k"), EXIT_DATA),
        (InfeasibleSplit("holdout"), EXIT_DATA),
        (RuntimeError("boom"), EXIT_INTERNAL),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == code
