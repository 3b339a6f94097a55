import math

import numpy as np
import pytest

from smartchair.core.errors import InvalidProfile, InvalidSpec
from smartchair.models.profile import BehaviorProfile, PopulationSpec
from smartchair.models.sample import MOTION_CHANNELS
from smartchair.services.feature_service import active_portion, build_dataset, extract_features, quiescent_dispersion
from smartchair.services.log_io import read_log
from smartchair.services.simulator import generate_log, generate_population, population_profiles, write_population
from smartchair.services.telemetry import segment_windows


def test_same_seed_gives_identical_stream(profile_factory):
    profile = profile_factory(lean_back_fraction=0.3, rng_seed=42)
    first = generate_log(profile, 60.0, player_id="p")
    second = generate_log(profile, 60.0, player_id="p")
    assert first.data.tobytes() == second.data.tobytes()

    other = generate_log(profile_factory(lean_back_fraction=0.3, rng_seed=43), 60.0, player_id="p")
    assert other.data.tobytes() != first.data.tobytes()


def test_log_is_100hz_with_exact_timestamps(profile_factory):
    log = generate_log(profile_factory(), 30.0)
    assert log.n_samples == 3000
    assert log.times[0] == 0.0
    assert log.times[1234] == 1234 / 100
    assert np.all(np.diff(log.times) > 0)
    assert np.all(np.isfinite(log.data))


def test_pure_quiescence_gives_near_zero_active_features(profile_factory):
    profile = profile_factory(active_event_rate=0.0, lean_back_fraction=0.0)
    window = segment_windows(generate_log(profile, 180.0))[0]
    features = extract_features(window)

    for name in MOTION_CHANNELS:
        assert getattr(features, f"{name}n") < 0.006
    # az 噪声偶尔越过 0.98 g
    assert features.lb < 0.002
    assert features.axo == pytest.approx(0.01 ** 2, rel=0.1)
    assert features.gyo == pytest.approx(1.0, rel=0.1)


def test_full_lean_back_lowers_az_below_threshold(profile_factory):
    profile = profile_factory(active_event_rate=0.0, lean_back_fraction=1.0, lean_back_tilt=20.0)
    log = generate_log(profile, 180.0)
    assert log.channel("az").mean() == pytest.approx(math.cos(math.radians(20.0)), abs=1e-3)

    features = extract_features(segment_windows(log)[0])
    assert features.lb == 1.0


def test_lean_back_fraction_is_respected(profile_factory):
    profile = profile_factory(active_event_rate=0.0, lean_back_fraction=0.4, lean_back_tilt=20.0)
    log = generate_log(profile, 1800.0)
    assert np.mean(log.channel("az") < 0.98) == pytest.approx(0.4, abs=0.01)


def test_statistical_targeting(profile_factory):
    rate, amplitude, duration = 0.5, 50.0, 1200.0
    expected = rate / 60.0 * 0.6
    portions, ratios = [], []
    for seed in range(10):
        profile = profile_factory(
            active_event_rate=rate, active_event_amplitude=amplitude, lean_back_fraction=0.0, rng_seed=seed
        )
        log = generate_log(profile, duration)
        stds = profile.quiescent_std_accel + profile.quiescent_std_gyro
        for name, sigma in zip(MOTION_CHANNELS, stds):
            series = log.channel(name)
            portions.append(active_portion(series))
            ratios.append(math.sqrt(quiescent_dispersion(series)) / sigma)

    assert np.mean(portions) == pytest.approx(expected, rel=0.25)
    assert max(abs(r - 1.0) for r in ratios) < 0.1


def test_gap_rate_drops_whole_seconds(profile_factory):
    log = generate_log(profile_factory(), 120.0, gap_rate=0.3)
    seconds = np.floor(log.times + 0.005).astype(int)
    kept, counts = np.unique(seconds, return_counts=True)
    assert kept[0] == 0
    assert np.all(counts == 100)
    assert 40 < len(kept) < 120


@pytest.mark.parametrize(
    "overrides",
    [
        {"active_event_amplitude": 3.0},
        {"quiescent_std_accel": (0.01, 0.0, 0.01)},
        {"lean_back_fraction": 1.5},
        {"skill": 2},
    ],
)
def test_invalid_profile_is_rejected(profile_factory, overrides):
    with pytest.raises(InvalidProfile):
        generate_log(profile_factory(**overrides), 10.0)


def test_invalid_duration_is_rejected(profile_factory):
    with pytest.raises(InvalidProfile):
        generate_log(profile_factory(), 0.0)
    with pytest.raises(InvalidProfile):
        generate_log(profile_factory(), 10.0, gap_rate=1.0)


def test_default_population_has_nine_high_and_ten_low():
    players = population_profiles(PopulationSpec())
    assert len(players) == 19
    labels = [profile.skill for _, profile, _ in players]
    assert labels.count(1) == 9
    assert labels.count(0) == 10
    assert players[0][0] == "player01"
    assert all(duration == 35 * 60 for _, _, duration in players)


def test_small_population_and_seed_independence():
    spec = PopulationSpec(n_high=1, n_low=1, session_minutes=0.5, master_seed=1)
    logs = generate_population(spec)
    assert [log.skill for log in logs] == [1, 0]

    other = generate_population(PopulationSpec(n_high=1, n_low=1, session_minutes=0.5, master_seed=2))
    assert [log.skill for log in other] == [1, 0]
    assert logs[0].data.tobytes() != other[0].data.tobytes()


def test_adding_players_keeps_existing_streams():
    base = population_profiles(PopulationSpec(n_high=2, n_low=2, master_seed=5))
    grown = population_profiles(PopulationSpec(n_high=2, n_low=3, master_seed=5))
    assert grown[:4] == base


def test_intermediate_tier_uses_configured_label():
    spec = PopulationSpec(n_high=1, n_low=1, n_intermediate=2, intermediate_label=1)
    players = population_profiles(spec)
    assert [profile.skill for _, profile, _ in players] == [1, 0, 1, 1]
    assert spec.class_counts() == {0: 1, 1: 3}


def test_invalid_population_spec():
    with pytest.raises(InvalidSpec):
        population_profiles(PopulationSpec(n_high=0, n_low=0))
    with pytest.raises(InvalidSpec):
        PopulationSpec.from_dict({"n_high": 2, "unknown": 1})
    with pytest.raises(InvalidSpec):
        population_profiles(PopulationSpec.from_dict({"high": {"active_event_rate": [3.0, 1.0]}}))


def test_population_spec_round_trip(tmp_path):
    spec = PopulationSpec(n_high=3, n_low=4, gap_rate=0.01, master_seed=9)
    path = tmp_path / "population.json"
    path.write_text(spec.to_json())
    assert PopulationSpec.from_file(str(path)) == spec


def test_write_population_round_trips(tmp_path):
    logs = generate_population(PopulationSpec(n_high=1, n_low=1, session_minutes=0.2, master_seed=4))
    paths = write_population(logs, tmp_path)
    for log, path in zip(logs, paths):
        assert read_log(path).equals(log)


def test_default_profiles_reproduce_class_contrast(small_spec):
    dataset = build_dataset(generate_population(small_spec))
    frame = dataset.to_frame()
    means = frame.groupby("skill").mean(numeric_only=True)

    for name in MOTION_CHANNELS:
        assert means.loc[1, f"{name}n"] < means.loc[0, f"{name}n"]
    assert means.loc[1, "gyo"] > means.loc[0, "gyo"]
    assert means.loc[1, "axo"] > means.loc[0, "axo"]
    assert means.loc[1, "lb"] < means.loc[0, "lb"]
