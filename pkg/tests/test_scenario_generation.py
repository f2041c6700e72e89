import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from builders import BALL, HOME_KEEPER, PASS_SPEC, build_trace, control_trace, home
from soccerevents.components.atomic_detector import detect_atomic
from soccerevents.components.feature_extraction import nearest_to_ball
from soccerevents.components.scenario_generation import (INTENT, add_noise, control_labels, generate_match,
                                                         generate_scenario, kickoff_formation, rolling_distances,
                                                         scenario_roster, scenario_suite)
from soccerevents.constant import detection_pipeline
from soccerevents.entity.config_entity import NoiseSpec, RuleParameterSet, ScenarioSpec
from soccerevents.entity.trace_entity import Team
from soccerevents.exception.exception import DataError, InfeasibleScript, OverlappingScenarios


def test_roster():
    roster = scenario_roster()
    assert [obj.id for obj in roster] == list(range(23))
    assert roster[0].is_ball
    keepers = [obj for obj in roster if obj.is_goalkeeper]
    assert [(k.id, k.team) for k in keepers] == [(1, Team.HOME), (12, Team.AWAY)]
    assert sum(obj.team is Team.AWAY for obj in roster) == 11


def test_kickoff_formation():
    trace = kickoff_formation()
    assert len(trace) == 1 and len(trace.roster) == 23
    player, gap = nearest_to_ball(trace, 0)
    assert player.id == 10
    assert gap == pytest.approx(math.sqrt(2.0))
    home_x = [trace.position(p, 0)[0] for p in trace.players if p.team is Team.HOME]
    away = [trace.position(p, 0) for p in trace.players if p.team is Team.AWAY]
    assert max(home_x) < 52.5
    assert min(np.linalg.norm(np.array(away) - [52.5, 34.0], axis=1)) > 9.15


def test_pass_scenario(pass_scenario):
    trace, truth = pass_scenario
    assert len(trace) == 166
    assert [(e.t, e.roles["KickingPlayer"]) for e in truth.atomic_of("KickingTheBall")] == [(20, 2)]
    passes = truth.complex_of("Pass")
    assert [(p.start, p.end, p.roles) for p in passes] == [(20, 65, {"KickingPlayer": 2, "ReceivingPlayer": 3})]

    possessions = truth.atomic_of("BallPossession")
    kicker = [e.t for e in possessions if e.roles["PossessingPlayer"] == 2]
    receiver = [e.t for e in possessions if e.roles["PossessingPlayer"] == 3]
    assert kicker == list(range(0, 16))
    assert receiver[0] == 65
    assert [e.id for e in truth.atomic] == [f"a{i}" for i in range(len(truth.atomic))]


def test_the_ball_rolls_from_kicker_to_receiver(pass_scenario):
    trace, _ = pass_scenario
    ball = trace.track(0)
    assert ball[20] == pytest.approx([30.3, 20.0])
    assert np.all(np.diff(ball[20:66, 0]) > 0)
    assert np.allclose(ball[:, 1], 20.0)
    assert np.linalg.norm(ball[65] - trace.track(3)[65]) == pytest.approx(0.3)


def test_generation_is_seeded():
    first, second = generate_scenario(PASS_SPEC), generate_scenario(PASS_SPEC)
    assert np.array_equal(first[0].positions, second[0].positions)
    assert first[1] == second[1]


@pytest.mark.parametrize("outcome", ["Won", "Lost"])
def test_tackle_with_default_placements(outcome):
    trace, truth = generate_scenario(ScenarioSpec("Tackle", outcome=outcome))
    assert {e.event_type for e in truth.complex} == INTENT[f"Tackle:{outcome}"]
    assert truth.atomic_of("Tackle")


def test_ball_that_cannot_reach_the_receiver():
    spec = ScenarioSpec("Pass", placements={"kicker": (10.0, 20.0), "receiver": (90.0, 20.0)}, v0=8.0)
    with pytest.raises(InfeasibleScript):
        generate_scenario(spec)


def test_every_scenario_meets_its_intent(suite_scenarios):
    for spec, trace, truth in suite_scenarios:
        key = f"{spec.kind}:{spec.outcome}" if spec.outcome else spec.kind
        assert {e.event_type for e in truth.complex} == INTENT[key]
        assert len(trace) > 0


def test_scenario_settings_are_checked():
    with pytest.raises(DataError):
        ScenarioSpec("Header")
    with pytest.raises(DataError):
        ScenarioSpec("Tackle", outcome="Goal")
    with pytest.raises(DataError):
        ScenarioSpec("Pass", v0=40.0)
    with pytest.raises(DataError):
        ScenarioSpec("Pass", placements={"kicker": (120.0, 10.0)})
    with pytest.raises(DataError):
        ScenarioSpec.from_dict({"kind": "Pass", "speed": 10})
    assert ScenarioSpec("Shot").outcome == "Goal"
    assert ScenarioSpec.from_dict({"kind": "Pass", "placements": {"kicker": [1, 2]}}).placements == {
        "kicker": (1.0, 2.0)}


def test_overlapping_scenarios_are_rejected():
    with pytest.raises(OverlappingScenarios):
        generate_match([PASS_SPEC, replace(PASS_SPEC, offset=50)])


def test_match_timeline():
    trace, truth = generate_match([PASS_SPEC, replace(PASS_SPEC, offset=300)])
    assert len(trace) == 466
    assert [p.start for p in truth.complex_of("Pass")] == [20, 320]
    assert [e.id for e in truth.complex] == [f"c{i}" for i in range(len(truth.complex))]


def test_empty_match():
    trace, truth = generate_match([])
    assert len(trace) == 0
    assert len(truth) == 0


def still_trace(frames=5000):
    return build_trace({BALL: (50.0, 34.0), HOME_KEEPER: (5.0, 34.0), home(2): (30.0, 20.0)}, frames)


def test_gaussian_noise():
    clean = still_trace()
    noisy = add_noise(clean, NoiseSpec(sigma=0.1), np.random.default_rng(0))
    error = noisy.positions - clean.positions
    assert np.std(error) == pytest.approx(0.1, rel=0.05)
    assert abs(np.mean(error)) < 0.01
    again = add_noise(clean, NoiseSpec(sigma=0.1), np.random.default_rng(0))
    assert np.array_equal(noisy.positions, again.positions)


def test_dropout_is_interpolated():
    clean = still_trace(1000)
    noisy = add_noise(clean, NoiseSpec(dropout=0.05), np.random.default_rng(2))
    assert not np.isnan(noisy.positions).any()
    assert np.allclose(noisy.positions, clean.positions)


def test_no_noise_is_identity():
    clean = still_trace(10)
    assert add_noise(clean, NoiseSpec()) is clean
    with pytest.raises(DataError):
        NoiseSpec(dropout=0.2)


def test_suite_draws():
    specs = scenario_suite(24, seed=5)
    assert len(specs) == 24
    assert {f"{s.kind}:{s.outcome}" if s.outcome else s.kind for s in specs} == set(INTENT)
    assert all(14.0 <= s.v0 <= 17.0 and 2.0 <= s.mu <= 3.0 for s in specs)
    assert scenario_suite(24, seed=5) == specs


@given(v0=st.floats(6.0, 30.0), mu=st.floats(1.0, 6.0))
def test_rolling_ball_decelerates_to_rest(v0, mu):
    covered = rolling_distances(v0, mu, 30.0)
    assert np.all(np.diff(covered) >= 0)
    assert covered[-1] <= v0 * v0 / (2 * mu) + 1e-9
    assert covered[-1] == pytest.approx(v0 * v0 / (2 * mu))


def control_signatures(events):
    return sorted((e.t, e.event_type, tuple(sorted(e.roles.items())))
                  for e in events if e.event_type in ("BallPossession", "Tackle"))


def test_control_labels_follow_the_spells():
    trace = control_trace()
    labels = control_labels(trace.positions, trace.roster, [[2, 0, None]])
    assert [(t, event_type) for t, event_type, _ in labels] == [(t, "Tackle") for t in range(15)]
    assert labels[0][2] == {"PossessingPlayer": 2, "TacklingPlayer": 12, "PossessedObject": 0}

    free = control_trace(opponent=(60.0, 34.0))
    assert [t for t, _, _ in control_labels(free.positions, free.roster, [[2, 0, 9]])] == [0, 1, 2, 3, 4]
    assert control_labels(free.positions, free.roster, [[2, 5, 8]]) == []


@pytest.mark.parametrize("outcome", ["Won", "Lost"])
def test_control_ground_truth_comes_from_the_script(outcome):
    trace, truth = generate_scenario(ScenarioSpec("Tackle", outcome=outcome))
    tackles = truth.atomic_of("Tackle")
    assert {(e.roles["PossessingPlayer"], e.roles["TacklingPlayer"]) for e in tackles} == {(2, 13)}
    holders = {e.roles["PossessingPlayer"] for e in truth.atomic_of("BallPossession") if e.t > tackles[-1].t}
    assert holders == ({13} if outcome == "Won" else {2})
    assert control_signatures(truth.atomic) == control_signatures(detect_atomic(trace, RuleParameterSet.reference()))


def test_receiver_walking_to_shoot_is_not_in_possession():
    trace, truth = generate_scenario(ScenarioSpec("PassThenGoal"))
    kick = truth.atomic_of("KickingTheBall")[0].t
    ball = trace.track(0)
    arrival = kick + int(np.flatnonzero(np.all(np.diff(ball[kick:], axis=0) == 0, axis=1))[0])
    receiver = truth.complex_of("Pass")[0].roles["ReceivingPlayer"]
    frames = [e.t for e in truth.atomic_of("BallPossession") if e.roles["PossessingPlayer"] == receiver]
    assert frames[0] == arrival + detection_pipeline.SCENARIO_STEP_FRAMES
    assert truth.complex_of("Pass")[0].end == frames[0]
    assert control_signatures(truth.atomic) == control_signatures(detect_atomic(trace, RuleParameterSet.reference()))
