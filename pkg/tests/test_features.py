import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from builders import BALL, build_trace, away, deflection_trace, home, kick_trace
from soccerevents.components.feature_extraction import (TraceFeatures, angle_between, change_of_direction, distance,
                                                        expected_cross_y, forward_velocity, kinematics, moving,
                                                        nearest_to_ball, smooth_trace, target_line_features)
from soccerevents.entity.trace_entity import Team
from soccerevents.exception.exception import WindowOutOfRange


def test_forward_velocity_repeats_last_frame():
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert np.allclose(forward_velocity(positions, 1.0), [[1, 0], [2, 0], [2, 0]])
    assert np.allclose(forward_velocity(positions[:1], 30.0), [[0, 0]])


def test_ball_kinematics_of_a_kick():
    series = kinematics(kick_trace(), 0)
    assert np.allclose(series.speed[:10], 0.0)
    assert np.allclose(series.speed[10:], 12.0)
    assert series.acceleration[9] == pytest.approx(360.0)
    assert math.isnan(series.direction[0])
    assert series.direction[20] == pytest.approx(0.0)


def test_distance_and_target_line():
    trace = kick_trace()
    assert distance(trace, 0, 2, 0) == pytest.approx(0.3)
    gap, crossing = target_line_features(trace, 0, 12, Team.HOME)
    assert gap == pytest.approx(105.0 - 51.1)
    assert crossing == pytest.approx(34.0)
    assert target_line_features(trace, 0, 12, Team.AWAY)[1] is None
    assert expected_cross_y(50.0, 30.0, 10.0, 1.0, 105.0) == pytest.approx(35.5)
    assert expected_cross_y(50.0, 30.0, 0.0, 1.0, 105.0) is None


def test_angles():
    assert angle_between(np.array([1.0, 0.0]), np.array([0.0, 2.0])) == pytest.approx(math.pi / 2)
    assert angle_between(np.array([0.0, 0.0]), np.array([1.0, 0.0])) == 0.0
    trace = deflection_trace()
    assert change_of_direction(trace, 0, 5, 10) == pytest.approx(math.pi)
    assert change_of_direction(trace, 0, 12, 5) == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(WindowOutOfRange):
        change_of_direction(trace, 0, 25, 10)


def test_nearest_to_ball_prefers_lowest_id():
    trace = build_trace({BALL: (50.5, 34.0), home(3): (51.0, 34.0), home(2): (50.0, 34.0)}, 2)
    player, gap = nearest_to_ball(trace, 1)
    assert player.id == 2
    assert gap == pytest.approx(0.5)


def test_moving():
    trace = kick_trace()
    assert moving(trace, 0, 12)
    assert not moving(trace, 0, 3)
    assert not moving(trace, 2, 12)


def test_smoothing():
    trace = kick_trace()
    assert smooth_trace(trace, 1) is trace
    smoothed = smooth_trace(trace, 3)
    assert smoothed.position(0, 11)[0] == pytest.approx((50.3 + 50.7 + 51.1) / 3)
    assert smoothed.position(0, 0)[0] == pytest.approx(50.3)


@given(width=st.integers(1, 15), x=st.floats(0.0, 105.0), y=st.floats(0.0, 68.0))
def test_smoothing_keeps_still_objects(width, x, y):
    trace = build_trace({BALL: (x, y), home(2): (y, x / 2)}, 20)
    assert np.allclose(smooth_trace(trace, width).positions, trace.positions)


def test_trace_features_of_a_kick():
    features = TraceFeatures.from_trace(kick_trace())
    assert features.impulse[0] == 0.0
    assert features.impulse[10] == pytest.approx(360.0)
    assert features.players[features.nearest[0]].id == 2
    assert features.nearest_distance[0] == pytest.approx(0.3)
    assert features.players[features.opponent_nearest[0, 1]].id == 12
    assert features.opponent_distance[0, 1] == pytest.approx(math.hypot(20.0, 24.0))


def test_forward_velocity_over_a_span():
    positions = np.column_stack([np.arange(6.0) ** 2, np.zeros(6)])
    velocity = forward_velocity(positions, 1.0, span=2)
    assert np.allclose(velocity[:4, 0], [2.0, 4.0, 6.0, 8.0])
    assert np.allclose(velocity[4:, 0], 8.0)
    assert np.allclose(forward_velocity(positions[:2], 30.0, span=2), 0.0)


def test_impulse_over_a_span():
    features = TraceFeatures.from_trace(kick_trace(), speed_span=3)
    # the speed ramps up over the three frames before the kick
    assert np.allclose(features.ball_speed[:8], 0.0)
    assert features.ball_speed[8] == pytest.approx(4.0)
    assert np.allclose(features.ball_speed[10:], 12.0)
    assert np.allclose(features.impulse[:3], 0.0)
    assert features.impulse[10] == pytest.approx(120.0)
    assert features.impulse.max() == pytest.approx(120.0)


def test_opponent_distance_is_measured_from_the_player():
    trace = build_trace({
        BALL: (50.3, 34.0),
        home(2): (50.0, 34.0),
        home(3): (80.0, 34.0),
        away(12): (51.0, 34.0),
        away(13): (79.0, 34.0),
    }, 3)
    features = TraceFeatures.from_trace(trace)
    ids = list(features.player_ids)
    assert features.player_ids[features.opponent_nearest[0, ids.index(2)]] == 12
    assert features.player_ids[features.opponent_nearest[0, ids.index(3)]] == 13
    assert features.player_ids[features.opponent_nearest[0, ids.index(13)]] == 3
    assert features.opponent_distance[0, ids.index(2)] == pytest.approx(1.0)


def test_players_without_opponents():
    features = TraceFeatures.from_trace(build_trace({BALL: (1.0, 1.0), home(2): (2.0, 2.0)}, 2))
    assert np.isinf(features.opponent_distance).all()
