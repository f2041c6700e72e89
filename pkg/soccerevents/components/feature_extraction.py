import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from soccerevents.constant import detection_pipeline
from soccerevents.entity.trace_entity import ObjectId, Team, Trace
from soccerevents.exception.exception import WindowOutOfRange


def forward_velocity(positions: np.ndarray, fps: float, span: int = 1) -> np.ndarray:
    """
    Forward-difference velocity along the first axis, taken over ``span`` frames; the
    last ``span`` frames repeat the one before them. Up to ``span`` frames have zero velocity.
    """
    velocity = np.zeros_like(positions, dtype=float)
    if positions.shape[0] <= span:
        return velocity
    velocity[:-span] = (positions[span:] - positions[:-span]) * fps / span
    velocity[-span:] = velocity[-span - 1]
    return velocity


def forward_derivative(series: np.ndarray, fps: float) -> np.ndarray:
    derivative = np.zeros_like(series, dtype=float)
    if series.shape[0] < 2:
        return derivative
    derivative[:-1] = (series[1:] - series[:-1]) * fps
    derivative[-1] = derivative[-2]
    return derivative


@dataclass(frozen=True)
class KinematicSeries:
    """
    Per-frame motion of one object.

    Attributes:
        velocity (np.ndarray): ``(frames, 2)`` velocity in m/s.
        speed (np.ndarray): Norm of the velocity.
        acceleration (np.ndarray): Signed derivative of the speed in m/s^2.
        direction (np.ndarray): Angle of the velocity to the +x axis in radians, NaN when still.
    """
    velocity: np.ndarray
    speed: np.ndarray
    acceleration: np.ndarray
    direction: np.ndarray


def kinematics(trace: Trace, obj) -> KinematicSeries:
    track = trace.track(obj)
    velocity = forward_velocity(track, trace.fps)
    speed = np.linalg.norm(velocity, axis=1)
    acceleration = forward_derivative(speed, trace.fps)
    with np.errstate(invalid="ignore"):
        direction = np.where(speed > 0, np.arctan2(velocity[:, 1], velocity[:, 0]), np.nan)
    return KinematicSeries(velocity, speed, acceleration, direction)


def distance(trace: Trace, a, b, frame: int) -> float:
    delta = trace.position(a, frame) - trace.position(b, frame)
    return float(math.hypot(delta[0], delta[1]))


def target_line_features(trace: Trace, obj, frame: int, attacking_team: Team) -> Tuple[float, Optional[float]]:
    """
    Distance of an object to the goal line the team attacks, and the y at which its
    current velocity ray meets that line (None when the ray points away or runs parallel).
    """
    line_x = trace.geometry.target_line_x(attacking_team)
    x, y = trace.position(obj, frame)
    vx, vy = kinematics(trace, obj).velocity[trace.row(frame)]
    return abs(x - line_x), expected_cross_y(x, y, vx, vy, line_x)


def expected_cross_y(x: float, y: float, vx: float, vy: float, line_x: float) -> Optional[float]:
    if vx == 0 or (line_x - x) * vx < 0:
        return None
    return float(y + vy * (line_x - x) / vx)


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0 or nb == 0:
        return 0.0
    cosine = float(np.dot(a, b)) / (na * nb)
    return float(math.acos(min(1.0, max(-1.0, cosine))))


def change_of_direction(trace: Trace, obj, frame: int, window: int) -> float:
    """Angle in [0, pi] between the velocity at ``frame`` and at ``frame + window``."""
    if window < 1 or frame < trace.start_frame or frame + window > trace.end_frame:
        raise WindowOutOfRange(frame, window, len(trace))
    velocity = kinematics(trace, obj).velocity
    return angle_between(velocity[trace.row(frame)], velocity[trace.row(frame + window)])


def nearest_to_ball(trace: Trace, frame: int) -> Tuple[ObjectId, float]:
    """Player closest to the ball; equal distances go to the lowest id."""
    players = trace.players
    ball = trace.position(trace.ball, frame)
    row = trace.row(frame)
    cols = [trace.column(p) for p in players]
    gaps = np.linalg.norm(trace.positions[row, cols] - ball, axis=1)
    best = int(np.argmin(gaps))
    return players[best], float(gaps[best])


def moving(trace: Trace, obj, frame: int, threshold: float = detection_pipeline.FEATURE_MOVING_SPEED_MPS) -> bool:
    return bool(kinematics(trace, obj).speed[trace.row(frame)] > threshold)


def smooth_positions(positions: np.ndarray, width: int) -> np.ndarray:
    """
    Centered moving average over the frame axis of a ``(frames, objects, 2)`` array.
    Windows are cut at the ends. Each row only depends on its own neighbours, so a slice
    of the trace gives bit-identical rows wherever its full window is present.
    """
    if width <= 1 or positions.shape[0] == 0:
        return positions
    n_frames = positions.shape[0]
    total = np.zeros(positions.shape, dtype=float)
    count = np.zeros(n_frames)
    for offset in range(-((width - 1) // 2), width // 2 + 1):
        lo, hi = max(0, -offset), min(n_frames, n_frames - offset)
        total[lo:hi] += positions[lo + offset:hi + offset]
        count[lo:hi] += 1
    return total / count[:, None, None]


def smooth_trace(trace: Trace, width: int) -> Trace:
    """Centered moving average of every coordinate; width 1 returns the trace unchanged."""
    if width <= 1:
        return trace
    return trace.with_positions(smooth_positions(trace.positions, width))


class TraceFeatures:
    """
    Feature arrays of a block of frames, shared by all atomic rules.

    Players are indexed in roster order (lowest id first). Speeds are forward
    differences over ``speed_span`` frames. ``impulse[j]`` is the change of ball
    speed at frame ``j``: the speed leaving ``j`` minus the speed leaving
    ``j - speed_span``, per second. Rows before the first full span get 0.

    Attributes:
        positions (np.ndarray): ``(frames, objects, 2)``.
        first_frame (int): Frame number of row 0.
        speed_span (int): Frames each speed is measured over.
        ball_speed (np.ndarray): Ball speed per frame.
        impulse (np.ndarray): Change of ball speed arriving at each frame.
        player_speed (np.ndarray): ``(frames, players)``.
        ball_distance (np.ndarray): ``(frames, players)`` player-to-ball distance.
        nearest (np.ndarray): Index of the nearest player per frame.
        nearest_distance (np.ndarray): Its distance.
        team_code (np.ndarray): 0 for home, 1 for away per player.
        opponent_nearest (np.ndarray): ``(frames, players)`` nearest player of the other team.
        opponent_distance (np.ndarray): ``(frames, players)`` distance to that player, inf without opponents.
    """

    def __init__(self, positions: np.ndarray, roster: Sequence[ObjectId], fps: float, first_frame: int = 0,
                 speed_span: int = 1):
        self.positions = positions
        self.fps = fps
        self.first_frame = first_frame
        self.speed_span = speed_span
        self.roster = tuple(roster)
        ball_cols = [i for i, obj in enumerate(self.roster) if obj.is_ball]
        self.ball_col = ball_cols[0]
        self.player_cols = np.array([i for i, obj in enumerate(self.roster) if not obj.is_ball], dtype=int)
        self.players = [self.roster[i] for i in self.player_cols]
        self.player_ids = np.array([p.id for p in self.players], dtype=int)
        self.team_code = np.array([1 if p.team is Team.AWAY else 0 for p in self.players], dtype=int)

        ball = positions[:, self.ball_col, :]
        self.ball_velocity = forward_velocity(ball, fps, speed_span)
        self.ball_speed = np.linalg.norm(self.ball_velocity, axis=1)
        self.impulse = np.zeros_like(self.ball_speed)
        self.impulse[speed_span:] = (self.ball_speed[speed_span:] - self.ball_speed[:-speed_span]) * fps / speed_span

        players = positions[:, self.player_cols, :]
        self.player_speed = np.linalg.norm(forward_velocity(players, fps, speed_span), axis=2)
        self.ball_distance = np.linalg.norm(players - ball[:, None, :], axis=2)
        self.nearest = np.argmin(self.ball_distance, axis=1)
        frames = np.arange(len(self.nearest))
        self.nearest_distance = self.ball_distance[frames, self.nearest]

        n_frames, n_players = self.ball_distance.shape
        self.opponent_nearest = np.zeros((n_frames, n_players), dtype=int)
        self.opponent_distance = np.full((n_frames, n_players), np.inf)
        for member in range(n_players):
            rivals = np.flatnonzero(self.team_code != self.team_code[member])
            if rivals.size == 0:
                continue
            gaps = np.linalg.norm(players[:, rivals] - players[:, member:member + 1], axis=2)
            best = np.argmin(gaps, axis=1)
            self.opponent_nearest[:, member] = rivals[best]
            self.opponent_distance[:, member] = gaps[frames, best]

    @classmethod
    def from_trace(cls, trace: Trace, speed_span: int = 1) -> "TraceFeatures":
        return cls(trace.positions, trace.roster, trace.fps, trace.start_frame, speed_span)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def ball_position(self, row: int) -> np.ndarray:
        return self.positions[row, self.ball_col]
