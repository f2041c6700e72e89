"""Small hand-built traces with known atomic events."""
import numpy as np

from soccerevents.entity.config_entity import ScenarioSpec
from soccerevents.entity.trace_entity import ObjectClass, ObjectId, Team, Trace

BALL = ObjectId(0, ObjectClass.BALL)
HOME_KEEPER = ObjectId(1, ObjectClass.PLAYER, Team.HOME, True)
AWAY_KEEPER = ObjectId(11, ObjectClass.PLAYER, Team.AWAY, True)

PASS_SPEC = ScenarioSpec("Pass", placements={"kicker": (30.0, 20.0), "receiver": (45.0, 20.0)}, v0=12.0, mu=3.0)


def home(object_id: int) -> ObjectId:
    return ObjectId(object_id, ObjectClass.PLAYER, Team.HOME)


def away(object_id: int) -> ObjectId:
    return ObjectId(object_id, ObjectClass.PLAYER, Team.AWAY)


def build_trace(tracks: dict, frames: int, fps: float = 30.0, start_frame: int = 0) -> Trace:
    """``tracks`` maps each object to a fixed ``(x, y)`` or to a ``(frames, 2)`` array."""
    roster = list(tracks)
    positions = np.zeros((frames, len(roster), 2))
    for col, obj in enumerate(roster):
        track = np.asarray(tracks[obj], dtype=float)
        positions[:, col] = track if track.ndim == 2 else track[None, :]
    return Trace(positions, roster, fps, start_frame=start_frame)


def kick_trace() -> Trace:
    """Player 2 holds the ball still for frames 0-10, then it rolls away at 0.4 m per frame."""
    frames = 41
    ball = np.zeros((frames, 2))
    ball[:, 1] = 34.0
    ball[:, 0] = 50.3 + 0.4 * np.maximum(np.arange(frames) - 10, 0)
    return build_trace({
        BALL: ball,
        HOME_KEEPER: (5.0, 34.0),
        home(2): (50.0, 34.0),
        AWAY_KEEPER: (100.0, 34.0),
        away(12): (70.0, 10.0),
    }, frames)


def deflection_trace() -> Trace:
    """The ball arrives at player 2 at 0.6 m per frame and bounces back at 0.3 m per frame from frame 10."""
    frames = 31
    f = np.arange(frames)
    ball = np.zeros((frames, 2))
    ball[:, 1] = 34.0
    ball[:, 0] = np.where(f <= 10, 79.6 - 0.6 * (10 - f), 79.6 - 0.3 * (f - 10))
    return build_trace({
        BALL: ball,
        HOME_KEEPER: (5.0, 34.0),
        home(2): (80.0, 34.0),
        AWAY_KEEPER: (100.0, 20.0),
        away(12): (60.0, 10.0),
    }, frames)


def control_trace(opponent=(51.0, 34.0), frames: int = 20) -> Trace:
    """Player 2 stands on a still ball with opponent 12 at ``opponent``."""
    return build_trace({
        BALL: (50.3, 34.0),
        HOME_KEEPER: (5.0, 34.0),
        home(2): (50.0, 34.0),
        AWAY_KEEPER: (100.0, 34.0),
        away(12): opponent,
    }, frames)
