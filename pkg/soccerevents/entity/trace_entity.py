from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from soccerevents.constant import detection_pipeline
from soccerevents.exception.exception import SoccerEventsException, UnknownObject


class ObjectClass(str, Enum):
    PLAYER = "player"
    BALL = "ball"


class Team(str, Enum):
    HOME = "home"
    AWAY = "away"
    NONE = "none"

    def opponent(self) -> "Team":
        if self is Team.HOME:
            return Team.AWAY
        if self is Team.AWAY:
            return Team.HOME
        return Team.NONE


@dataclass(frozen=True, order=True)
class ObjectId:
    """
    A tracked object. Ordering and equality follow the numeric id first, so sorted
    rosters break distance ties towards the lowest id.

    Attributes:
        id (int): Object number as found in the positional file.
        object_class (ObjectClass): Player or ball.
        team (Team): Home or away for players, none for the ball.
        is_goalkeeper (bool): Whether the player keeps goal for its team.
    """
    id: int
    object_class: ObjectClass = ObjectClass.PLAYER
    team: Team = Team.NONE
    is_goalkeeper: bool = False

    @property
    def is_ball(self) -> bool:
        return self.object_class is ObjectClass.BALL


@dataclass(frozen=True)
class FieldGeometry:
    """
    Pitch dimensions in meters. The origin is the lower-left corner, x runs along the
    long side and y along the short side. The home team attacks the goal line at
    x = length, the away team the one at x = 0.

    Attributes:
        length_m (float): Goal line to goal line.
        width_m (float): Sideline to sideline.
        goal_mouth_width_m (float): Distance between the posts.
        sideline_band_m (float): Depth of the band along each sideline where crosses start.
        goal_area_depth_m (float): Depth of the box in front of each goal.
        goal_area_width_m (float): Width of that box.
    """
    length_m: float = detection_pipeline.FIELD_LENGTH_M
    width_m: float = detection_pipeline.FIELD_WIDTH_M
    goal_mouth_width_m: float = detection_pipeline.FIELD_GOAL_MOUTH_WIDTH_M
    sideline_band_m: float = detection_pipeline.FIELD_SIDELINE_BAND_M
    goal_area_depth_m: float = detection_pipeline.FIELD_GOAL_AREA_DEPTH_M
    goal_area_width_m: float = detection_pipeline.FIELD_GOAL_AREA_WIDTH_M

    def __post_init__(self):
        dims = (self.length_m, self.width_m, self.goal_mouth_width_m,
                self.sideline_band_m, self.goal_area_depth_m, self.goal_area_width_m)
        if any(d <= 0 for d in dims):
            raise SoccerEventsException(f"field dimensions must be positive: {dims}")
        if self.goal_mouth_width_m >= self.width_m:
            raise SoccerEventsException("goal mouth must be narrower than the pitch")
        if self.sideline_band_m >= self.width_m / 2:
            raise SoccerEventsException("sideline band must be narrower than half the pitch")

    def target_line_x(self, attacking_team: Team) -> float:
        if attacking_team is Team.AWAY:
            return 0.0
        return self.length_m

    def goal_center(self, attacking_team: Team) -> Tuple[float, float]:
        return self.target_line_x(attacking_team), self.width_m / 2

    def in_goal_mouth(self, y: float) -> bool:
        return abs(y - self.width_m / 2) <= self.goal_mouth_width_m / 2

    def in_pitch(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.length_m and 0.0 <= y <= self.width_m

    def in_bounds(self, x: float, y: float, margin: float = detection_pipeline.TRACE_MARGIN_M) -> bool:
        return -margin <= x <= self.length_m + margin and -margin <= y <= self.width_m + margin

    def in_sideline_band(self, y: float) -> bool:
        return y <= self.sideline_band_m or y >= self.width_m - self.sideline_band_m

    def in_attacking_third(self, x: float, attacking_team: Team) -> bool:
        third = self.length_m / 3
        if attacking_team is Team.AWAY:
            return x <= third
        return x >= self.length_m - third

    def in_goal_area(self, x: float, y: float, attacking_team: Team) -> bool:
        if abs(y - self.width_m / 2) > self.goal_area_width_m / 2:
            return False
        line = self.target_line_x(attacking_team)
        return 0.0 <= abs(line - x) <= self.goal_area_depth_m and self.in_pitch(x, y)

    def behind_goal_line(self, x: float, attacking_team: Team) -> bool:
        if attacking_team is Team.AWAY:
            return x < 0.0
        return x > self.length_m


@dataclass(frozen=True)
class Frame:
    index: int
    positions: Mapping[ObjectId, Tuple[float, float]]


class Trace:
    """
    Positions of every tracked object over a contiguous run of frames.

    Positions are held as a read-only ``(frames, objects, 2)`` array whose object
    axis follows the roster sorted by id. Frame numbers are absolute: row ``i``
    holds frame ``start_frame + i``.
    """

    def __init__(self, positions: np.ndarray, roster: Sequence[ObjectId], fps: float = detection_pipeline.TRACE_FPS,
                 geometry: Optional[FieldGeometry] = None, start_frame: int = 0):
        if fps <= 0:
            raise SoccerEventsException(f"fps must be positive, got {fps}")
        order = sorted(range(len(roster)), key=lambda i: roster[i].id)
        array = np.asarray(positions, dtype=float)
        if array.ndim != 3 or array.shape[1] != len(roster) or array.shape[2] != 2:
            raise SoccerEventsException(
                f"positions of shape {array.shape} do not fit a roster of {len(roster)} objects")
        array = array[:, order, :].copy()
        array.setflags(write=False)
        self.positions: np.ndarray = array
        self.roster: Tuple[ObjectId, ...] = tuple(roster[i] for i in order)
        self.fps = float(fps)
        self.geometry = geometry or FieldGeometry()
        self.start_frame = int(start_frame)
        self._columns: Dict[int, int] = {obj.id: col for col, obj in enumerate(self.roster)}

    def __len__(self) -> int:
        return self.positions.shape[0]

    def __repr__(self) -> str:
        return f"Trace(frames={len(self)}, start={self.start_frame}, objects={len(self.roster)}, fps={self.fps})"

    @property
    def end_frame(self) -> int:
        """Last frame number, inclusive."""
        return self.start_frame + len(self) - 1

    @property
    def frame_indices(self) -> range:
        return range(self.start_frame, self.start_frame + len(self))

    @property
    def frames(self) -> Iterator[Frame]:
        for row in range(len(self)):
            yield self._frame_at_row(row)

    def frame(self, index: int) -> Frame:
        return self._frame_at_row(self.row(index))

    def _frame_at_row(self, row: int) -> Frame:
        coords = self.positions[row]
        return Frame(
            index=self.start_frame + row,
            positions={obj: (float(coords[col, 0]), float(coords[col, 1])) for col, obj in enumerate(self.roster)},
        )

    def row(self, frame: int) -> int:
        row = frame - self.start_frame
        if not 0 <= row < len(self):
            raise SoccerEventsException(f"frame {frame} is outside {self.start_frame}..{self.end_frame}")
        return row

    def column(self, obj) -> int:
        key = obj.id if isinstance(obj, ObjectId) else int(obj)
        if key not in self._columns:
            raise UnknownObject(key)
        return self._columns[key]

    def object(self, object_id: int) -> ObjectId:
        return self.roster[self.column(object_id)]

    @property
    def balls(self) -> List[ObjectId]:
        return [obj for obj in self.roster if obj.is_ball]

    @property
    def ball(self) -> ObjectId:
        balls = self.balls
        if not balls:
            raise SoccerEventsException("trace has no ball")
        return balls[0]

    @property
    def players(self) -> List[ObjectId]:
        return [obj for obj in self.roster if not obj.is_ball]

    def position(self, obj, frame: int) -> np.ndarray:
        return self.positions[self.row(frame), self.column(obj)]

    def track(self, obj) -> np.ndarray:
        return self.positions[:, self.column(obj), :]

    def with_positions(self, positions: np.ndarray) -> "Trace":
        return Trace(positions, self.roster, self.fps, self.geometry, self.start_frame)

    def slice(self, first: int, last: int) -> "Trace":
        """Sub-trace covering frames ``first..last`` inclusive."""
        lo, hi = self.row(first), self.row(last)
        return Trace(self.positions[lo:hi + 1], self.roster, self.fps, self.geometry, first)

    @classmethod
    def concatenate(cls, chunks: Sequence["Trace"]) -> "Trace":
        """Joins consecutive chunks of one trace."""
        if not chunks:
            raise SoccerEventsException("no trace chunks to join")
        first = chunks[0]
        expected = first.start_frame
        for chunk in chunks:
            if chunk.start_frame != expected:
                raise SoccerEventsException(f"chunk starting at frame {chunk.start_frame} does not follow "
                                            f"frame {expected - 1}")
            expected = chunk.end_frame + 1
        return cls(np.concatenate([c.positions for c in chunks]), first.roster, first.fps, first.geometry,
                   first.start_frame)

    def translated(self, dx: float, dy: float) -> "Trace":
        return self.with_positions(self.positions + np.array([dx, dy]))


class SampledTrace:
    """
    Positions of a trace at a sparse set of frames, with the roster, frame range and
    geometry of the whole trace. Reads like a Trace for the frames it holds, so the
    complex rules can run after the positional stream has moved on.
    """

    def __init__(self, samples: Mapping[int, np.ndarray], roster: Sequence[ObjectId], start_frame: int,
                 end_frame: int, fps: float = detection_pipeline.TRACE_FPS, geometry: Optional[FieldGeometry] = None):
        self.samples: Dict[int, np.ndarray] = dict(samples)
        self.roster: Tuple[ObjectId, ...] = tuple(sorted(roster, key=lambda obj: obj.id))
        self.start_frame = int(start_frame)
        self._end_frame = int(end_frame)
        self.fps = float(fps)
        self.geometry = geometry or FieldGeometry()
        self._columns: Dict[int, int] = {obj.id: col for col, obj in enumerate(self.roster)}

    def __len__(self) -> int:
        return self._end_frame - self.start_frame + 1

    def __repr__(self) -> str:
        return (f"SampledTrace(frames={len(self)}, start={self.start_frame}, kept={len(self.samples)}, "
                f"objects={len(self.roster)}, fps={self.fps})")

    @property
    def end_frame(self) -> int:
        return self._end_frame

    def column(self, obj) -> int:
        key = obj.id if isinstance(obj, ObjectId) else int(obj)
        if key not in self._columns:
            raise UnknownObject(key)
        return self._columns[key]

    def object(self, object_id: int) -> ObjectId:
        return self.roster[self.column(object_id)]

    @property
    def ball(self) -> ObjectId:
        balls = [obj for obj in self.roster if obj.is_ball]
        if not balls:
            raise SoccerEventsException("trace has no ball")
        return balls[0]

    @property
    def players(self) -> List[ObjectId]:
        return [obj for obj in self.roster if not obj.is_ball]

    def position(self, obj, frame: int) -> np.ndarray:
        if frame not in self.samples:
            raise SoccerEventsException(f"frame {frame} was not kept from {self.start_frame}..{self.end_frame}")
        return self.samples[frame][self.column(obj)]


ATOMIC_ROLES: Dict[str, Tuple[str, ...]] = {
    "KickingTheBall": ("KickingPlayer", "KickedObject"),
    "BallPossession": ("PossessingPlayer", "PossessedObject"),
    "Tackle": ("PossessingPlayer", "TacklingPlayer", "PossessedObject"),
    "BallDeflection": ("DeflectingPlayer", "DeflectedObject"),
    "BallOut": ("OutObject",),
    "Goal": ("Scorer",),
}

## roles a ground-truth record may leave out
OPTIONAL_ROLES: Dict[str, Tuple[str, ...]] = {
    "Goal": ("Scorer",),
}

_PASS_ROLES = ("KickingPlayer", "ReceivingPlayer")
_SHOT_ROLES = ("ShootingPlayer",)
_TACKLE_ROLES = ("PossessingPlayer", "TacklingPlayer", "WinningPlayer")

COMPLEX_ROLES: Dict[str, Tuple[str, ...]] = {
    "BallPossession": ("PossessingPlayer",),
    "Tackle": _TACKLE_ROLES,
    "WonTackle": _TACKLE_ROLES,
    "LostTackle": _TACKLE_ROLES,
    "Pass": _PASS_ROLES,
    "Cross": _PASS_ROLES,
    "FilteringPass": _PASS_ROLES,
    "PassThenGoal": _PASS_ROLES,
    "CrossThenGoal": _PASS_ROLES,
    "FilteringPassThenGoal": _PASS_ROLES,
    "Shot": _SHOT_ROLES,
    "ShotOut": _SHOT_ROLES,
    "ShotThenGoal": _SHOT_ROLES,
    "SavedShot": _SHOT_ROLES,
}

_ATOMIC_RANK = {name: rank for rank, name in enumerate(detection_pipeline.ATOMIC_EVENT_TYPES)}
_COMPLEX_RANK = {name: rank for rank, name in enumerate(detection_pipeline.COMPLEX_EVENT_TYPES)}


@dataclass(frozen=True)
class AtomicEvent:
    """
    Single-frame event with its role bindings (role name to object id).
    """
    id: str
    event_type: str
    t: int
    roles: Dict[str, int] = field(default_factory=dict)

    @property
    def start(self) -> int:
        return self.t

    @property
    def end(self) -> int:
        return self.t

    def sort_key(self):
        return self.t, _ATOMIC_RANK.get(self.event_type, len(_ATOMIC_RANK)), sorted(self.roles.items())


@dataclass(frozen=True)
class IntervalEvent:
    """
    Event spanning the closed frame interval ``[start, end]``.

    Attributes:
        id (str): Unique id within its log.
        event_type (str): Complex event type.
        start (int): First frame.
        end (int): Last frame.
        roles (dict): Role name to object id.
        sub_events (tuple): Ids of the events it was composed from.
        role_frames (dict): Frame at which each role was observed; roles absent here
            are taken at ``start``. Not serialized.
    """
    id: str
    event_type: str
    start: int
    end: int
    roles: Dict[str, int] = field(default_factory=dict)
    sub_events: Tuple[str, ...] = ()
    role_frames: Dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.start > self.end:
            raise SoccerEventsException(f"{self.event_type} interval [{self.start},{self.end}] is reversed")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def role_frame(self, role: str) -> int:
        return self.role_frames.get(role, self.start)

    def sort_key(self):
        return self.start, self.end, _COMPLEX_RANK.get(self.event_type, len(_COMPLEX_RANK)), sorted(self.roles.items())


@dataclass(frozen=True)
class EventLog:
    """
    Atomic and complex events of one trace, each list sorted by time.
    """
    atomic: Tuple[AtomicEvent, ...] = ()
    complex: Tuple[IntervalEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atomic", tuple(sorted(self.atomic, key=AtomicEvent.sort_key)))
        object.__setattr__(self, "complex", tuple(sorted(self.complex, key=IntervalEvent.sort_key)))
        ids = [e.id for e in self.atomic] + [e.id for e in self.complex]
        if len(ids) != len(set(ids)):
            raise SoccerEventsException("event ids in a log must be unique")

    def __len__(self) -> int:
        return len(self.atomic) + len(self.complex)

    def atomic_of(self, event_type: str) -> List[AtomicEvent]:
        return [e for e in self.atomic if e.event_type == event_type]

    def complex_of(self, event_type: str) -> List[IntervalEvent]:
        return [e for e in self.complex if e.event_type == event_type]

    def shifted(self, delta: int) -> "EventLog":
        return EventLog(
            atomic=tuple(AtomicEvent(e.id, e.event_type, e.t + delta, dict(e.roles)) for e in self.atomic),
            complex=tuple(
                IntervalEvent(e.id, e.event_type, e.start + delta, e.end + delta, dict(e.roles), e.sub_events,
                              {r: f + delta for r, f in e.role_frames.items()})
                for e in self.complex
            ),
        )


def renumber(log: EventLog, atomic_prefix: str = "a", complex_prefix: str = "c") -> EventLog:
    """Reassign ids in time order, rewriting sub-event references."""
    mapping: Dict[str, str] = {}
    atomic = []
    for i, e in enumerate(log.atomic):
        mapping[e.id] = f"{atomic_prefix}{i}"
        atomic.append(AtomicEvent(mapping[e.id], e.event_type, e.t, dict(e.roles)))
    for i, e in enumerate(log.complex):
        mapping[e.id] = f"{complex_prefix}{i}"
    complex_events = [
        IntervalEvent(mapping[e.id], e.event_type, e.start, e.end, dict(e.roles),
                      tuple(mapping.get(s, s) for s in e.sub_events), dict(e.role_frames))
        for e in log.complex
    ]
    return EventLog(tuple(atomic), tuple(complex_events))
