"""
Synthetic match scenarios with exact ground truth.

Every scenario is a short choreography over a full roster of 22 players: one
team attacks, actors take their scripted positions, everyone else stands parked
near the sidelines. The ball rolls with constant deceleration after every kick
and is held 0.3 m in front of whoever controls it. Players stand still while the
ball is in flight, so the only speed jumps in a trace are the scripted kicks,
deflections, stops and pokes.

Ground truth is built from the script: kicks, deflections, outs and goals are
recorded where they are performed. The script also declares who controls the
ball over which frames; possession and tackle atoms are labelled from those
control spells and the distance of the holder to the nearest opponent. Complex
events are derived from the atoms with the hand-written reference rules. A script
whose strikes the reference detector reads differently, or whose complex events
differ from the scenario's intent, is rejected as infeasible.
"""
import math
import sys
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from soccerevents.components.atomic_detector import detect_atomic
from soccerevents.components.reference_rules import reference_complex
from soccerevents.constant import detection_pipeline
from soccerevents.entity.config_entity import SCENARIO_OUTCOMES, NoiseSpec, RuleParameterSet, ScenarioSpec
from soccerevents.entity.trace_entity import (AtomicEvent, EventLog, FieldGeometry, ObjectClass, ObjectId, Team,
                                              Trace, renumber)
from soccerevents.exception.exception import InfeasibleScript, OverlappingScenarios, SoccerEventsException
from soccerevents.logging.logger import logging

BALL_ID = 0
HOME_KEEPER_ID = 1
AWAY_KEEPER_ID = 12
OUTFIELD = detection_pipeline.SCENARIO_OUTFIELD_PER_TEAM
OFFSET = detection_pipeline.SCENARIO_BALL_OFFSET_M
RETREAT_FRAMES = 10

## placements for the home team attacking the goal at x = 105
DEFAULT_PLACEMENTS: Dict[str, Dict[str, Tuple[float, float]]] = {
    "Pass": {"kicker": (30.0, 20.0), "receiver": (45.0, 28.0), "defender": (70.0, 40.0)},
    "Cross": {"kicker": (85.0, 6.0), "receiver": (95.0, 30.0), "defender": (101.0, 38.0)},
    "FilteringPass": {"kicker": (60.0, 30.0), "receiver": (80.0, 36.0)},
    "PassThenGoal": {"kicker": (72.0, 50.0), "receiver": (85.0, 40.0), "defender": (96.0, 28.0),
                     "keeper": (102.0, 40.0)},
    "CrossThenGoal": {"kicker": (85.0, 6.0), "receiver": (95.0, 30.0), "defender": (101.0, 38.0),
                      "keeper": (102.0, 40.0)},
    "FilteringPassThenGoal": {"kicker": (60.0, 30.0), "receiver": (80.0, 36.0), "keeper": (102.0, 40.0)},
    "Tackle": {"possessor": (50.0, 34.0), "tackler": (56.0, 34.0)},
    "Shot:Goal": {"shooter": (90.0, 40.0), "keeper": (102.0, 40.0)},
    "Shot:Out": {"shooter": (90.0, 40.0), "defender": (100.0, 35.0), "keeper": (102.0, 34.0)},
    "Shot:Saved": {"shooter": (90.0, 40.0), "keeper": (102.0, 34.0)},
    "Dribble": {"possessor": (40.0, 34.0), "target": (52.0, 34.0)},
}

_PASS_INTENT = {"BallPossession", "Pass"}
_GOAL_INTENT = {"PassThenGoal", "Shot", "ShotThenGoal"}

## complex event types a noise-free scenario must produce, no more and no less
INTENT: Dict[str, set] = {
    "Pass": _PASS_INTENT,
    "Cross": _PASS_INTENT | {"Cross"},
    "FilteringPass": _PASS_INTENT | {"FilteringPass"},
    "PassThenGoal": _PASS_INTENT | _GOAL_INTENT,
    "CrossThenGoal": _PASS_INTENT | _GOAL_INTENT | {"Cross", "CrossThenGoal"},
    "FilteringPassThenGoal": _PASS_INTENT | _GOAL_INTENT | {"FilteringPass", "FilteringPassThenGoal"},
    "Tackle:Won": {"BallPossession", "Tackle", "WonTackle"},
    "Tackle:Lost": {"BallPossession", "Tackle", "LostTackle"},
    "Shot:Goal": {"BallPossession", "Shot", "ShotThenGoal"},
    "Shot:Out": {"BallPossession", "Shot", "ShotOut"},
    "Shot:Saved": {"BallPossession", "Shot", "SavedShot"},
    "Dribble": {"BallPossession"},
}


def _key(spec: ScenarioSpec) -> str:
    return f"{spec.kind}:{spec.outcome}" if spec.kind in SCENARIO_OUTCOMES else spec.kind


def default_placements(spec: ScenarioSpec) -> Dict[str, Tuple[float, float]]:
    """Placements of the kind and outcome, falling back to those shared by every outcome of the kind."""
    return DEFAULT_PLACEMENTS.get(_key(spec), DEFAULT_PLACEMENTS.get(spec.kind, {}))


def scenario_roster() -> Tuple[ObjectId, ...]:
    """Ball 0, home keeper 1 and outfield 2-11, away keeper 12 and outfield 13-22."""
    roster = [ObjectId(BALL_ID, ObjectClass.BALL)]
    for team, keeper in ((Team.HOME, HOME_KEEPER_ID), (Team.AWAY, AWAY_KEEPER_ID)):
        roster.append(ObjectId(keeper, ObjectClass.PLAYER, team, True))
        roster.extend(ObjectId(keeper + 1 + i, ObjectClass.PLAYER, team) for i in range(OUTFIELD))
    return tuple(roster)


def _parking(geometry: FieldGeometry) -> Dict[int, np.ndarray]:
    spots = {
        BALL_ID: np.array([geometry.length_m / 2, geometry.width_m / 2]),
        HOME_KEEPER_ID: np.array([3.0, geometry.width_m / 2]),
        AWAY_KEEPER_ID: np.array([geometry.length_m - 3.0, geometry.width_m / 2]),
    }
    for i in range(OUTFIELD):
        spots[HOME_KEEPER_ID + 1 + i] = np.array([12.0 + 9.0 * i, 1.0])
        spots[AWAY_KEEPER_ID + 1 + i] = np.array([12.0 + 9.0 * i, geometry.width_m - 1.0])
    return spots


## 4-4-2 of the home team in its own half: defenders, midfielders, then the two forwards
_KICKOFF_SHAPE = [(16.0, 10.0), (16.0, 25.0), (16.0, 43.0), (16.0, 58.0),
                  (32.0, 10.0), (32.0, 25.0), (32.0, 43.0), (32.0, 58.0)]


def kickoff_formation(geometry: Optional[FieldGeometry] = None, fps: float = detection_pipeline.TRACE_FPS) -> Trace:
    """
    One frame of the scenario roster lined up for a home kickoff: the ball on the
    centre spot, the home forwards 10 and 11 one metre either side of it and just
    inside their half, the away team mirrored outside the centre circle.
    """
    geometry = geometry or FieldGeometry()
    centre = np.array([geometry.length_m / 2, geometry.width_m / 2])
    spots = {
        BALL_ID: centre,
        HOME_KEEPER_ID: np.array([3.0, centre[1]]),
        AWAY_KEEPER_ID: np.array([geometry.length_m - 3.0, centre[1]]),
    }
    for i, (x, y) in enumerate(_KICKOFF_SHAPE):
        spots[HOME_KEEPER_ID + 1 + i] = np.array([x, y])
        spots[AWAY_KEEPER_ID + 1 + i] = np.array([geometry.length_m - x, y])
    spots[HOME_KEEPER_ID + 9] = centre + np.array([-1.0, -1.0])
    spots[HOME_KEEPER_ID + 10] = centre + np.array([-1.0, 1.0])
    spots[AWAY_KEEPER_ID + 9] = centre + np.array([10.0, -4.0])
    spots[AWAY_KEEPER_ID + 10] = centre + np.array([10.0, 4.0])
    roster = scenario_roster()
    positions = np.array([[spots[obj.id] for obj in roster]], dtype=float)
    return Trace(positions, roster, fps, geometry)


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0:
        raise InfeasibleScript("two scripted points coincide")
    return vector / norm


def _rotate(vector: np.ndarray, degrees: float) -> np.ndarray:
    a = math.radians(degrees)
    return np.array([math.cos(a) * vector[0] - math.sin(a) * vector[1],
                     math.sin(a) * vector[0] + math.cos(a) * vector[1]])


def _walk(origin: np.ndarray, target: np.ndarray, frames: int) -> np.ndarray:
    """Evenly spaced points after ``origin``, the last one on ``target``."""
    frames = max(1, frames)
    return origin[None, :] + np.linspace(0, 1, frames + 1)[1:, None] * (target - origin)[None, :]


def rolling_distances(v0: float, mu: float, fps: float, stop_at: float = math.inf) -> np.ndarray:
    """
    Distance covered by a ball kicked at ``v0`` and decelerating at ``mu``, after
    1, 2, ... frames, up to the first frame reaching ``stop_at`` or the frame the
    ball comes to rest.
    """
    t_rest = v0 / mu
    n = np.arange(1, int(math.ceil(t_rest * fps)) + 1)
    t = np.minimum(n / fps, t_rest)
    covered = v0 * t - 0.5 * mu * t * t
    reached = np.flatnonzero(covered >= stop_at)
    return covered[:reached[0] + 1] if reached.size else covered


## control spell: holder id, first frame, last frame (None while the holder keeps the ball)
Spell = List[Optional[int]]


class _Choreography:
    """
    Frames of the roster appended one at a time; objects not moved keep their position.
    ``spells`` lists who has the ball at their feet over which frames.
    """

    def __init__(self, roster: Sequence[ObjectId], start: Dict[int, np.ndarray]):
        self.ids = [obj.id for obj in roster]
        self.state = {obj_id: np.array(start[obj_id], dtype=float) for obj_id in self.ids}
        self.frames: List[np.ndarray] = []
        self.atoms: List[Tuple[int, str, dict]] = []
        self.spells: List[Spell] = []
        self.snapshot()

    @property
    def now(self) -> int:
        return len(self.frames) - 1

    def snapshot(self) -> None:
        self.frames.append(np.array([self.state[i] for i in self.ids]))

    def hold(self, frames: int) -> None:
        for _ in range(frames):
            self.snapshot()

    def glide(self, paths: Dict[int, np.ndarray]) -> None:
        """One frame per path point; shorter paths rest on their last point."""
        length = max(len(path) for path in paths.values())
        for j in range(length):
            for obj_id, path in paths.items():
                self.state[obj_id] = np.asarray(path[min(j, len(path) - 1)], dtype=float)
            self.snapshot()

    def record(self, event_type: str, roles: dict, frame: Optional[int] = None) -> None:
        self.atoms.append((self.now if frame is None else frame, event_type, roles))

    def control(self, holder: int, first: Optional[int] = None) -> None:
        """``holder`` has the ball from ``first`` (the current frame by default) on."""
        first = self.now if first is None else first
        self.release(first - 1)
        self.spells.append([holder, first, None])

    def release(self, last: Optional[int] = None) -> None:
        """The current holder, if any, keeps the ball up to ``last`` (the current frame by default)."""
        if self.spells and self.spells[-1][2] is None:
            self.spells[-1][2] = self.now if last is None else last

    def kick(self, player: int) -> None:
        self.release()
        self.record("KickingTheBall", {"KickingPlayer": player, "KickedObject": BALL_ID})

    def positions(self) -> np.ndarray:
        return np.stack(self.frames)


class ScenarioGenerator:
    """
    Builds the trace and ground truth of one scripted scenario.

    Attributes:
        spec (ScenarioSpec): The script.
        params (RuleParameterSet): Reference thresholds the clean trace is checked against.
        attacking (Team): Team performing the scripted action.
    """

    def __init__(self, spec: ScenarioSpec, rng: Optional[np.random.Generator] = None,
                 params: Optional[RuleParameterSet] = None, fps: float = detection_pipeline.TRACE_FPS,
                 geometry: Optional[FieldGeometry] = None):
        self.spec = spec
        self.rng = rng if rng is not None else np.random.default_rng(spec.seed)
        self.params = params or RuleParameterSet.reference()
        self.fps = fps
        self.geometry = geometry or FieldGeometry()
        self.roster = scenario_roster()
        self.attacking = Team.HOME if spec.team == "home" else Team.AWAY
        self.window = self.params.max_window
        self.speed_threshold = max(self.params.kicking.speed, self.params.deflection.speed)

    # actors and placements

    def actor(self, role: str) -> int:
        attack_first = HOME_KEEPER_ID + 1 if self.attacking is Team.HOME else AWAY_KEEPER_ID + 1
        defend_first = AWAY_KEEPER_ID + 1 if self.attacking is Team.HOME else HOME_KEEPER_ID + 1
        return {
            "kicker": attack_first,
            "shooter": attack_first,
            "possessor": attack_first,
            "receiver": attack_first + 1,
            "defender": defend_first,
            "tackler": defend_first,
            "keeper": AWAY_KEEPER_ID if self.attacking is Team.HOME else HOME_KEEPER_ID,
        }[role]

    def _mirror(self, point: Sequence[float]) -> np.ndarray:
        x, y = float(point[0]), float(point[1])
        if self.attacking is Team.AWAY:
            x = self.geometry.length_m - x
        return np.array([x, y])

    def placement(self, role: str) -> np.ndarray:
        if role in self.spec.placements:
            return np.array(self.spec.placements[role], dtype=float)
        default = default_placements(self.spec).get(role)
        if default is None:
            raise InfeasibleScript(f"{_key(self.spec)} has no placement for {role}")
        jitter = self.rng.uniform(-detection_pipeline.SCENARIO_JITTER_M, detection_pipeline.SCENARIO_JITTER_M, 2)
        return self._mirror(default) + jitter

    def aim(self, point: Sequence[float]) -> np.ndarray:
        return self._mirror(point)

    # ball flights

    def _check_strike(self, speed: float, frames: int, what: str) -> None:
        """The ball must still be fast and away from the striker when the rule window closes."""
        if frames < self.window + 1:
            raise InfeasibleScript(f"{what} lasts {frames} frames, fewer than the {self.window + 1} detection needs")
        if speed - self.spec.mu * self.window / self.fps <= self.speed_threshold:
            raise InfeasibleScript(f"{what} is too slow ({speed:.1f} m/s) to register")

    def trap_flight(self, distance: float, v0: float, what: str) -> Tuple[np.ndarray, float]:
        """Distances of a ball rolled to a point ``distance`` away, and its speed on arrival."""
        covered = rolling_distances(v0, self.spec.mu, self.fps, distance)
        if covered[-1] < distance:
            raise InfeasibleScript(f"{what}: the ball stops after {covered[-1]:.2f} m, "
                                   f"{distance - covered[-1]:.2f} m short")
        frames = len(covered)
        arrival = v0 - self.spec.mu * frames / self.fps
        if frames > detection_pipeline.COMPLEX_PASS_MAX_GAP_FRAMES:
            raise InfeasibleScript(f"{what}: flight of {frames} frames is too long")
        if arrival <= self.speed_threshold:
            raise InfeasibleScript(f"{what}: the ball arrives at {arrival:.1f} m/s, too slow to be told from control")
        self._check_strike(v0, frames, what)
        return covered, arrival

    def exit_flight(self, origin: np.ndarray, direction: np.ndarray, v0: float,
                    what: str) -> Tuple[np.ndarray, int]:
        """
        Path of a ball rolled out of the pitch, stopping once it is 2 m past the
        line it crosses. Returns the points and the index of the first point outside.
        """
        covered = rolling_distances(v0, self.spec.mu, self.fps)
        path = origin[None, :] + covered[:, None] * direction[None, :]
        outside = ~np.array([self.geometry.in_pitch(x, y) for x, y in path])
        if not outside.any():
            raise InfeasibleScript(f"{what}: the ball stops inside the pitch")
        first_out = int(np.argmax(outside))
        beyond = detection_pipeline.SCENARIO_BALL_STOP_BEYOND_LINE_M
        overshoot = np.maximum.reduce([-path[:, 0], path[:, 0] - self.geometry.length_m,
                                       -path[:, 1], path[:, 1] - self.geometry.width_m])
        stop = np.flatnonzero(overshoot >= beyond)
        last = int(stop[0]) if stop.size else len(path) - 1
        if first_out + 1 > detection_pipeline.COMPLEX_PASS_MAX_GAP_FRAMES:
            raise InfeasibleScript(f"{what}: the ball needs {first_out + 1} frames to leave the pitch")
        return path[:last + 1], first_out

    def boundary_event(self, path: np.ndarray, first_out: int, scorer: int) -> Tuple[str, dict]:
        prev, cur = (path[first_out - 1] if first_out else None), path[first_out]
        line = self.geometry.target_line_x(self.attacking)
        if prev is not None and (prev[0] - line) * (cur[0] - line) <= 0 and cur[0] != prev[0]:
            y = prev[1] + (cur[1] - prev[1]) * (line - prev[0]) / (cur[0] - prev[0])
            if self.geometry.in_goal_mouth(y) and not self.geometry.in_pitch(*cur):
                return "Goal", {"Scorer": scorer}
        return "BallOut", {"OutObject": BALL_ID}

    # scripts

    def _start(self, placed: Dict[int, np.ndarray]) -> _Choreography:
        start = _parking(self.geometry)
        start.update(placed)
        return _Choreography(self.roster, start)

    def _shoot(self, c: _Choreography, shooter: int, origin: np.ndarray, direction: np.ndarray) -> None:
        c.kick(shooter)
        path, first_out = self.exit_flight(origin, direction, self.spec.v0, "shot")
        self._check_strike(self.spec.v0, first_out + 1, "shot")
        kick = c.now
        c.glide({BALL_ID: path})
        event_type, roles = self.boundary_event(path, first_out, shooter)
        c.record(event_type, roles, kick + first_out + 1)

    def script_pass(self) -> _Choreography:
        kind = self.spec.kind
        kicker, receiver = self.actor("kicker"), self.actor("receiver")
        k_pos, r_nominal = self.placement("kicker"), self.placement("receiver")
        direction = _unit(r_nominal - k_pos)
        ball = k_pos + direction * OFFSET
        distance = float(np.linalg.norm(r_nominal - k_pos)) - 2 * OFFSET
        covered, _ = self.trap_flight(distance, self.spec.v0, "pass")
        arrival = ball + direction * covered[-1]
        r_pos = arrival + direction * OFFSET

        placed = {kicker: k_pos, receiver: r_pos, BALL_ID: ball}
        for role in ("defender", "keeper"):
            if role in self.spec.placements or role in default_placements(self.spec):
                placed[self.actor(role)] = self.placement(role)
        c = self._start(placed)
        c.control(kicker)
        c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)
        c.kick(kicker)
        c.glide({BALL_ID: ball[None, :] + covered[:, None] * direction[None, :]})
        c.control(receiver)

        if kind.endswith("ThenGoal"):
            shot = _unit(self.aim(detection_pipeline.SCENARIO_SHOT_AIM) - arrival)
            steps = detection_pipeline.SCENARIO_STEP_FRAMES
            stance = arrival - shot * OFFSET
            c.release()
            c.glide({receiver: _walk(r_pos, stance, steps)})
            c.control(receiver)
            c.hold(detection_pipeline.SCENARIO_SHOT_DELAY_FRAMES - steps)
            self._shoot(c, receiver, arrival, shot)
        return c

    def script_shot(self) -> _Choreography:
        shooter = self.actor("shooter")
        s_pos = self.placement("shooter")
        direction = _unit(self.aim(detection_pipeline.SCENARIO_SHOT_AIM) - s_pos)
        ball = s_pos + direction * OFFSET
        placed = {shooter: s_pos, BALL_ID: ball}
        outcome = self.spec.outcome

        if outcome == "Goal":
            placed[self.actor("keeper")] = self.placement("keeper")
            c = self._start(placed)
            c.control(shooter)
            c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)
            self._shoot(c, shooter, ball, direction)
            return c

        stopper = self.actor("keeper") if outcome == "Saved" else self.actor("defender")
        nominal = self.placement("keeper" if outcome == "Saved" else "defender")
        if outcome == "Out":
            placed[self.actor("keeper")] = self.placement("keeper")
        contact = float(np.dot(nominal - ball, direction))
        if outcome == "Saved" and self.spec.save_style == "catch":
            covered, _ = self.trap_flight(contact - OFFSET, self.spec.v0, "shot")
            arrival = ball + direction * covered[-1]
            placed[stopper] = arrival + direction * OFFSET
            c = self._start(placed)
            c.control(shooter)
            c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)
            c.kick(shooter)
            c.glide({BALL_ID: ball[None, :] + covered[:, None] * direction[None, :]})
            c.control(stopper)
            return c

        covered, speed = self.trap_flight(contact, self.spec.v0, "shot")
        touch = ball + direction * covered[-1]
        if outcome == "Saved":
            rebound = _rotate(-direction, detection_pipeline.SCENARIO_PARRY_ANGLE_DEG)
        else:
            rebound = _unit(self.aim(detection_pipeline.SCENARIO_WIDE_AIM) - touch)
        normal = np.array([-direction[1], direction[0]])
        if np.dot(normal, rebound) < 0:
            normal = -normal
        placed[stopper] = touch - normal * OFFSET
        retained = speed * detection_pipeline.SCENARIO_DEFLECTION_RETENTION

        c = self._start(placed)
        c.control(shooter)
        c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)
        c.kick(shooter)
        c.glide({BALL_ID: ball[None, :] + covered[:, None] * direction[None, :]})
        c.record("BallDeflection", {"DeflectingPlayer": stopper, "DeflectedObject": BALL_ID})
        if outcome == "Out":
            path, first_out = self.exit_flight(touch, rebound, retained, "deflection")
            self._check_strike(retained, first_out + 1, "deflection")
            touched = c.now
            c.glide({BALL_ID: path})
            event_type, roles = self.boundary_event(path, first_out, shooter)
            if event_type != "BallOut":
                raise InfeasibleScript("the deflected shot still goes in")
            c.record(event_type, roles, touched + first_out + 1)
        else:
            rolled = rolling_distances(retained, self.spec.mu, self.fps)
            self._check_strike(retained, len(rolled), "parry")
            c.glide({BALL_ID: touch[None, :] + rolled[:, None] * rebound[None, :]})
        return c

    def script_tackle(self) -> _Choreography:
        """
        The tackler walks up to the contest distance from the possessor and both hold
        the duel. Won: the tackler pokes the ball past the possessor's reach, steps
        after it and keeps it while the possessor backs off. Lost: the tackler backs off.
        """
        possessor, tackler = self.actor("possessor"), self.actor("tackler")
        p_pos, q_start = self.placement("possessor"), self.placement("tackler")
        direction = _unit(q_start - p_pos)
        ball = p_pos + direction * OFFSET
        contest = p_pos + direction * detection_pipeline.SCENARIO_CONTEST_DISTANCE_M
        if float(np.dot(q_start - contest, direction)) <= 0:
            raise InfeasibleScript("the tackler starts inside the contest distance")
        c = self._start({possessor: p_pos, tackler: q_start, BALL_ID: ball})
        c.control(possessor)
        c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)

        approach = float(np.linalg.norm(contest - q_start)) / detection_pipeline.SCENARIO_CHALLENGE_SPEED_MPS
        c.glide({tackler: _walk(q_start, contest, int(math.ceil(approach * self.fps)))})
        c.hold(detection_pipeline.SCENARIO_CONTEST_FRAMES)
        back_off = RETREAT_FRAMES * detection_pipeline.SCENARIO_RETREAT_SPEED_MPS / self.fps
        if self.spec.outcome == "Won":
            c.release()
            poke = c.now + 1
            stance = contest + direction * detection_pipeline.SCENARIO_POKE_STEP_M
            c.glide({possessor: _walk(p_pos, p_pos - direction * back_off, RETREAT_FRAMES),
                     tackler: stance[None, :], BALL_ID: (stance + direction * OFFSET)[None, :]})
            c.control(tackler, poke)
        else:
            c.glide({tackler: _walk(contest, contest + direction * back_off, RETREAT_FRAMES)})
        return c

    def script_dribble(self) -> _Choreography:
        possessor = self.actor("possessor")
        start, target = self.placement("possessor"), self.placement("target")
        direction = _unit(target - start)
        c = self._start({possessor: start, BALL_ID: start + direction * OFFSET})
        c.control(possessor)
        c.hold(detection_pipeline.SCENARIO_LEAD_FRAMES)
        length = float(np.linalg.norm(target - start))
        path = _walk(start, target, int(math.ceil(length / detection_pipeline.SCENARIO_DRIBBLE_SPEED_MPS * self.fps)))
        c.glide({possessor: path, BALL_ID: path + direction * OFFSET})
        return c

    def choreograph(self) -> _Choreography:
        kind = self.spec.kind
        if kind == "Tackle":
            c = self.script_tackle()
        elif kind == "Shot":
            c = self.script_shot()
        elif kind == "Dribble":
            c = self.script_dribble()
        else:
            c = self.script_pass()
        c.hold(detection_pipeline.SCENARIO_TAIL_FRAMES)
        return c

    def initiate_scenario_generation(self) -> Tuple[Trace, EventLog]:
        try:
            c = self.choreograph()
            trace = Trace(c.positions(), self.roster, self.fps, self.geometry)
            log = label_ground_truth(trace, c.atoms, c.spells, INTENT[_key(self.spec)], self.params,
                                     _key(self.spec))
            logging.debug(f"Generated {_key(self.spec)} scenario of {len(trace)} frames with {len(log)} events")
            return trace, log
        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)


_SCRIPTED_TYPES = ("KickingTheBall", "BallDeflection", "BallOut", "Goal")


def control_labels(positions: np.ndarray, roster: Sequence[ObjectId], spells: Sequence[Spell],
                   params: Optional[RuleParameterSet] = None) -> List[Tuple[int, str, dict]]:
    """
    Possession and tackle atoms of the control spells of a script.

    A spell ``(holder, first, last)`` keeps the ball at the holder's feet from
    ``first`` through ``last``, or to the end when ``last`` is None. An anchor whose
    rule window fits inside a spell is a BallPossession when every opponent stays at
    least the outer distance away from the holder over the window, and a Tackle by
    the opponent nearest the holder when one stays closer. An anchor labelled both
    ways keeps the type earlier in the evaluation order.
    """
    params = params or RuleParameterSet.reference()
    columns = {obj.id: col for col, obj in enumerate(roster)}
    teams = {obj.id: obj.team for obj in roster}
    ball = next(obj.id for obj in roster if obj.is_ball)
    n_frames = len(positions)
    k_possession, k_tackle = params.possession.window, params.tackle.window
    labels: List[Tuple[int, str, dict]] = []
    for holder, first, last in spells:
        last = n_frames - 1 if last is None else min(last, n_frames - 1)
        if last < first:
            continue
        block = positions[first:last + 1]
        rivals = [obj.id for obj in roster if not obj.is_ball and obj.team is not teams[holder]]
        if rivals:
            gaps = np.linalg.norm(block[:, [columns[r] for r in rivals]] - block[:, columns[holder]][:, None, :],
                                  axis=2)
            separation, nearest = gaps.min(axis=1), np.array(rivals)[gaps.argmin(axis=1)]
        else:
            separation, nearest = np.full(len(block), np.inf), np.zeros(len(block), dtype=int)

        possession = [t for t in range(first, last - k_possession + 1)
                      if np.all(separation[t - first:t - first + k_possession + 1]
                                >= params.possession.outer_distance)]
        tackles = [t for t in range(first, last - k_tackle + 1)
                   if np.all(separation[t - first:t - first + k_tackle + 1] < params.tackle.outer_distance)]
        if params.precedes("BallPossession", "Tackle"):
            tackles = sorted(set(tackles) - set(possession))
        else:
            possession = sorted(set(possession) - set(tackles))
        labels += [(t, "BallPossession", {"PossessingPlayer": holder, "PossessedObject": ball}) for t in possession]
        labels += [(t, "Tackle", {"PossessingPlayer": holder, "TacklingPlayer": int(nearest[t - first]),
                                  "PossessedObject": ball}) for t in tackles]
    return labels


def label_ground_truth(trace: Trace, scripted: Sequence[Tuple[int, str, dict]], spells: Sequence[Spell],
                       intent: set, params: Optional[RuleParameterSet] = None, name: str = "script") -> EventLog:
    """
    Ground truth of a clean trace: the scripted strikes and boundary events, the
    possession and tackle atoms of the control spells, and the complex events of
    the reference rules.

    Raises:
        InfeasibleScript: If the reference detector does not see exactly the scripted
            strikes and boundary events, or the complex event types differ from ``intent``.
    """
    params = params or RuleParameterSet.reference()
    detected = detect_atomic(trace, params)

    def signature(frame, event_type, roles):
        return frame, event_type, tuple(sorted(roles.items()))

    want = sorted(signature(*atom) for atom in scripted)
    got = sorted(signature(e.t, e.event_type, e.roles) for e in detected if e.event_type in _SCRIPTED_TYPES)
    if want != got:
        raise InfeasibleScript(f"{name}: scripted atoms {want} but the reference detector reads {got}")

    labelled = list(scripted) + control_labels(trace.positions, trace.roster, spells, params)
    atoms = sorted((AtomicEvent("", event_type, frame, dict(roles)) for frame, event_type, roles in labelled),
                   key=AtomicEvent.sort_key)
    atoms = [AtomicEvent(f"a{i}", e.event_type, e.t, e.roles) for i, e in enumerate(atoms)]
    complexes = reference_complex(atoms, trace)
    produced = {e.event_type for e in complexes}
    if produced != set(intent):
        raise InfeasibleScript(f"{name}: expected complex events {sorted(intent)}, the script yields "
                               f"{sorted(produced)}")
    return EventLog(tuple(atoms), tuple(complexes))


def generate_scenario(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None,
                      params: Optional[RuleParameterSet] = None) -> Tuple[Trace, EventLog]:
    """
    Clean trace and exact ground truth of one scenario, starting at frame 0.

    Args:
        spec (ScenarioSpec): The script.
        rng (np.random.Generator, optional): Jitters default placements; seeded from
            ``spec.seed`` when omitted.
        params (RuleParameterSet, optional): Reference thresholds; the shipped ones by default.

    Raises:
        InfeasibleScript: If the ball cannot perform the script, or the result would be ambiguous.
    """
    return ScenarioGenerator(spec, rng, params).initiate_scenario_generation()


def generate_match(script: Sequence[ScenarioSpec], rng: Optional[np.random.Generator] = None,
                   params: Optional[RuleParameterSet] = None) -> Tuple[Trace, EventLog]:
    """
    Scenarios laid out on one timeline at their offsets. Between scenarios every
    object stays where the previous one left it; each scenario then starts from its
    own positions. Ground truth is labelled over the whole match.

    Raises:
        OverlappingScenarios: If a scenario starts before the previous one ends.
    """
    try:
        roster = scenario_roster()
        if not script:
            return Trace(np.zeros((0, len(roster), 2)), roster), EventLog()
        order = sorted(range(len(script)), key=lambda i: script[i].offset)
        pieces = []
        for i in order:
            spec = script[i]
            generator = ScenarioGenerator(spec, rng if rng is not None else np.random.default_rng(spec.seed), params)
            pieces.append((i, spec, generator.choreograph()))

        for (i, a, first), (j, b, _) in zip(pieces, pieces[1:]):
            if b.offset <= a.offset + len(first.frames) - 1:
                raise OverlappingScenarios(i, j)

        frames, scripted, spells, intent = [], [], [], set()
        for _, spec, c in pieces:
            filler = spec.offset - len(frames)
            hold = frames[-1] if frames else c.frames[0]
            if spells and spells[-1][2] is None:
                spells[-1][2] = spec.offset - 1
            lead = 0 if not frames else spec.offset
            frames.extend([hold] * filler)
            frames.extend(c.frames)
            scripted.extend((frame + spec.offset, event_type, roles) for frame, event_type, roles in c.atoms)
            # the holder at the start of the first scenario also holds through the leading filler
            spells.extend([holder, lead if start == 0 else start + spec.offset,
                           None if last is None else last + spec.offset] for holder, start, last in c.spells)
            intent |= INTENT[_key(spec)]

        trace = Trace(np.stack(frames), roster)
        log = label_ground_truth(trace, scripted, spells, intent, params, "match")
        logging.info(f"Generated match of {len(script)} scenarios, {len(trace)} frames, "
                     f"{len(log.atomic)} atomic and {len(log.complex)} complex events")
        return trace, renumber(log)

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def add_noise(trace: Trace, noise: NoiseSpec, rng: Optional[np.random.Generator] = None) -> Trace:
    """
    Gaussian jitter on every coordinate, then lost rows re-filled by linear
    interpolation between their neighbours. Ground truth is not affected.
    """
    if noise.sigma == 0 and noise.dropout == 0:
        return trace
    rng = rng if rng is not None else np.random.default_rng()
    positions = np.array(trace.positions, dtype=float)
    if noise.sigma > 0:
        positions = positions + rng.normal(0.0, noise.sigma, positions.shape)
    if noise.dropout > 0 and len(positions) > 1:
        lost = rng.random(len(positions)) < noise.dropout
        if lost.all():
            lost[0] = False
        n_frames, n_objects, _ = positions.shape
        table = pd.DataFrame(positions.reshape(n_frames, n_objects * 2))
        table.loc[lost] = np.nan
        table = table.interpolate(method="linear", limit_direction="both")
        positions = table.to_numpy().reshape(n_frames, n_objects, 2)
    return trace.with_positions(positions)


def scenario_suite(count: int, seed: int = detection_pipeline.OPTIMIZER_SEED) -> List[ScenarioSpec]:
    """
    ``count`` scenario scripts cycling through every kind and outcome, with kick
    speed, friction and attacking team drawn from a seeded stream.
    """
    rng = np.random.default_rng(seed)
    variants = [key.split(":") for key in INTENT]
    specs = []
    for n in range(count):
        kind, *outcome = variants[n % len(variants)]
        specs.append(ScenarioSpec(
            kind=kind,
            outcome=outcome[0] if outcome else None,
            v0=round(float(rng.uniform(14.0, 17.0)), 2),
            mu=round(float(rng.uniform(2.0, 3.0)), 2),
            team=str(rng.choice(["home", "away"])),
            save_style=str(rng.choice(["parry", "catch"])),
            seed=int(rng.integers(2 ** 31)),
        ))
    return specs
