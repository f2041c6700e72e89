import bisect
import heapq
import sys
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from soccerevents.components.feature_extraction import expected_cross_y
from soccerevents.constant import detection_pipeline
from soccerevents.dsl import rule_ast as ast
from soccerevents.dsl.compiler import ATOMIC_LEVEL, COMPLEX_LEVEL, MERGED_LEVEL, CompiledRule, CompiledRuleSet
from soccerevents.entity.artifact_entity import DurationSummary
from soccerevents.entity.trace_entity import AtomicEvent, IntervalEvent, SampledTrace, Team, Trace
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging

Event = Union[AtomicEvent, IntervalEvent]

## a whole trace, or the frames the stream kept around each atomic event
Positions = Union[Trace, SampledTrace]

_MERGE_KEYS = {
    "BallPossession": ("PossessingPlayer",),
    "Tackle": ("PossessingPlayer", "TacklingPlayer"),
}


def merge_possession(atomics: Sequence[AtomicEvent],
                     merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES) -> List[IntervalEvent]:
    """
    Spells of consecutive BallPossession atoms of one player, and of Tackle atoms of
    one (possessor, tackler) pair. Atoms of the same type by other players end a
    spell; up to ``merge_gap`` frames without an atom are bridged.

    Returns:
        list: IntervalEvents of type BallPossession (role PossessingPlayer) and Tackle
        (roles PossessingPlayer, TacklingPlayer) whose sub_events are the atom ids.
    """
    spells: List[IntervalEvent] = []
    for event_type, keys in _MERGE_KEYS.items():
        run: List[AtomicEvent] = []
        run_key = None

        def close():
            if run:
                roles = {k: run[0].roles[k] for k in keys}
                spells.append(IntervalEvent(f"{event_type[0].lower()}{len(spells)}", event_type,
                                            run[0].t, run[-1].t, roles, tuple(a.id for a in run)))

        for atom in sorted((a for a in atomics if a.event_type == event_type), key=lambda a: a.t):
            key = tuple(atom.roles.get(k) for k in keys)
            if run and key == run_key and atom.t - run[-1].t - 1 <= merge_gap:
                run.append(atom)
                continue
            close()
            run, run_key = [atom], key
        close()
    return sorted(spells, key=IntervalEvent.sort_key)


def seq_match(e1: Event, e2: Event, max_gap: Optional[int]) -> Optional[Tuple[int, int]]:
    """``(start(e1), end(e2))`` when e2 starts at or after the end of e1, at most ``max_gap`` frames later."""
    if e1.end > e2.start:
        return None
    if max_gap is not None and e2.start - e1.end > max_gap:
        return None
    return e1.start, e2.end


class Match:
    """A candidate instance of a pattern: its interval, alias bindings and matched events."""

    __slots__ = ("start", "end", "bindings", "events")

    def __init__(self, start: int, end: int, bindings: Dict[str, Event], events: Tuple[Event, ...]):
        self.start = start
        self.end = end
        self.bindings = bindings
        self.events = events

    def join(self, other: "Match") -> "Match":
        bindings = dict(self.bindings)
        bindings.update(other.bindings)
        return Match(min(self.start, other.start), max(self.end, other.end), bindings, self.events + other.events)


@dataclass(frozen=True)
class RoleValue:
    """Object bound to a role, with the frame at which it was observed."""
    object_id: int
    frame: int


class EventStream:
    def __init__(self, events: Iterable[Event]):
        self.events = sorted(events, key=lambda e: (e.start, e.end))
        self.starts = [e.start for e in self.events]

    def from_frame(self, after: Optional[int], max_gap: Optional[int]) -> Iterator[Event]:
        i = 0 if after is None else bisect.bisect_left(self.starts, after)
        while i < len(self.events):
            event = self.events[i]
            if after is not None and max_gap is not None and event.start - after > max_gap:
                return
            yield event
            i += 1


class ConditionEvaluator:
    """
    Evaluates ``where`` expressions over a match. A reference to an alias the match
    did not bind (the untaken branch of an ``or``), or to a role the event left
    unbound, makes the comparison or predicate using it false.
    """

    def __init__(self, trace: Optional[Positions]):
        self.trace = trace

    def _require_trace(self, what: str) -> Positions:
        if self.trace is None:
            raise SoccerEventsException(f"{what} needs the positional trace")
        return self.trace

    def _frame(self, frame: int) -> int:
        trace = self._require_trace("a spatial predicate")
        return min(max(frame, trace.start_frame), trace.end_frame)

    def position(self, value: RoleValue) -> np.ndarray:
        trace = self._require_trace("a spatial predicate")
        return trace.position(value.object_id, self._frame(value.frame))

    def team(self, value: RoleValue) -> Team:
        return self._require_trace("team()").object(value.object_id).team

    def value(self, node, match: Match):
        if isinstance(node, ast.Number):
            return node.value
        if isinstance(node, ast.ZoneName):
            return node.name
        if isinstance(node, ast.RoleRef):
            event = match.bindings.get(node.alias)
            if event is None:
                return None
            if node.attribute == "start":
                return event.start
            if node.attribute == "end":
                return event.end
            object_id = event.roles.get(node.attribute)
            if object_id is None:
                return None
            frame = event.t if isinstance(event, AtomicEvent) else event.role_frame(node.attribute)
            return RoleValue(int(object_id), frame)
        if isinstance(node, ast.Call):
            args = [self.value(arg, match) for arg in node.args]
            if any(arg is None for arg in args):
                return False if node.name in ast.PREDICATES else None
            return getattr(self, f"call_{node.name}")(*args)
        return self.holds(node, match)

    def holds(self, node, match: Match) -> bool:
        if isinstance(node, ast.Not):
            return not self.holds(node.operand, match)
        if isinstance(node, ast.BoolOp):
            if node.op == "and":
                return all(self.holds(operand, match) for operand in node.operands)
            return any(self.holds(operand, match) for operand in node.operands)
        if isinstance(node, ast.Comparison):
            left, right = self.value(node.left, match), self.value(node.right, match)
            if left is None or right is None:
                return False
            if isinstance(left, RoleValue):
                left = left.object_id
            if isinstance(right, RoleValue):
                right = right.object_id
            return {
                "==": lambda a, b: a == b,
                "!=": lambda a, b: a != b,
                "<": lambda a, b: a < b,
                "<=": lambda a, b: a <= b,
                ">": lambda a, b: a > b,
                ">=": lambda a, b: a >= b,
            }[node.op](left, right)
        return bool(self.value(node, match))

    def call_team(self, obj: RoleValue) -> Team:
        return self.team(obj)

    def call_distance(self, a: RoleValue, b: RoleValue) -> float:
        return float(np.linalg.norm(self.position(a) - self.position(b)))

    def call_is_goalkeeper(self, obj: RoleValue) -> bool:
        return self._require_trace("is_goalkeeper()").object(obj.object_id).is_goalkeeper

    def call_zone(self, obj: RoleValue, zone: str, attacker: Optional[RoleValue] = None) -> bool:
        team = self.team(attacker if attacker is not None else obj)
        if team is Team.NONE:
            return False
        x, y = self.position(obj)
        geometry = self.trace.geometry
        if zone == "sideline_band":
            return geometry.in_sideline_band(y)
        if zone == "attacking_third":
            return geometry.in_attacking_third(x, team)
        if zone == "goal_area":
            return geometry.in_goal_area(x, y, team)
        return geometry.behind_goal_line(x, team)

    def call_nearest_to_goal_among_opponents(self, obj: RoleValue, frame: float) -> bool:
        trace = self._require_trace("nearest_to_goal_among_opponents()")
        player = trace.object(obj.object_id)
        if player.team is Team.NONE:
            return False
        at = RoleValue(obj.object_id, int(frame))
        goal = np.array(trace.geometry.goal_center(player.team))
        own = np.linalg.norm(self.position(at) - goal)
        opponents = [p for p in trace.players if p.team is player.team.opponent() and not p.is_goalkeeper]
        return all(own < np.linalg.norm(self.position(RoleValue(p.id, int(frame))) - goal) for p in opponents)

    def call_aims_at_goal(self, ball: RoleValue, shooter: RoleValue) -> bool:
        trace = self._require_trace("aims_at_goal()")
        team = self.team(shooter)
        if team is Team.NONE:
            return False
        frame = self._frame(ball.frame)
        nxt = frame + 1 if frame < trace.end_frame else frame
        prev = nxt - 1
        if prev < trace.start_frame:
            return False
        x, y = trace.position(ball.object_id, frame)
        vx, vy = (trace.position(ball.object_id, nxt) - trace.position(ball.object_id, prev)) * trace.fps
        crossing = expected_cross_y(x, y, vx, vy, trace.geometry.target_line_x(team))
        return crossing is not None and trace.geometry.in_goal_mouth(crossing)


class ComplexDetector:
    """
    Interprets a compiled rule set over atomic events.

    Rules run in dependency order; each rule reads atom streams, the merged
    possession and tackle spells, and the outputs of the rules before it. A
    pattern instance is anchored on its first matched event: every anchor yields
    at most one instance, the first one (in order of the later operands' start
    frames) that satisfies the duration bounds and the condition.
    """

    def __init__(self, rules: CompiledRuleSet, trace: Optional[Positions] = None,
                 merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES):
        self.rules = rules
        self.trace = trace
        self.merge_gap = merge_gap
        self.evaluator = ConditionEvaluator(trace)
        self.streams: Dict[Tuple[str, str], EventStream] = {}
        self._operands: Dict[int, Tuple[str, str]] = {}
        self._materialized: Dict[int, List[Match]] = {}

    def candidates(self, node, after: Optional[int], max_gap: Optional[int]) -> Iterator[Match]:
        if isinstance(node, ast.EventRef):
            key = self._operands[id(node)]
            for event in self.streams[key].from_frame(after, max_gap):
                bindings = {node.alias: event} if node.alias is not None else {}
                yield Match(event.start, event.end, bindings, (event,))
        elif node.operator == "or":
            yield from heapq.merge(*(self.candidates(op, after, max_gap) for op in node.operands),
                                   key=lambda m: (m.start, m.end))
        elif node.operator == "seq":
            for first in self.candidates(node.operands[0], after, max_gap):
                yield from self._extend(node, 1, first)
        else:
            for first in self.candidates(node.operands[0], after, max_gap):
                yield from self._conjoin(node, 1, first, first)

    def _extend(self, node: ast.Pattern, index: int, acc: Match) -> Iterator[Match]:
        if index == len(node.operands):
            yield acc
            return
        for nxt in self.candidates(node.operands[index], acc.end, node.within):
            yield from self._extend(node, index + 1, acc.join(nxt))

    def _conjoin(self, node: ast.Pattern, index: int, first: Match, acc: Match) -> Iterator[Match]:
        if index == len(node.operands):
            yield acc
            return
        operand = node.operands[index]
        if id(operand) not in self._materialized:
            self._materialized[id(operand)] = list(self.candidates(operand, None, None))
        gap = node.within or 0
        for other in self._materialized[id(operand)]:
            if other.start - first.end > gap:
                break
            if first.start - other.end > gap:
                continue
            yield from self._conjoin(node, index + 1, first, acc.join(other))

    def _bind_operands(self, compiled: CompiledRule) -> None:
        for i, ref in enumerate(ast.event_refs(compiled.rule.pattern)):
            operand = compiled.operands[ref.alias if ref.alias is not None else f"#{i}"]
            self._operands[id(ref)] = (operand.level, operand.event_type)

    def evaluate_rule(self, compiled: CompiledRule) -> List[IntervalEvent]:
        self._bind_operands(compiled)
        self._materialized.clear()
        rule = compiled.rule
        produced: List[IntervalEvent] = []
        anchored = set()
        for match in self.candidates(rule.pattern, None, None):
            anchor = id(match.events[0])
            if anchor in anchored:
                continue
            if rule.lasting is not None and not rule.lasting[0] <= match.end - match.start <= rule.lasting[1]:
                continue
            if rule.where is not None and not self.evaluator.holds(rule.where, match):
                continue
            anchored.add(anchor)
            roles, role_frames = {}, {}
            for role, ref in rule.emit:
                value = self.evaluator.value(ref, match)
                if value is not None:
                    roles[role] = value.object_id
                    role_frames[role] = value.frame
            produced.append(IntervalEvent(f"{rule.name}{len(produced)}", rule.name, match.start, match.end,
                                          roles, _atom_ids(match.events), role_frames))
        return produced

    def initiate_complex_detection(self, atomics: Sequence[AtomicEvent]) -> List[IntervalEvent]:
        self.rules.check_order()
        by_type: Dict[str, List[Event]] = defaultdict(list)
        for atom in atomics:
            by_type[atom.event_type].append(atom)
        for event_type in detection_pipeline.ATOMIC_EVENT_TYPES:
            self.streams[(ATOMIC_LEVEL, event_type)] = EventStream(by_type.get(event_type, []))
        for event_type in by_type:
            self.streams.setdefault((ATOMIC_LEVEL, event_type), EventStream(by_type[event_type]))

        spells = merge_possession(atomics, self.merge_gap)
        for event_type in _MERGE_KEYS:
            self.streams[(MERGED_LEVEL, event_type)] = EventStream(s for s in spells if s.event_type == event_type)

        output: List[IntervalEvent] = [s for s in spells if s.event_type == "BallPossession"]
        for compiled in self.rules.rules:
            produced = self.evaluate_rule(compiled)
            self.streams[(COMPLEX_LEVEL, compiled.name)] = EventStream(produced)
            output.extend(produced)
            logging.debug(f"Rule {compiled.name} produced {len(produced)} events")

        output.sort(key=IntervalEvent.sort_key)
        return [IntervalEvent(f"c{i}", e.event_type, e.start, e.end, e.roles, e.sub_events, e.role_frames)
                for i, e in enumerate(output)]


def _atom_ids(events: Iterable[Event]) -> Tuple[str, ...]:
    ids: List[str] = []
    for event in events:
        for atom_id in ((event.id,) if isinstance(event, AtomicEvent) else event.sub_events):
            if atom_id not in ids:
                ids.append(atom_id)
    return tuple(ids)


def detect_complex(atomics: Sequence[AtomicEvent], rules: CompiledRuleSet, trace: Optional[Positions] = None,
                   merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES) -> List[IntervalEvent]:
    """
    Complex events of a match: the merged BallPossession spells plus every instance
    of every rule, sorted by interval, with ids ``c0, c1, ...``.

    Args:
        atomics (Sequence[AtomicEvent]): Time-sorted atomic events.
        rules (CompiledRuleSet): Compiled rules, e.g. the shipped ones.
        trace (Trace or SampledTrace, optional): Positions and roster, needed by team, goalkeeper
            and spatial predicates.
        merge_gap (int): Frames without an atom bridged inside a spell.

    Raises:
        CyclicRuleSet: If a rule consumes one that is not computed before it.
    """
    try:
        events = ComplexDetector(rules, trace, merge_gap).initiate_complex_detection(atomics)
        logging.info(f"Detected {len(events)} complex events from {len(atomics)} atomic events")
        return events
    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def duration_stats(events: Sequence[IntervalEvent],
                   fps: float = detection_pipeline.TRACE_FPS) -> List[DurationSummary]:
    """Minimum, mean and maximum duration per complex event type, in type order."""
    durations: Dict[str, List[int]] = defaultdict(list)
    for event in events:
        durations[event.event_type].append(event.duration)
    rank = {name: i for i, name in enumerate(detection_pipeline.COMPLEX_EVENT_TYPES)}
    return [
        DurationSummary(event_type, len(values), int(min(values)), float(np.mean(values)), int(max(values)), fps)
        for event_type, values in sorted(durations.items(), key=lambda item: (rank.get(item[0], len(rank)), item[0]))
    ]
