"""
Hand-written versions of the shipped complex rules.

They follow the same matching policy as the rule interpreter (every anchor event
pairs with the first qualifying later event) and serve as its differential oracle,
and as the labeller of complex ground truth in generated scenarios.
"""
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from soccerevents.components.complex_detector import merge_possession
from soccerevents.components.feature_extraction import expected_cross_y
from soccerevents.constant import detection_pipeline
from soccerevents.entity.trace_entity import AtomicEvent, IntervalEvent, Team, Trace

Event = Union[AtomicEvent, IntervalEvent]

PASS_GAP = detection_pipeline.COMPLEX_PASS_MAX_GAP_FRAMES
GOAL_GAP = detection_pipeline.COMPLEX_GOAL_CHAIN_GAP_FRAMES
TACKLE_GAP = detection_pipeline.COMPLEX_TACKLE_END_GAP_FRAMES
SAVE_GAP = detection_pipeline.COMPLEX_SAVE_GAP_FRAMES


def _ordered(events: Iterable[Event]) -> List[Event]:
    return sorted(events, key=lambda e: (e.start, e.end))


def _first_after(stream: Sequence[Event], after: int, gap: int, accept: Callable[[Event], bool]) -> Optional[Event]:
    for event in stream:
        if event.start < after:
            continue
        if event.start - after > gap:
            return None
        if accept(event):
            return event
    return None


def _atoms(*events: Event) -> Tuple[str, ...]:
    ids: List[str] = []
    for event in events:
        for atom_id in ((event.id,) if isinstance(event, AtomicEvent) else event.sub_events):
            if atom_id not in ids:
                ids.append(atom_id)
    return tuple(ids)


class ReferenceRules:
    def __init__(self, trace: Trace, merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES):
        self.trace = trace
        self.geometry = trace.geometry
        self.merge_gap = merge_gap

    def team(self, object_id: int) -> Team:
        return self.trace.object(object_id).team

    def at(self, object_id: int, frame: int) -> np.ndarray:
        frame = min(max(frame, self.trace.start_frame), self.trace.end_frame)
        return self.trace.position(object_id, frame)

    def passes(self, kicks, possessions) -> List[IntervalEvent]:
        out = []
        for k in kicks:
            kicker = k.roles["KickingPlayer"]
            p = _first_after(possessions, k.end, PASS_GAP,
                             lambda e: e.roles["PossessingPlayer"] != kicker
                             and self.team(e.roles["PossessingPlayer"]) == self.team(kicker))
            if p is not None:
                out.append(IntervalEvent(f"pass{len(out)}", "Pass", k.start, p.end,
                                         {"KickingPlayer": kicker, "ReceivingPlayer": p.roles["PossessingPlayer"]},
                                         _atoms(k, p), {"KickingPlayer": k.t, "ReceivingPlayer": p.t}))
        return out

    def _pass_like(self, passes, event_type: str, accept) -> List[IntervalEvent]:
        return [IntervalEvent(f"{event_type}{i}", event_type, p.start, p.end, dict(p.roles), p.sub_events,
                              dict(p.role_frames))
                for i, p in enumerate(x for x in passes if accept(x))]

    def is_cross(self, p: IntervalEvent) -> bool:
        kicker, receiver = p.roles["KickingPlayer"], p.roles["ReceivingPlayer"]
        kx, ky = self.at(kicker, p.role_frame("KickingPlayer"))
        rx, ry = self.at(receiver, p.role_frame("ReceivingPlayer"))
        return (self.geometry.in_sideline_band(ky) and self.geometry.in_attacking_third(kx, self.team(kicker))
                and self.geometry.in_goal_area(rx, ry, self.team(receiver)))

    def is_filtering(self, p: IntervalEvent) -> bool:
        receiver = self.trace.object(p.roles["ReceivingPlayer"])
        goal = np.array(self.geometry.goal_center(receiver.team))
        own = np.linalg.norm(self.at(receiver.id, p.start) - goal)
        return all(own < np.linalg.norm(self.at(o.id, p.start) - goal)
                   for o in self.trace.players if o.team is receiver.team.opponent() and not o.is_goalkeeper)

    def then_goal(self, chains, goals, event_type: str, scorer_role: str) -> List[IntervalEvent]:
        out = []
        for x in chains:
            g = _first_after(goals, x.end, GOAL_GAP, lambda e: e.roles.get("Scorer") == x.roles[scorer_role])
            if g is not None:
                out.append(IntervalEvent(f"{event_type}{len(out)}", event_type, x.start, g.end, dict(x.roles),
                                         _atoms(x, g), dict(x.role_frames)))
        return out

    def tackles(self, tackle_spells, possession_spells) -> List[IntervalEvent]:
        out = []
        for t in tackle_spells:
            p = _first_after(possession_spells, t.end, TACKLE_GAP, lambda e: True)
            if p is not None:
                out.append(IntervalEvent(f"tackle{len(out)}", "Tackle", t.start, p.end,
                                         {"PossessingPlayer": t.roles["PossessingPlayer"],
                                          "TacklingPlayer": t.roles["TacklingPlayer"],
                                          "WinningPlayer": p.roles["PossessingPlayer"]},
                                         _atoms(t, p),
                                         {"PossessingPlayer": t.start, "TacklingPlayer": t.start,
                                          "WinningPlayer": p.start}))
        return out

    def aims_at_goal(self, kick: AtomicEvent) -> bool:
        team = self.team(kick.roles["KickingPlayer"])
        ball = kick.roles["KickedObject"]
        frame = min(max(kick.t, self.trace.start_frame), self.trace.end_frame)
        nxt = min(frame + 1, self.trace.end_frame)
        if nxt - 1 < self.trace.start_frame:
            return False
        x, y = self.trace.position(ball, frame)
        vx, vy = (self.trace.position(ball, nxt) - self.trace.position(ball, nxt - 1)) * self.trace.fps
        crossing = expected_cross_y(x, y, vx, vy, self.geometry.target_line_x(team))
        return crossing is not None and self.geometry.in_goal_mouth(crossing)

    def shot_follow_ups(self, shots, outs, goals, deflections, possessions) -> Dict[str, List[IntervalEvent]]:
        shot_out, shot_goal, saved = [], [], []
        for s in shots:
            shooter = s.roles["ShootingPlayer"]
            roles, frames = {"ShootingPlayer": shooter}, {"ShootingPlayer": s.role_frame("ShootingPlayer")}
            o = _first_after(outs, s.end, GOAL_GAP,
                             lambda e: self.geometry.behind_goal_line(self.at(e.roles["OutObject"], e.t)[0],
                                                                      self.team(shooter)))
            if o is not None:
                shot_out.append(IntervalEvent(f"so{len(shot_out)}", "ShotOut", s.start, o.end, dict(roles),
                                              _atoms(s, o), dict(frames)))
            g = _first_after(goals, s.end, GOAL_GAP, lambda e: e.roles.get("Scorer") == shooter)
            if g is not None:
                shot_goal.append(IntervalEvent(f"sg{len(shot_goal)}", "ShotThenGoal", s.start, g.end, dict(roles),
                                               _atoms(s, g), dict(frames)))
            stops = _ordered(list(deflections) + list(possessions))
            r = _first_after(stops, s.end, SAVE_GAP, lambda e: self.is_keeper_stop(e, shooter))
            if r is not None:
                saved.append(IntervalEvent(f"ss{len(saved)}", "SavedShot", s.start, r.end, dict(roles),
                                           _atoms(s, r), dict(frames)))
        return {"ShotOut": shot_out, "ShotThenGoal": shot_goal, "SavedShot": saved}

    def is_keeper_stop(self, event: AtomicEvent, shooter: int) -> bool:
        role = "DeflectingPlayer" if event.event_type == "BallDeflection" else "PossessingPlayer"
        keeper = self.trace.object(event.roles[role])
        return keeper.is_goalkeeper and keeper.team is not self.team(shooter)

    def initiate(self, atomics: Sequence[AtomicEvent]) -> List[IntervalEvent]:
        of_type = {name: _ordered(a for a in atomics if a.event_type == name)
                   for name in detection_pipeline.ATOMIC_EVENT_TYPES}
        spells = merge_possession(atomics, self.merge_gap)
        possession_spells = _ordered(s for s in spells if s.event_type == "BallPossession")
        tackle_spells = _ordered(s for s in spells if s.event_type == "Tackle")

        passes = self.passes(of_type["KickingTheBall"], of_type["BallPossession"])
        crosses = self._pass_like(passes, "Cross", self.is_cross)
        filtering = self._pass_like(passes, "FilteringPass", self.is_filtering)
        tackles = self.tackles(tackle_spells, possession_spells)
        won = [IntervalEvent(f"won{i}", "WonTackle", t.start, t.end, dict(t.roles), t.sub_events,
                             dict(t.role_frames))
               for i, t in enumerate(x for x in tackles
                                     if self.team(x.roles["WinningPlayer"]) == self.team(x.roles["TacklingPlayer"]))]
        lost = [IntervalEvent(f"lost{i}", "LostTackle", t.start, t.end, dict(t.roles), t.sub_events,
                              dict(t.role_frames))
                for i, t in enumerate(x for x in tackles
                                      if self.team(x.roles["WinningPlayer"]) != self.team(x.roles["TacklingPlayer"]))]
        shots = [IntervalEvent(f"shot{i}", "Shot", k.t, k.t, {"ShootingPlayer": k.roles["KickingPlayer"]},
                               (k.id,), {"ShootingPlayer": k.t})
                 for i, k in enumerate(x for x in of_type["KickingTheBall"] if self.aims_at_goal(x))]
        follow_ups = self.shot_follow_ups(shots, of_type["BallOut"], of_type["Goal"],
                                          of_type["BallDeflection"], of_type["BallPossession"])

        events = (possession_spells + passes + crosses + filtering
                  + self.then_goal(passes, of_type["Goal"], "PassThenGoal", "ReceivingPlayer")
                  + self.then_goal(_ordered(crosses), of_type["Goal"], "CrossThenGoal", "ReceivingPlayer")
                  + self.then_goal(_ordered(filtering), of_type["Goal"], "FilteringPassThenGoal", "ReceivingPlayer")
                  + tackles + won + lost + shots
                  + follow_ups["ShotOut"] + follow_ups["ShotThenGoal"] + follow_ups["SavedShot"])
        events.sort(key=IntervalEvent.sort_key)
        return [IntervalEvent(f"c{i}", e.event_type, e.start, e.end, e.roles, e.sub_events, e.role_frames)
                for i, e in enumerate(events)]


def reference_complex(atomics: Sequence[AtomicEvent], trace: Trace,
                      merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES) -> List[IntervalEvent]:
    """Complex events of the shipped rules, computed without the rule language."""
    return ReferenceRules(trace, merge_gap).initiate(atomics)
