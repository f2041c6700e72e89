import collections
import sys
from typing import Deque, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from soccerevents.components.feature_extraction import TraceFeatures, smooth_positions
from soccerevents.constant import detection_pipeline
from soccerevents.entity.config_entity import DetectorConfig, RuleParameterSet, RuleThresholds
from soccerevents.entity.trace_entity import AtomicEvent, FieldGeometry, ObjectId, Team, Trace
from soccerevents.exception.exception import SoccerEventsException, WindowOutOfRange
from soccerevents.logging.logger import logging

## (frame, event type, roles) before ids are assigned
_Candidate = Tuple[int, str, dict]

_STRIKE_ROLES = {
    "KickingTheBall": ("KickingPlayer", "KickedObject"),
    "BallDeflection": ("DeflectingPlayer", "DeflectedObject"),
}


def _window_rows(features: TraceFeatures, rows: np.ndarray, window: int) -> np.ndarray:
    return rows[rows + window <= len(features) - 1]


def _gather(matrix: np.ndarray, rows: np.ndarray, cols: np.ndarray, span: int) -> np.ndarray:
    """``matrix[t + j, col]`` for every anchor row t and ``j in [0, span)``."""
    index = rows[:, None] + np.arange(span)[None, :]
    return matrix[index, cols[:, None]]


def _ball_strike(features: TraceFeatures, rows: np.ndarray, rule: RuleThresholds,
                 decelerating: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Shared clauses of kicking and deflection: the nearest player is within the inner
    distance at the anchor, the ball moves strictly away from that player over the
    window, the ball still travels faster than the speed threshold at the end of it,
    and the ball speed jumps (or drops, for deflections) inside the window.

    Returns the firing anchor rows, their players, the row of the largest speed
    change inside each window and the size of that change.
    """
    k = rule.window
    rows = _window_rows(features, rows, k)
    players = features.nearest[rows]
    gaps = _gather(features.ball_distance, rows, players, k + 1)
    fired = (gaps[:, 0] < rule.inner_distance) & np.all(np.diff(gaps, axis=1) > 0, axis=1)
    fired &= features.ball_speed[rows + k - 1] > rule.speed
    impulses = features.impulse[rows[:, None] + np.arange(k)[None, :]]
    change = -impulses if decelerating else impulses
    fired &= np.any(change > rule.acceleration, axis=1)
    peaks = np.argmax(change, axis=1)
    strength = change[np.arange(len(rows)), peaks]
    return rows[fired], players[fired], rows[fired] + peaks[fired], strength[fired]


def _ball_control(features: TraceFeatures, rows: np.ndarray, rule: RuleThresholds,
                  contested: bool, comoving: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Shared clauses of possession and tackle. The nearest player at the anchor stays
    within the inner distance for the whole window while the ball is slower than the
    speed threshold. A contested window has an opponent closer than the outer
    distance to that player at every frame; an uncontested one has none at any frame.
    The tackler is the opponent nearest the player at the anchor.
    """
    k = rule.window
    rows = _window_rows(features, rows, k)
    players = features.nearest[rows]
    gaps = _gather(features.ball_distance, rows, players, k + 1)
    fired = np.all(gaps < rule.inner_distance, axis=1)
    speeds = features.ball_speed[rows[:, None] + np.arange(k)[None, :]]
    fired &= np.all(speeds < rule.speed, axis=1)

    opponent_gaps = _gather(features.opponent_distance, rows, players, k + 1)
    if contested:
        fired &= np.all(opponent_gaps < rule.outer_distance, axis=1)
    else:
        fired &= np.all(opponent_gaps >= rule.outer_distance, axis=1)

    if comoving:
        moving_threshold = detection_pipeline.FEATURE_MOVING_SPEED_MPS
        player_moving = _gather(features.player_speed, rows, players, k) > moving_threshold
        fired &= np.all(player_moving == (speeds > moving_threshold), axis=1)

    tacklers = features.opponent_nearest[rows, players]
    return rows[fired], players[fired], tacklers[fired]


def _line_crossing(prev: np.ndarray, cur: np.ndarray, geometry: FieldGeometry) -> Optional[Team]:
    """Team scoring when the segment ``prev -> cur`` leaves the pitch through a goal mouth."""
    for team in (Team.HOME, Team.AWAY):
        line = geometry.target_line_x(team)
        outward = (prev[0] <= line < cur[0]) if team is Team.HOME else (prev[0] >= line > cur[0])
        if not outward:
            continue
        y = prev[1] + (cur[1] - prev[1]) * (line - prev[0]) / (cur[0] - prev[0])
        if geometry.in_goal_mouth(y):
            return team
    return None


class AtomicDetector:
    """
    Evaluates the atomic rules over blocks of consecutive frames.

    KickingTheBall and BallDeflection may fire at the same frame. BallPossession and
    Tackle share the nearest player as anchor; when both hold at a frame, only the one
    earlier in ``params.evaluation_order`` is kept. BallOut and Goal do not depend on
    the parameters.

    With a positive ``strike_radius`` every firing kick or deflection anchor becomes a
    candidate placed at the largest speed change of its window. Candidates wait in
    ``pending`` until no later anchor can beat them; a candidate survives when no
    candidate of the same type and player within the radius is stronger, earlier
    frames winning ties.

    Attributes:
        params (RuleParameterSet): Thresholds and windows.
        roster (tuple): Objects of the trace, sorted by id.
        geometry (FieldGeometry): Pitch dimensions.
        strike_radius (int): Frames within which strikes of one player collapse.
        kick_history (deque): Recent kicks ``(frame, player)`` for scorer lookup.
        pending (list): Strike candidates ``(candidate, strength)`` not yet settled.
    """

    def __init__(self, params: RuleParameterSet, roster, geometry: Optional[FieldGeometry] = None,
                 fps: float = detection_pipeline.TRACE_FPS, strike_radius: int = 0):
        self.params = params
        self.roster = tuple(roster)
        self.geometry = geometry or FieldGeometry()
        self.fps = fps
        self.strike_radius = strike_radius
        self.kick_history: Deque[Tuple[int, ObjectId]] = collections.deque()
        self.pending: List[Tuple[_Candidate, float]] = []
        self.settled_until: Optional[int] = None

    def _ball(self, features: TraceFeatures) -> ObjectId:
        return self.roster[features.ball_col]

    def detect_strikes(self, features: TraceFeatures, rows: np.ndarray,
                       event_type: str) -> List[Tuple[_Candidate, float]]:
        """Kicks or deflections with the size of their speed change."""
        decelerating = event_type == "BallDeflection"
        rule = self.params.deflection if decelerating else self.params.kicking
        anchors, players, peaks, strength = _ball_strike(features, rows, rule, decelerating)
        at = peaks if self.strike_radius > 0 else anchors
        player_role, object_role = _STRIKE_ROLES[event_type]
        ball = self._ball(features)
        return [((features.first_frame + int(r), event_type,
                  {player_role: features.players[p].id, object_role: ball.id}), float(s))
                for r, p, s in zip(at, players, strength)]

    def detect_kicks(self, features: TraceFeatures, rows: np.ndarray) -> List[_Candidate]:
        return [candidate for candidate, _ in self.detect_strikes(features, rows, "KickingTheBall")]

    def detect_deflections(self, features: TraceFeatures, rows: np.ndarray) -> List[_Candidate]:
        return [candidate for candidate, _ in self.detect_strikes(features, rows, "BallDeflection")]

    def detect_control(self, features: TraceFeatures, rows: np.ndarray) -> List[_Candidate]:
        possession_rows, possessors, _ = _ball_control(
            features, rows, self.params.possession, contested=False,
            comoving=self.params.possession_requires_comoving)
        tackle_rows, tackled, tacklers = _ball_control(features, rows, self.params.tackle, contested=True)

        if self.params.precedes("BallPossession", "Tackle"):
            keep = ~np.isin(tackle_rows, possession_rows)
            tackle_rows, tackled, tacklers = tackle_rows[keep], tackled[keep], tacklers[keep]
        else:
            keep = ~np.isin(possession_rows, tackle_rows)
            possession_rows, possessors = possession_rows[keep], possessors[keep]

        ball = self._ball(features)
        candidates = [(features.first_frame + int(r), "BallPossession",
                       {"PossessingPlayer": features.players[p].id, "PossessedObject": ball.id})
                      for r, p in zip(possession_rows, possessors)]
        candidates += [(features.first_frame + int(r), "Tackle",
                        {"PossessingPlayer": features.players[p].id,
                         "TacklingPlayer": features.players[q].id,
                         "PossessedObject": ball.id})
                       for r, p, q in zip(tackle_rows, tackled, tacklers)]
        return candidates

    def detect_boundary(self, features: TraceFeatures, rows: np.ndarray) -> List[_Candidate]:
        """BallOut and Goal at every anchor row that has a previous frame in the block."""
        ball = features.positions[:, features.ball_col, :]
        x, y = ball[:, 0], ball[:, 1]
        inside = (x >= 0) & (x <= self.geometry.length_m) & (y >= 0) & (y <= self.geometry.width_m)
        rows = rows[rows >= 1]
        rows = rows[inside[rows - 1] & ~inside[rows]]
        candidates = []
        for r in rows:
            frame = features.first_frame + int(r)
            scoring_team = _line_crossing(ball[r - 1], ball[r], self.geometry)
            if scoring_team is None:
                candidates.append((frame, "BallOut", {"OutObject": self._ball(features).id}))
                continue
            roles = {}
            scorer = self.scorer(frame, scoring_team)
            if scorer is not None:
                roles["Scorer"] = scorer.id
            candidates.append((frame, "Goal", roles))
        return candidates

    def scorer(self, frame: int, team: Team) -> Optional[ObjectId]:
        lookback = detection_pipeline.ATOMIC_SCORER_LOOKBACK_FRAMES
        for kick_frame, player in reversed(self.kick_history):
            if kick_frame > frame:
                continue
            if kick_frame < frame - lookback:
                break
            if player.team is team:
                return player
        return None

    def detect_block(self, features: TraceFeatures, first_row: int, last_row: int) -> List[_Candidate]:
        """
        Events anchored at rows ``first_row..last_row`` of a block. Kicks are recorded in
        the history before boundary events are evaluated, so a goal can name a scorer
        kicking in the same block. With a positive strike radius, kicks and deflections
        go to ``pending`` instead of the result.
        """
        rows = np.arange(first_row, last_row + 1)
        strikes = (self.detect_strikes(features, rows, "KickingTheBall")
                   + self.detect_strikes(features, rows, "BallDeflection"))
        by_id = {obj.id: obj for obj in self.roster}
        self.kick_history.extend((frame, by_id[roles["KickingPlayer"]])
                                 for (frame, event_type, roles), _ in strikes if event_type == "KickingTheBall")
        oldest = features.first_frame + first_row - detection_pipeline.ATOMIC_SCORER_LOOKBACK_FRAMES
        while self.kick_history and self.kick_history[0][0] < oldest:
            self.kick_history.popleft()
        events = self.detect_control(features, rows) + self.detect_boundary(features, rows)
        if self.strike_radius > 0:
            self.pending.extend(strikes)
            return events
        return [candidate for candidate, _ in strikes] + events

    def settle_strikes(self, horizon: Optional[int] = None) -> List[_Candidate]:
        """
        Pending strikes at frames up to ``horizon`` (all when None) that no neighbour
        beats. Callers only pass a horizon once every anchor up to ``horizon +
        strike_radius`` has been evaluated.
        """
        radius = self.strike_radius
        settled, seen = [], set()
        for candidate, strength in self.pending:
            frame, event_type, roles = candidate
            if (horizon is not None and frame > horizon) or (
                    self.settled_until is not None and frame <= self.settled_until):
                continue
            beaten = any(other_type == event_type and other_roles == roles and abs(other_frame - frame) <= radius
                         and (other_strength > strength or (other_strength == strength and other_frame < frame))
                         for (other_frame, other_type, other_roles), other_strength in self.pending)
            key = (frame, event_type, tuple(sorted(roles.items())))
            if not beaten and key not in seen:
                seen.add(key)
                settled.append(candidate)
        if horizon is None:
            self.pending = []
        else:
            self.settled_until = horizon
            self.pending = [p for p in self.pending if p[0][0] > horizon - radius]
        return settled


def _to_events(candidates: Iterable[_Candidate], first_id: int = 0) -> List[AtomicEvent]:
    ordered = sorted((AtomicEvent("", event_type, frame, roles) for frame, event_type, roles in candidates),
                     key=AtomicEvent.sort_key)
    return [AtomicEvent(f"a{first_id + i}", e.event_type, e.t, e.roles) for i, e in enumerate(ordered)]


def _keep_samples(samples: Dict[int, np.ndarray], positions: np.ndarray, first_frame: int,
                  frames: Iterable[int]) -> None:
    """Positions of each frame and its two neighbours; the first copy of a frame is kept."""
    for frame in frames:
        for neighbour in (frame - 1, frame, frame + 1):
            row = neighbour - first_frame
            if neighbour not in samples and 0 <= row < len(positions):
                samples[neighbour] = np.array(positions[row])


def detect_atomic_stream(chunks: Iterable[Trace], params: RuleParameterSet, config: Optional[DetectorConfig] = None,
                         samples: Optional[Dict[int, np.ndarray]] = None) -> Iterator[AtomicEvent]:
    """
    Detects atomic events over consecutive trace chunks, holding back only as many
    frames as the longest rule window, the speed span, the smoothing and the strike
    radius need. Yields the same events, with the same ids, as detect_atomic over
    the concatenated trace.

    Args:
        chunks (Iterable[Trace]): Consecutive slices of one trace sharing its roster.
        params (RuleParameterSet): Thresholds and windows.
        config (DetectorConfig, optional): Smoothing, speed span and strike radius.
        samples (dict, optional): Filled with the positions the rules saw, smoothed
            when smoothing is on, of every event frame and its two neighbours.

    Yields:
        AtomicEvent: Events in time order.
    """
    try:
        config = config or DetectorConfig()
        margin = config.margin
        lookahead = params.max_window + margin
        detector: Optional[AtomicDetector] = None
        buffer: Optional[np.ndarray] = None
        buffer_start = 0
        next_anchor = 0
        emitted = 0
        held: List[_Candidate] = []
        reference: Optional[Trace] = None

        def flush(last_anchor: int, final: bool) -> List[AtomicEvent]:
            nonlocal next_anchor, emitted, held
            positions = smooth_positions(buffer, config.smoothing_window)
            features = TraceFeatures(positions, reference.roster, reference.fps, buffer_start, config.speed_span)
            candidates = detector.detect_block(features, next_anchor - buffer_start, last_anchor - buffer_start)
            if samples is not None:
                frames = [frame for frame, _, _ in candidates] + [c[0] for c, _ in detector.pending]
                _keep_samples(samples, positions, buffer_start, frames)
            horizon = None if final else last_anchor - config.strike_radius
            if config.strike_radius > 0:
                candidates += detector.settle_strikes(horizon)
            held += candidates
            ready = [c for c in held if horizon is None or c[0] <= horizon]
            held = [c for c in held if horizon is not None and c[0] > horizon]
            events = _to_events(ready, emitted)
            emitted += len(events)
            next_anchor = last_anchor + 1
            return events

        for chunk in chunks:
            if len(chunk) == 0:
                continue
            if reference is None:
                reference = chunk
                detector = AtomicDetector(params, chunk.roster, chunk.geometry, chunk.fps, config.strike_radius)
                buffer, buffer_start, next_anchor = chunk.positions, chunk.start_frame, chunk.start_frame
            else:
                if chunk.start_frame != buffer_start + len(buffer):
                    raise SoccerEventsException(
                        f"chunk starting at frame {chunk.start_frame} does not follow frame "
                        f"{buffer_start + len(buffer) - 1}")
                buffer = np.concatenate([buffer, chunk.positions])
            ready = buffer_start + len(buffer) - 1 - lookahead
            if ready >= next_anchor:
                yield from flush(ready, final=False)
                keep_from = max(buffer_start, next_anchor - margin)
                buffer = buffer[keep_from - buffer_start:]
                buffer_start = keep_from

        if reference is not None:
            yield from flush(buffer_start + len(buffer) - 1, final=True)

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def detect_atomic(trace: Trace, params: RuleParameterSet, config: Optional[DetectorConfig] = None) -> List[AtomicEvent]:
    """
    Time-sorted atomic events of a trace.

    An event anchored at frame t depends only on frames ``t - 1 .. t + k`` of its rule,
    widened by the speed span and the smoothing; anchors whose window runs past the
    end of the trace are skipped.
    """
    events = list(detect_atomic_stream([trace], params, config))
    logging.debug(f"Detected {len(events)} atomic events in {trace}")
    return events


def _anchor_row(features: TraceFeatures, frame: int, window: int) -> np.ndarray:
    row = frame - features.first_frame
    if row < 0 or row + window > len(features) - 1:
        raise WindowOutOfRange(frame, window, len(features))
    return np.array([row])


def _single(candidates: List[_Candidate]) -> Optional[AtomicEvent]:
    events = _to_events(candidates)
    return events[0] if events else None


def rule_kicking(features: TraceFeatures, frame: int, params: RuleParameterSet) -> Optional[AtomicEvent]:
    rows = _anchor_row(features, frame, params.kicking.window)
    return _single(AtomicDetector(params, features.roster).detect_kicks(features, rows))


def rule_deflection(features: TraceFeatures, frame: int, params: RuleParameterSet) -> Optional[AtomicEvent]:
    rows = _anchor_row(features, frame, params.deflection.window)
    return _single(AtomicDetector(params, features.roster).detect_deflections(features, rows))


def rule_possession(features: TraceFeatures, frame: int, params: RuleParameterSet) -> Optional[AtomicEvent]:
    """BallPossession at ``frame`` on its own clauses, without suppression by Tackle."""
    rows = _anchor_row(features, frame, params.possession.window)
    found, players, _ = _ball_control(features, rows, params.possession, contested=False,
                                      comoving=params.possession_requires_comoving)
    if not found.size:
        return None
    ball = features.roster[features.ball_col]
    return AtomicEvent("a0", "BallPossession", frame,
                       {"PossessingPlayer": features.players[players[0]].id, "PossessedObject": ball.id})


def rule_tackle(features: TraceFeatures, frame: int, params: RuleParameterSet) -> Optional[AtomicEvent]:
    """Tackle at ``frame`` on its own clauses, without suppression by BallPossession."""
    rows = _anchor_row(features, frame, params.tackle.window)
    found, players, tacklers = _ball_control(features, rows, params.tackle, contested=True)
    if not found.size:
        return None
    ball = features.roster[features.ball_col]
    return AtomicEvent("a0", "Tackle", frame,
                       {"PossessingPlayer": features.players[players[0]].id,
                        "TacklingPlayer": features.players[tacklers[0]].id,
                        "PossessedObject": ball.id})


def _boundary_event(trace: Trace, frame: int, kicks: Iterable[AtomicEvent]) -> Optional[AtomicEvent]:
    if frame < trace.start_frame + 1 or frame > trace.end_frame:
        raise WindowOutOfRange(frame, 1, len(trace))
    detector = AtomicDetector(RuleParameterSet.reference(), trace.roster, trace.geometry, trace.fps)
    for kick in kicks:
        if kick.event_type == "KickingTheBall" and kick.t <= frame:
            detector.kick_history.append((kick.t, trace.object(kick.roles["KickingPlayer"])))
    pair = trace.slice(frame - 1, frame)
    features = TraceFeatures.from_trace(pair)
    return _single(detector.detect_boundary(features, np.array([1])))


def rule_ball_out(trace: Trace, frame: int) -> Optional[AtomicEvent]:
    event = _boundary_event(trace, frame, ())
    return event if event is not None and event.event_type == "BallOut" else None


def rule_goal(trace: Trace, frame: int, kicks: Iterable[AtomicEvent] = ()) -> Optional[AtomicEvent]:
    """
    Goal at ``frame`` when the ball segment arriving there leaves the pitch through a
    goal mouth. The scorer is the latest of ``kicks`` by the attacking team within the
    lookback, and stays unbound when there is none.
    """
    event = _boundary_event(trace, frame, sorted(kicks, key=lambda e: e.t))
    return event if event is not None and event.event_type == "Goal" else None
