import pytest

from builders import AWAY_KEEPER, BALL, HOME_KEEPER, away, build_trace, home
from soccerevents.components.complex_detector import detect_complex, duration_stats, merge_possession, seq_match
from soccerevents.dsl.builtins import builtin_rules, compile_rules
from soccerevents.dsl.compiler import CompiledRuleSet
from soccerevents.entity.trace_entity import AtomicEvent, IntervalEvent
from soccerevents.exception.exception import CyclicRuleSet, RuleError, SoccerEventsException


def static_trace(receiver_team: str = "home", defender=(90.0, 34.0)):
    receiver = home(9) if receiver_team == "home" else away(9)
    return build_trace({
        BALL: (50.0, 34.0),
        HOME_KEEPER: (3.0, 34.0),
        home(2): (20.0, 20.0),
        home(7): (50.0, 34.0),
        receiver: (60.0, 34.0),
        AWAY_KEEPER: (102.0, 34.0),
        away(12): defender,
    }, 201)


def kick(event_id, t, player):
    return AtomicEvent(event_id, "KickingTheBall", t, {"KickingPlayer": player, "KickedObject": 0})


def possession(event_id, t, player):
    return AtomicEvent(event_id, "BallPossession", t, {"PossessingPlayer": player, "PossessedObject": 0})


def tackle(event_id, t, possessor, tackler):
    return AtomicEvent(event_id, "Tackle", t,
                       {"PossessingPlayer": possessor, "TacklingPlayer": tackler, "PossessedObject": 0})


PASS_ATOMS = [kick("a0", 100, 7), possession("a1", 130, 9)]


def test_pass_from_kick_and_possession():
    events = detect_complex(PASS_ATOMS, builtin_rules(), static_trace())
    assert {e.event_type for e in events} == {"BallPossession", "Pass"}
    passes = [e for e in events if e.event_type == "Pass"]
    assert [(p.start, p.end, p.roles) for p in passes] == [(100, 130, {"KickingPlayer": 7, "ReceivingPlayer": 9})]
    assert passes[0].sub_events == ("a0", "a1")
    assert [e.id for e in events] == [f"c{i}" for i in range(len(events))]


def test_receiver_ahead_of_the_defence_makes_a_filtering_pass():
    events = detect_complex(PASS_ATOMS, builtin_rules(), static_trace(defender=(40.0, 34.0)))
    assert [e.event_type for e in events if e.event_type == "FilteringPass"] == ["FilteringPass"]


def test_goalkeeper_is_not_part_of_the_defence_line():
    # the away keeper at (102, 34) is nearer the goal than the receiver; only outfield players count
    events = detect_complex(PASS_ATOMS, builtin_rules(), static_trace(defender=(40.0, 34.0)))
    filtering = [e for e in events if e.event_type == "FilteringPass"]
    assert [e.roles["ReceivingPlayer"] for e in filtering] == [9]

    behind = detect_complex(PASS_ATOMS, builtin_rules(), static_trace(defender=(95.0, 34.0)))
    assert "FilteringPass" not in {e.event_type for e in behind}


def test_no_pass_to_an_opponent():
    events = detect_complex(PASS_ATOMS, builtin_rules(), static_trace(receiver_team="away"))
    assert "Pass" not in {e.event_type for e in events}


def test_pass_then_goal():
    atoms = PASS_ATOMS + [AtomicEvent("a2", "Goal", 200, {"Scorer": 9})]
    events = detect_complex(atoms, builtin_rules(), static_trace())
    chains = [e for e in events if e.event_type == "PassThenGoal"]
    assert [(c.start, c.end) for c in chains] == [(100, 200)]

    other_scorer = PASS_ATOMS + [AtomicEvent("a2", "Goal", 200, {"Scorer": 7})]
    assert "PassThenGoal" not in {e.event_type for e in detect_complex(other_scorer, builtin_rules(), static_trace())}


def test_tackle_won_by_the_tackler():
    atoms = [tackle(f"t{t}", t, 2, 12) for t in range(10, 21)]
    atoms += [possession(f"p{t}", t, 12) for t in range(30, 41)]
    events = detect_complex(atoms, builtin_rules(), static_trace())
    by_type = {e.event_type: e for e in events}
    assert set(by_type) == {"BallPossession", "Tackle", "WonTackle"}
    assert (by_type["Tackle"].start, by_type["Tackle"].end) == (10, 40)
    assert by_type["Tackle"].roles == {"PossessingPlayer": 2, "TacklingPlayer": 12, "WinningPlayer": 12}


def test_tackle_lost_when_the_ball_stays():
    atoms = [tackle(f"t{t}", t, 2, 12) for t in range(10, 21)]
    atoms += [possession(f"p{t}", t, 2) for t in range(25, 31)]
    events = detect_complex(atoms, builtin_rules(), static_trace())
    assert {e.event_type for e in events} == {"BallPossession", "Tackle", "LostTackle"}


def test_merge_possession():
    spells = merge_possession([possession(f"p{t}", t, 7) for t in range(10, 41)])
    assert [(s.start, s.end, s.roles) for s in spells] == [(10, 40, {"PossessingPlayer": 7})]
    assert len(spells[0].sub_events) == 31

    handover = [possession(f"p{t}", t, 7) for t in range(10, 21)] + [possession(f"q{t}", t, 9) for t in range(21, 31)]
    assert [(s.start, s.end) for s in merge_possession(handover)] == [(10, 20), (21, 30)]

    bridged = [possession(f"p{t}", t, 7) for t in list(range(10, 21)) + list(range(24, 31))]
    assert [(s.start, s.end) for s in merge_possession(bridged)] == [(10, 30)]

    broken = [possession(f"p{t}", t, 7) for t in list(range(10, 21)) + list(range(27, 31))]
    assert [(s.start, s.end) for s in merge_possession(broken)] == [(10, 20), (27, 30)]
    assert [(s.start, s.end) for s in merge_possession(broken, merge_gap=6)] == [(10, 30)]


def test_seq_match():
    first = IntervalEvent("x", "Pass", 10, 20)
    assert seq_match(first, IntervalEvent("y", "Pass", 20, 25), None) == (10, 25)
    assert seq_match(first, IntervalEvent("y", "Pass", 19, 25), None) is None
    assert seq_match(first, IntervalEvent("y", "Pass", 31, 40), 10) is None
    assert seq_match(first, IntervalEvent("y", "Pass", 30, 40), 10) == (10, 40)


def test_duration_bounds():
    long_rule = ("complex LongKick: seq(KickingTheBall as k, BallPossession as p) within 90 lasting {} "
                 "emit roles {{KickingPlayer: k.KickingPlayer}}")
    kept = detect_complex(PASS_ATOMS, compile_rules(long_rule.format("30..90")))
    assert [(e.event_type, e.start, e.end) for e in kept if e.event_type == "LongKick"] == [("LongKick", 100, 130)]
    dropped = detect_complex(PASS_ATOMS, compile_rules(long_rule.format("31..90")))
    assert "LongKick" not in {e.event_type for e in dropped}


def test_conjunction_and_disjunction():
    atoms = [kick("a0", 10, 7), AtomicEvent("a1", "BallDeflection", 11, {"DeflectingPlayer": 9,
                                                                         "DeflectedObject": 0})]
    both = detect_complex(atoms, compile_rules("complex Both: and(KickingTheBall as k, BallDeflection as d) within 2"))
    assert [(e.event_type, e.start, e.end) for e in both] == [("Both", 10, 11)]

    apart = [kick("a0", 10, 7), AtomicEvent("a1", "BallDeflection", 15, {"DeflectingPlayer": 9,
                                                                         "DeflectedObject": 0})]
    assert detect_complex(apart, compile_rules(
        "complex Both: and(KickingTheBall as k, BallDeflection as d) within 2")) == []

    touches = detect_complex(atoms, compile_rules(
        "complex Touch: or(KickingTheBall as k, BallDeflection as d)"))
    assert [(e.start, e.end) for e in touches] == [(10, 10), (11, 11)]


def test_each_anchor_matches_once():
    atoms = [kick("a0", 100, 7), possession("a1", 110, 9), possession("a2", 150, 9)]
    events = detect_complex(atoms, builtin_rules(), static_trace())
    passes = [e for e in events if e.event_type == "Pass"]
    assert [(p.start, p.end) for p in passes] == [(100, 110)]


def test_spatial_predicates_need_the_trace():
    with pytest.raises(SoccerEventsException):
        detect_complex(PASS_ATOMS, builtin_rules())


def test_rules_out_of_order_are_rejected():
    reversed_rules = CompiledRuleSet(tuple(reversed(builtin_rules().rules)))
    with pytest.raises(CyclicRuleSet) as info:
        detect_complex(PASS_ATOMS, reversed_rules, static_trace())
    assert isinstance(info.value, RuleError)
    assert info.value.exit_code == 4


def test_duration_stats():
    events = detect_complex(PASS_ATOMS, builtin_rules(), static_trace())
    stats = {s.event_type: s for s in duration_stats(events)}
    assert stats["Pass"].count == 1
    assert stats["Pass"].max_frames == 30
    assert stats["Pass"].mean_seconds == pytest.approx(1.0)
    assert stats["BallPossession"].min_frames == 0
    assert [s.event_type for s in duration_stats(events)] == ["BallPossession", "Pass"]
