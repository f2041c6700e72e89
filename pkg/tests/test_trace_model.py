import json

import numpy as np
import pytest

from builders import BALL, HOME_KEEPER, AWAY_KEEPER, build_trace, home
from soccerevents.components.trace_ingestion import (event_record, iter_trace_chunks, load_events, load_trace,
                                                     save_events, save_trace)
from soccerevents.components.trace_validation import validate
from soccerevents.entity.trace_entity import (AtomicEvent, EventLog, FieldGeometry, IntervalEvent, ObjectClass,
                                              ObjectId, Team, Trace)
from soccerevents.exception.exception import (DataError, DataFileNotFound, MalformedRecord, MissingObject,
                                              MissingRole, NonContiguousFrames, RuleError, SoccerEventsException,
                                              UnknownEventType, UnknownObject)

HEADER = "frame,object_id,class,team,goalkeeper,x,y\n"
ROWS = [
    "0,0,ball,none,0,50.0,34.0",
    "0,1,player,home,1,3.0,34.0",
    "0,11,player,away,1,102.0,34.0",
    "1,0,ball,none,0,50.5,34.0",
    "1,1,player,home,1,3.0,34.0",
    "1,11,player,away,1,102.0,34.0",
]


def write_csv(path, rows, header=HEADER):
    path.write_text(header + "\n".join(rows) + "\n")
    return str(path)


def test_load_trace(tmp_path):
    trace = load_trace(write_csv(tmp_path / "t.csv", ROWS))
    assert len(trace) == 2
    assert [obj.id for obj in trace.roster] == [0, 1, 11]
    assert trace.ball.id == 0
    assert trace.object(11).team is Team.AWAY and trace.object(11).is_goalkeeper
    assert np.allclose(trace.position(0, 1), [50.5, 34.0])


def test_load_trace_accepts_any_row_order(tmp_path):
    trace = load_trace(write_csv(tmp_path / "t.csv", list(reversed(ROWS))))
    assert trace.start_frame == 0 and trace.end_frame == 1
    assert np.allclose(trace.position(0, 0), [50.0, 34.0])


def test_load_trace_rejects_bad_header(tmp_path):
    with pytest.raises(MalformedRecord) as info:
        load_trace(write_csv(tmp_path / "t.csv", ROWS, header="frame,id,x,y\n"))
    assert info.value.line == 1


def test_load_trace_reports_line_of_bad_number(tmp_path):
    rows = list(ROWS)
    rows[2] = "0,11,player,away,1,abc,34.0"
    with pytest.raises(MalformedRecord) as info:
        load_trace(write_csv(tmp_path / "t.csv", rows))
    assert info.value.line == 4


def test_load_trace_rejects_gap(tmp_path):
    rows = ROWS[:3] + [row.replace("1,", "2,", 1) for row in ROWS[3:]]
    with pytest.raises(NonContiguousFrames) as info:
        load_trace(write_csv(tmp_path / "t.csv", rows))
    assert info.value.gap == 1


def test_load_trace_rejects_missing_object(tmp_path):
    with pytest.raises(MissingObject) as info:
        load_trace(write_csv(tmp_path / "t.csv", ROWS[:-1]))
    assert (info.value.frame, info.value.object_id) == (1, 11)


def test_load_trace_rejects_team_change(tmp_path):
    rows = list(ROWS)
    rows[4] = "1,1,player,away,1,3.0,34.0"
    with pytest.raises(MalformedRecord):
        load_trace(write_csv(tmp_path / "t.csv", rows))


def test_load_trace_missing_file(tmp_path):
    with pytest.raises(DataFileNotFound):
        load_trace(str(tmp_path / "absent.csv"))


def test_saved_trace_is_canonical(tmp_path, pass_scenario):
    trace, _ = pass_scenario
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    save_trace(trace, str(first))
    loaded = load_trace(str(first))
    assert loaded.roster == trace.roster
    assert np.allclose(loaded.positions, trace.positions, atol=5e-4)
    save_trace(loaded, str(second))
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize("rows", [5, 100, 50000])
def test_streamed_chunks_match_the_loaded_trace(tmp_path, pass_scenario, rows):
    trace, _ = pass_scenario
    path = str(tmp_path / "a.csv")
    save_trace(trace, path)
    loaded = load_trace(path)
    chunks = list(iter_trace_chunks(path, frames=40, rows=rows))
    assert [len(c) for c in chunks] == [40, 40, 40, 40, 6]
    assert [c.start_frame for c in chunks] == [0, 40, 80, 120, 160]
    assert all(c.roster == loaded.roster for c in chunks)
    assert np.array_equal(np.concatenate([c.positions for c in chunks]), loaded.positions)


def test_streamed_rows_must_come_in_frame_order(tmp_path):
    path = write_csv(tmp_path / "t.csv", ROWS[3:] + ROWS[:3])
    for rows in (2, 50000):
        with pytest.raises(MalformedRecord) as info:
            list(iter_trace_chunks(path, rows=rows))
        assert info.value.line == 5


def test_streamed_trace_checks(tmp_path):
    with pytest.raises(MissingObject):
        list(iter_trace_chunks(write_csv(tmp_path / "a.csv", ROWS[:-1]), rows=2))
    with pytest.raises(MalformedRecord):
        list(iter_trace_chunks(write_csv(tmp_path / "b.csv", [])))
    with pytest.raises(DataFileNotFound):
        list(iter_trace_chunks(str(tmp_path / "absent.csv")))
    single = list(iter_trace_chunks(write_csv(tmp_path / "c.csv", ROWS[:3]), rows=1))
    assert [len(c) for c in single] == [1]
    assert [obj.id for obj in single[0].roster] == [0, 1, 11]


def test_load_events(tmp_path):
    path = tmp_path / "events.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in [
        {"type": "KickingTheBall", "start": 20, "end": 20, "roles": {"KickingPlayer": 2, "KickedObject": 0}},
        {"type": "Pass", "start": 20, "end": 65, "roles": {"KickingPlayer": 2, "ReceivingPlayer": 3}},
        {"type": "Goal", "start": 90, "end": 90, "roles": {}},
    ]) + "\n")
    log = load_events(str(path))
    assert [e.id for e in log.atomic] == ["a0", "a1"]
    assert [e.event_type for e in log.atomic] == ["KickingTheBall", "Goal"]
    assert log.complex[0].id == "c0"
    assert (log.complex[0].start, log.complex[0].end) == (20, 65)


def test_load_events_errors(tmp_path):
    unknown = tmp_path / "unknown.jsonl"
    unknown.write_text('{"type": "Header", "start": 1, "end": 1, "roles": {}}\n')
    with pytest.raises(UnknownEventType) as info:
        load_events(str(unknown))
    assert info.value.name == "Header"

    missing = tmp_path / "missing.jsonl"
    missing.write_text('{"type": "Pass", "start": 1, "end": 9, "roles": {"KickingPlayer": 2}}\n')
    with pytest.raises(MissingRole) as info:
        load_events(str(missing))
    assert info.value.role == "ReceivingPlayer"

    broken = tmp_path / "broken.jsonl"
    broken.write_text('{"type": "Goal", "start": 1, "end": 1, "roles": {}}\n{"type": \n')
    with pytest.raises(MalformedRecord) as info:
        load_events(str(broken))
    assert info.value.line == 2


def test_event_file_keeps_levels(tmp_path, pass_scenario):
    _, truth = pass_scenario
    path = tmp_path / "truth.jsonl"
    save_events(truth, str(path))
    loaded = load_events(str(path))

    def signature(events):
        return sorted((e.event_type, e.start, e.end, tuple(sorted(e.roles.items()))) for e in events)

    assert signature(loaded.atomic) == signature(truth.atomic)
    assert signature(loaded.complex) == signature(truth.complex)


def test_single_frame_spell_is_marked_complex():
    spell = IntervalEvent("c0", "BallPossession", 5, 5, {"PossessingPlayer": 2})
    assert event_record(spell)["level"] == "complex"
    assert "level" not in event_record(AtomicEvent("a0", "BallPossession", 5, {"PossessingPlayer": 2,
                                                                                "PossessedObject": 0}))


def test_scenario_trace_is_valid(pass_scenario):
    trace, _ = pass_scenario
    assert validate(trace) == []


def test_validate_reports_every_problem():
    ball = ObjectId(0, ObjectClass.BALL, Team.HOME)
    track = np.tile([40.0, 30.0], (3, 1))
    track[1] = [120.0, 30.0]
    trace = build_trace({ball: (50.0, 34.0), home(2): track}, 3)
    kinds = [d.kind for d in validate(trace)]
    assert kinds.count("GoalkeeperCount") == 2
    assert "BallWithTeam" in kinds
    out = [d for d in validate(trace) if d.kind == "OutOfBounds"]
    assert [(d.frame, d.object_id) for d in out] == [(1, 2)]


def test_field_geometry():
    geometry = FieldGeometry()
    assert geometry.target_line_x(Team.HOME) == 105.0
    assert geometry.target_line_x(Team.AWAY) == 0.0
    assert geometry.in_goal_mouth(34.0) and not geometry.in_goal_mouth(40.0)
    assert geometry.in_sideline_band(5.0) and not geometry.in_sideline_band(34.0)
    assert geometry.in_attacking_third(90.0, Team.HOME) and geometry.in_attacking_third(10.0, Team.AWAY)
    assert geometry.behind_goal_line(106.0, Team.HOME) and not geometry.behind_goal_line(104.0, Team.HOME)
    with pytest.raises(SoccerEventsException):
        FieldGeometry(goal_mouth_width_m=70.0)


def test_trace_is_read_only_and_sorted():
    trace = build_trace({home(5): (1.0, 1.0), BALL: (2.0, 2.0), HOME_KEEPER: (3.0, 3.0)}, 4)
    assert [obj.id for obj in trace.roster] == [0, 1, 5]
    assert np.allclose(trace.track(5), [[1.0, 1.0]] * 4)
    with pytest.raises(ValueError):
        trace.positions[0, 0, 0] = 9.0
    with pytest.raises(UnknownObject):
        trace.column(99)


def test_slices_join_back():
    positions = np.random.default_rng(0).uniform(0, 60, (50, 3, 2))
    trace = Trace(positions, [BALL, HOME_KEEPER, AWAY_KEEPER], start_frame=100)
    parts = [trace.slice(100, 119), trace.slice(120, 120), trace.slice(121, 149)]
    joined = Trace.concatenate(parts)
    assert joined.start_frame == 100 and joined.end_frame == 149
    assert np.array_equal(joined.positions, trace.positions)
    with pytest.raises(SoccerEventsException):
        Trace.concatenate([parts[0], parts[2]])


def test_event_log_invariants():
    kick = AtomicEvent("x", "KickingTheBall", 10, {"KickingPlayer": 2, "KickedObject": 0})
    with pytest.raises(SoccerEventsException):
        EventLog((kick, AtomicEvent("x", "Goal", 12)))
    with pytest.raises(SoccerEventsException):
        IntervalEvent("c0", "Pass", 20, 10)
    log = EventLog((AtomicEvent("g", "Goal", 30), kick), (IntervalEvent("c0", "Pass", 10, 30),))
    assert [e.t for e in log.atomic] == [10, 30]
    shifted = log.shifted(100)
    assert [e.t for e in shifted.atomic] == [110, 130]
    assert (shifted.complex[0].start, shifted.complex[0].end) == (110, 130)
    assert shifted.complex[0].duration == 20


def test_exit_codes():
    assert SoccerEventsException("x").exit_code == 1
    assert DataError("x").exit_code == 3
    assert RuleError("x").exit_code == 4
    assert MissingObject(3, 7).diagnostic == "frame 3 has no row for object 7"
