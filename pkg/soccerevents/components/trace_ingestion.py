import json
import os
import re
import sys
from typing import Dict, Iterator, List, Optional, Union

import numpy as np
import pandas as pd

from soccerevents.constant import detection_pipeline
from soccerevents.entity.trace_entity import (
    ATOMIC_ROLES,
    COMPLEX_ROLES,
    OPTIONAL_ROLES,
    AtomicEvent,
    EventLog,
    FieldGeometry,
    IntervalEvent,
    ObjectClass,
    ObjectId,
    Team,
    Trace,
    renumber,
)
from soccerevents.exception.exception import (
    DataFileNotFound,
    MalformedRecord,
    MissingObject,
    MissingRole,
    NonContiguousFrames,
    SoccerEventsException,
    UnknownEventType,
)
from soccerevents.logging.logger import logging
from soccerevents.utils.main_utils.utils import read_jsonl_file, read_yaml_file, write_jsonl_file

_BOOL_FLAGS = {"0": False, "1": True}


def _schema_columns() -> List[str]:
    """Column names from the shipped schema, falling back to the built-in list."""
    schema_path = os.path.join(os.path.dirname(__file__), "..", "..", detection_pipeline.SCHEMA_FILE_PATH)
    if os.path.exists(schema_path):
        schema = read_yaml_file(schema_path)
        return [list(column.keys())[0] for column in schema["columns"]]
    return list(detection_pipeline.TRACE_CSV_COLUMNS)


def _parser_error_line(error: Exception) -> int:
    found = re.search(r"line (\d+)", str(error))
    return int(found.group(1)) if found else 0


def _parse_rows(table: pd.DataFrame, first_line: int) -> pd.DataFrame:
    """
    Typed copy of raw CSV rows, with the line number of every row in the file
    (``first_line`` for the first one, the header being line 1).
    """
    lines = np.arange(len(table)) + first_line
    numeric = {}
    for name, kind in (("frame", "integer"), ("object_id", "integer"), ("x", "float"), ("y", "float")):
        values = pd.to_numeric(table[name].str.strip(), errors="coerce")
        bad = values.isna().to_numpy()
        if kind == "integer":
            bad |= ~np.isclose(values.fillna(0).to_numpy(), np.round(values.fillna(0).to_numpy()))
        if bad.any():
            raise MalformedRecord(int(lines[bad.argmax()]), f"{name} is not a number")
        numeric[name] = values.to_numpy()
    frames = numeric["frame"].astype(int)
    if (frames < 0).any():
        raise MalformedRecord(int(lines[(frames < 0).argmax()]), "negative frame number")

    parsed = pd.DataFrame({"line": lines, "frame": frames, "object_id": numeric["object_id"].astype(int),
                           "x": numeric["x"], "y": numeric["y"]})
    for name, allowed in (("class", {c.value for c in ObjectClass}), ("team", {t.value for t in Team}),
                          ("goalkeeper", set(_BOOL_FLAGS))):
        series = table[name].str.strip()
        if name != "goalkeeper":
            series = series.str.lower()
        bad = ~series.isin(allowed).to_numpy()
        if bad.any():
            raise MalformedRecord(int(lines[bad.argmax()]), f"{name} must be one of {sorted(allowed)}")
        parsed[name] = series.to_numpy()
    return parsed


def _first_frame_roster(parsed: pd.DataFrame) -> Dict[int, ObjectId]:
    first_rows = parsed[parsed["frame"] == parsed["frame"].min()]
    return {
        int(row.object_id): ObjectId(int(row.object_id), ObjectClass(row["class"]), Team(row.team),
                                     _BOOL_FLAGS[row.goalkeeper])
        for _, row in first_rows.iterrows()
    }


def _check_rows(parsed: pd.DataFrame, roster: Dict[int, ObjectId]) -> None:
    """Every row names a roster object with its roster attributes, once per frame."""
    lines = parsed["line"].to_numpy()
    duplicated = parsed.duplicated(subset=["frame", "object_id"]).to_numpy()
    if duplicated.any():
        raise MalformedRecord(int(lines[duplicated.argmax()]), "object listed twice in one frame")
    ids = parsed["object_id"].to_numpy()
    unknown = ~np.isin(ids, np.array(sorted(roster)))
    if unknown.any():
        at = unknown.argmax()
        raise MalformedRecord(int(lines[at]), f"object {ids[at]} is not in the first frame")
    expected = pd.DataFrame({
        "class": [roster[i].object_class.value for i in ids],
        "team": [roster[i].team.value for i in ids],
        "goalkeeper": [str(int(roster[i].is_goalkeeper)) for i in ids],
    })
    changed = ((expected["class"].to_numpy() != parsed["class"].to_numpy())
               | (expected["team"].to_numpy() != parsed["team"].to_numpy())
               | (expected["goalkeeper"].to_numpy() != parsed["goalkeeper"].to_numpy()))
    if changed.any():
        at = changed.argmax()
        raise MalformedRecord(int(lines[at]), f"object {ids[at]} changes class, team or goalkeeper flag")


def _frame_block(parsed: pd.DataFrame, order: List[int], first: int, last: int) -> np.ndarray:
    """
    ``(frames, objects, 2)`` positions of frames ``first..last``.

    Raises:
        NonContiguousFrames: If a frame number in the range is absent.
        MissingObject: If a frame lacks a roster object.
    """
    frames = parsed["frame"].to_numpy()
    ids = parsed["object_id"].to_numpy()
    present = set(frames.tolist())
    for index in range(first, last + 1):
        if index not in present:
            raise NonContiguousFrames(index)
    counts = pd.Series(frames).value_counts()
    short = counts[counts < len(order)]
    if not short.empty:
        missing_frame = int(short.index.min())
        seen = set(ids[frames == missing_frame].tolist())
        missing_id = next(i for i in order if i not in seen)
        raise MissingObject(missing_frame, missing_id)

    positions = np.empty((last - first + 1, len(order), 2))
    rows = frames - first
    cols = np.searchsorted(np.array(order), ids)
    positions[rows, cols, 0] = parsed["x"].to_numpy()
    positions[rows, cols, 1] = parsed["y"].to_numpy()
    return positions


def load_trace(path: str, fps: float = detection_pipeline.TRACE_FPS,
               geometry: Optional[FieldGeometry] = None) -> Trace:
    """
    Reads a positional CSV file into a Trace.

    The roster is taken from the objects present in the first frame. Every later
    frame must list exactly those objects, and frame numbers must be contiguous.

    Args:
        path (str): CSV with columns ``frame,object_id,class,team,goalkeeper,x,y``.
        fps (float): Frame rate of the recording.
        geometry (FieldGeometry, optional): Pitch dimensions; defaults to 105 x 68 m.

    Returns:
        Trace: Positions of every object over the recorded frames.

    Raises:
        DataFileNotFound: If ``path`` does not exist.
        MalformedRecord: On a row that cannot be parsed (line numbers count the header).
        NonContiguousFrames: If a frame number is skipped.
        MissingObject: If a frame lacks a roster object.
    """
    if not os.path.exists(path):
        raise DataFileNotFound(path)
    try:
        columns = _schema_columns()
        try:
            table = pd.read_csv(path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError:
            raise MalformedRecord(1, "file is empty")
        except pd.errors.ParserError as e:
            raise MalformedRecord(_parser_error_line(e), "wrong number of fields")
        if list(table.columns) != columns:
            raise MalformedRecord(1, f"header must be {','.join(columns)}")
        if table.empty:
            raise MalformedRecord(2, "no position rows")

        parsed = _parse_rows(table, 2)
        roster = _first_frame_roster(parsed)
        _check_rows(parsed, roster)
        order = sorted(roster)
        first, last = int(parsed["frame"].min()), int(parsed["frame"].max())
        positions = _frame_block(parsed, order, first, last)

        trace = Trace(positions, [roster[i] for i in order], fps=fps, geometry=geometry, start_frame=first)
        logging.info(f"Loaded {trace} from {path}")
        return trace

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def iter_trace_chunks(path: str, frames: int = detection_pipeline.DETECTION_CHUNK_FRAMES,
                      fps: float = detection_pipeline.TRACE_FPS, geometry: Optional[FieldGeometry] = None,
                      rows: int = detection_pipeline.DETECTION_CSV_CHUNK_ROWS) -> Iterator[Trace]:
    """
    Reads a positional CSV file as consecutive Trace chunks of ``frames`` frames
    (the last one may be shorter), parsing ``rows`` lines at a time. The checks are
    those of load_trace; in addition the rows must come in non-decreasing frame
    order, as save_trace writes them.

    Raises:
        DataFileNotFound: If ``path`` does not exist.
        MalformedRecord: On a row that cannot be parsed or a frame out of order.
        NonContiguousFrames: If a frame number is skipped.
        MissingObject: If a frame lacks a roster object.
    """
    if not os.path.exists(path):
        raise DataFileNotFound(path)
    try:
        columns = _schema_columns()
        try:
            reader = pd.read_csv(path, dtype=str, keep_default_na=False, chunksize=rows)
        except pd.errors.EmptyDataError:
            raise MalformedRecord(1, "file is empty")

        roster: Optional[Dict[int, ObjectId]] = None
        order: List[int] = []
        carry: Optional[pd.DataFrame] = None
        pending: List[np.ndarray] = []
        next_frame: Optional[int] = None
        chunk_start = 0
        line = 2
        yielded = 0

        def emit(block: pd.DataFrame) -> None:
            nonlocal next_frame
            block_frames = block["frame"].to_numpy()
            first, last = int(block_frames.min()), int(block_frames.max())
            if next_frame is not None and first != next_frame:
                if first < next_frame:
                    at = int(np.argmax(block_frames < next_frame))
                    raise MalformedRecord(int(block["line"].to_numpy()[at]), "frame out of order")
                raise NonContiguousFrames(next_frame)
            pending.append(_frame_block(block, order, first, last))
            next_frame = last + 1

        def take(count: int) -> Trace:
            nonlocal pending, chunk_start
            stacked = np.concatenate(pending)
            chunk = Trace(stacked[:count], [roster[i] for i in order], fps=fps, geometry=geometry,
                          start_frame=chunk_start)
            pending = [stacked[count:]] if len(stacked) > count else []
            chunk_start += count
            return chunk

        while True:
            try:
                table = next(reader)
            except StopIteration:
                break
            except pd.errors.ParserError as e:
                raise MalformedRecord(_parser_error_line(e), "wrong number of fields")
            if list(table.columns) != columns:
                raise MalformedRecord(1, f"header must be {','.join(columns)}")
            if table.empty:
                continue
            parsed = _parse_rows(table, line)
            line += len(table)
            if carry is not None:
                parsed = pd.concat([carry, parsed], ignore_index=True)
            block_frames = parsed["frame"].to_numpy()
            if np.any(np.diff(block_frames) < 0):
                at = int(np.argmax(np.diff(block_frames) < 0)) + 1
                raise MalformedRecord(int(parsed["line"].to_numpy()[at]), "frame out of order")
            if roster is None:
                if block_frames.min() == block_frames.max():
                    carry = parsed
                    continue
                roster = _first_frame_roster(parsed)
                order = sorted(roster)
                chunk_start = int(block_frames.min())
            _check_rows(parsed, roster)
            # the last frame may continue in the next block of rows
            complete = block_frames < block_frames.max()
            carry = parsed[~complete]
            if complete.any():
                emit(parsed[complete])
            while pending and sum(len(p) for p in pending) >= frames:
                yield take(frames)
                yielded += 1

        if roster is None:
            if carry is None:
                raise MalformedRecord(2, "no position rows")
            roster = _first_frame_roster(carry)
            order = sorted(roster)
            chunk_start = int(carry["frame"].min())
            _check_rows(carry, roster)
        if carry is not None and len(carry):
            emit(carry)
        while pending:
            yield take(min(frames, sum(len(p) for p in pending)))
            yielded += 1
        logging.info(f"Streamed {yielded} chunks of up to {frames} frames from {path}")

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def trace_to_frame(trace: Trace) -> pd.DataFrame:
    """Canonical row layout of a trace: sorted by frame, then object id."""
    n_frames, n_objects = len(trace), len(trace.roster)
    frames = np.repeat(np.array(trace.frame_indices), n_objects)
    objects = list(trace.roster) * n_frames
    return pd.DataFrame({
        "frame": frames,
        "object_id": [obj.id for obj in objects],
        "class": [obj.object_class.value for obj in objects],
        "team": [obj.team.value for obj in objects],
        "goalkeeper": [int(obj.is_goalkeeper) for obj in objects],
        "x": trace.positions[:, :, 0].reshape(-1),
        "y": trace.positions[:, :, 1].reshape(-1),
    })


def save_trace(trace: Trace, path: str, decimals: int = detection_pipeline.TRACE_COORDINATE_DECIMALS) -> None:
    """
    Writes a trace as positional CSV with fixed decimal places, so a canonical file
    read with load_trace and saved again is byte-identical.
    """
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        table = trace_to_frame(trace)
        table["x"] = table["x"].round(decimals) + 0.0
        table["y"] = table["y"].round(decimals) + 0.0
        table.to_csv(path, index=False, float_format=f"%.{decimals}f")
        logging.info(f"Saved {trace} to {path}")
    except Exception as e:
        raise SoccerEventsException(e, sys)


def _check_roles(event_type: str, roles: dict, schema: dict) -> None:
    optional = OPTIONAL_ROLES.get(event_type, ())
    for role in schema[event_type]:
        if role not in roles and role not in optional:
            raise MissingRole(event_type, role)


def event_record(event: Union[AtomicEvent, IntervalEvent]) -> dict:
    """JSONL record of an event. Single-frame complex events of a name shared with an
    atomic type carry ``"level": "complex"`` so they reload at the right level."""
    record = {
        "type": event.event_type,
        "start": int(event.start),
        "end": int(event.end),
        "roles": {role: int(obj) for role, obj in sorted(event.roles.items())},
    }
    if isinstance(event, IntervalEvent) and event.event_type in ATOMIC_ROLES and event.start == event.end:
        record["level"] = "complex"
    return record


def log_records(log: EventLog) -> List[dict]:
    events = [(e.sort_key(), 0, e) for e in log.atomic] + [(e.sort_key(), 1, e) for e in log.complex]
    events.sort(key=lambda item: (item[2].start, item[2].end, item[1], item[0]))
    return [event_record(e) for _, _, e in events]


def load_events(path: str) -> EventLog:
    """
    Reads an event JSONL file.

    Records whose type is atomic and whose start equals end become AtomicEvents,
    everything else an IntervalEvent. Ids are assigned in time order.

    Raises:
        DataFileNotFound: If ``path`` does not exist.
        MalformedRecord: On a line that is not a valid event object.
        UnknownEventType: On a type outside the atomic and complex vocabularies.
        MissingRole: When a required role of the type is absent.
    """
    try:
        atomic, complex_events = [], []
        for number, line in read_jsonl_file(path):
            try:
                record = json.loads(line)
                event_type = record["type"]
                start, end = int(record["start"]), int(record["end"])
                roles = {str(k): int(v) for k, v in (record.get("roles") or {}).items()}
                level = record.get("level")
            except (ValueError, KeyError, TypeError, AttributeError) as e:
                raise MalformedRecord(number, str(e))
            if event_type not in ATOMIC_ROLES and event_type not in COMPLEX_ROLES:
                raise UnknownEventType(event_type)
            if start > end:
                raise MalformedRecord(number, "start after end")
            if level is None:
                level = "atomic" if event_type in ATOMIC_ROLES and (start == end or event_type not in COMPLEX_ROLES) \
                    else "complex"
            if level == "atomic":
                if event_type not in ATOMIC_ROLES or start != end:
                    raise MalformedRecord(number, f"{event_type} cannot be a single-frame atomic event here")
                _check_roles(event_type, roles, ATOMIC_ROLES)
                atomic.append(AtomicEvent(f"line{number}", event_type, start, roles))
            elif level == "complex":
                if event_type not in COMPLEX_ROLES:
                    raise MalformedRecord(number, f"{event_type} is not a complex event type")
                _check_roles(event_type, roles, COMPLEX_ROLES)
                complex_events.append(IntervalEvent(f"line{number}", event_type, start, end, roles))
            else:
                raise MalformedRecord(number, f"level must be atomic or complex, got {level!r}")
        log = renumber(EventLog(tuple(atomic), tuple(complex_events)))
        logging.info(f"Loaded {len(log.atomic)} atomic and {len(log.complex)} complex events from {path}")
        return log

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)


def save_events(log: EventLog, path: str) -> None:
    write_jsonl_file(path, log_records(log))
    logging.info(f"Saved {len(log)} events to {path}")
