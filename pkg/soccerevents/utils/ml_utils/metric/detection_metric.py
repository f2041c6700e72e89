import sys
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import EventMetric
from soccerevents.entity.trace_entity import AtomicEvent, IntervalEvent
from soccerevents.exception.exception import SoccerEventsException

Event = Union[AtomicEvent, IntervalEvent]


@dataclass
class Matching:
    """
    One-to-one matching between detected and ground-truth events of one type.

    Attributes:
        pairs (list): ``(detected index, truth index)`` of matched events.
        unmatched_detected (list): Indices of false positives.
        unmatched_truth (list): Indices of false negatives.
    """
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_detected: List[int] = field(default_factory=list)
    unmatched_truth: List[int] = field(default_factory=list)

    @property
    def metric(self) -> EventMetric:
        return EventMetric(len(self.pairs), len(self.unmatched_detected), len(self.unmatched_truth))


def _matching(n_detected: int, n_truth: int, pairs: List[Tuple[int, int]]) -> Matching:
    used_d = {d for d, _ in pairs}
    used_t = {t for _, t in pairs}
    return Matching(sorted(pairs),
                    [i for i in range(n_detected) if i not in used_d],
                    [j for j in range(n_truth) if j not in used_t])


def match_atomic(detected: Sequence[int], truth: Sequence[int],
                 tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES) -> Matching:
    """
    Matches detection frames to truth frames at most ``tolerance`` apart.

    Detections are swept in time order and each takes the earliest free truth frame
    it reaches. All acceptance windows have the same width, so this gives a maximum
    one-to-one matching.

    Args:
        detected (Sequence[int]): Frames of the detected events of one type.
        truth (Sequence[int]): Frames of the ground-truth events of that type.
        tolerance (int): Largest accepted ``|t_d - t_g|``.

    Returns:
        Matching: Indices refer to the input sequences.
    """
    d_order = sorted(range(len(detected)), key=lambda i: detected[i])
    t_order = sorted(range(len(truth)), key=lambda j: truth[j])
    pairs = []
    cursor = 0
    for i in d_order:
        while cursor < len(t_order) and truth[t_order[cursor]] < detected[i] - tolerance:
            cursor += 1
        if cursor < len(t_order) and truth[t_order[cursor]] <= detected[i] + tolerance:
            pairs.append((i, t_order[cursor]))
            cursor += 1
    return _matching(len(detected), len(truth), pairs)


def interval_iou(a: Tuple[int, int], b: Tuple[int, int]) -> float:
    """Intersection over union of closed frame intervals, counting frames."""
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def match_intervals(detected: Sequence[Tuple[int, int]], truth: Sequence[Tuple[int, int]],
                    threshold: float = detection_pipeline.EVALUATION_INTERVAL_IOU_THRESHOLD) -> Matching:
    """
    Greedy one-to-one matching of intervals overlapping by at least ``threshold`` IoU.

    Candidate pairs are taken in order of decreasing IoU (ties by detected, then
    truth index), each kept when neither interval is matched yet.
    """
    if not detected or not truth:
        return _matching(len(detected), len(truth), [])
    iou = np.array([[interval_iou(d, t) for t in truth] for d in detected])
    rows, cols = np.nonzero(iou >= threshold)
    order = np.lexsort((cols, rows, -iou[rows, cols]))
    used_d, used_t, pairs = set(), set(), []
    for r, c in zip(rows[order], cols[order]):
        if r in used_d or c in used_t:
            continue
        used_d.add(r)
        used_t.add(c)
        pairs.append((int(r), int(c)))
    return _matching(len(detected), len(truth), pairs)


def get_detection_score(detected: Sequence[Event], truth: Sequence[Event], interval: bool = False,
                        tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES,
                        threshold: float = detection_pipeline.EVALUATION_INTERVAL_IOU_THRESHOLD) -> EventMetric:
    """
    Counts of detected events of one type against the ground truth of that type.

    Args:
        detected (Sequence): Detected events.
        truth (Sequence): Ground-truth events.
        interval (bool): Match by interval overlap instead of frame distance.

    Returns:
        EventMetric: True positives, false positives and false negatives.

    Raises:
        SoccerEventsException: If the events cannot be compared.
    """
    try:
        if interval:
            return match_intervals([(e.start, e.end) for e in detected],
                                   [(e.start, e.end) for e in truth], threshold).metric
        return match_atomic([e.start for e in detected], [e.start for e in truth], tolerance).metric

    except Exception as e:
        raise SoccerEventsException(e, sys)
