import pytest
from hypothesis import given, strategies as st

from soccerevents.components.event_evaluation import evaluate, render_report, report_frame
from soccerevents.entity.artifact_entity import EventMetric, MetricsReport
from soccerevents.entity.config_entity import EvaluationConfig
from soccerevents.entity.trace_entity import AtomicEvent, EventLog, IntervalEvent
from soccerevents.utils.ml_utils.metric.detection_metric import (get_detection_score, interval_iou, match_atomic,
                                                                 match_intervals)


def kicks(*frames, prefix="a"):
    return tuple(AtomicEvent(f"{prefix}{i}", "KickingTheBall", t, {"KickingPlayer": 2, "KickedObject": 0})
                 for i, t in enumerate(frames))


def test_match_atomic_within_tolerance():
    matching = match_atomic([10, 20], [12, 30], tolerance=3)
    assert matching.pairs == [(0, 0)]
    assert matching.unmatched_detected == [1]
    assert matching.unmatched_truth == [1]
    assert matching.metric == EventMetric(1, 1, 1)


def test_match_atomic_is_maximal():
    # pairing 8 with 8 would strand 5
    assert match_atomic([5, 8], [8, 11], tolerance=3).pairs == [(0, 0), (1, 1)]
    assert match_atomic([8, 5], [11, 8], tolerance=3).pairs == [(0, 0), (1, 1)]


def test_match_atomic_empty():
    assert match_atomic([], [4]).metric == EventMetric(0, 0, 1)
    assert match_atomic([4], []).metric == EventMetric(0, 1, 0)


@given(detected=st.lists(st.integers(0, 200), max_size=25), truth=st.lists(st.integers(0, 200), max_size=25),
       tolerance=st.integers(0, 6))
def test_atomic_matching_is_one_to_one(detected, truth, tolerance):
    matching = match_atomic(detected, truth, tolerance)
    assert all(abs(detected[d] - truth[t]) <= tolerance for d, t in matching.pairs)
    assert len({d for d, _ in matching.pairs}) == len(matching.pairs)
    assert len({t for _, t in matching.pairs}) == len(matching.pairs)
    metric = matching.metric
    assert metric.true_positives + metric.false_positives == len(detected)
    assert metric.true_positives + metric.false_negatives == len(truth)


def test_interval_iou_counts_frames():
    assert interval_iou((100, 199), (150, 249)) == pytest.approx(50 / 150)
    assert interval_iou((100, 130), (110, 140)) == pytest.approx(21 / 41)
    assert interval_iou((5, 5), (5, 5)) == 1.0
    assert interval_iou((0, 9), (10, 20)) == 0.0


def test_match_intervals_threshold():
    assert match_intervals([(100, 130)], [(110, 140)]).metric == EventMetric(1, 0, 0)
    assert match_intervals([(0, 9)], [(8, 100)]).metric == EventMetric(0, 1, 1)
    assert match_intervals([(0, 20), (10, 30)], [(0, 10), (10, 30)]).metric == EventMetric(2, 0, 0)
    assert match_intervals([], [(0, 4)]).metric == EventMetric(0, 0, 1)


def test_match_intervals_takes_the_largest_overlap_first():
    # (0,19)-(0,14) overlaps best, which leaves (0,9) with nothing above the threshold
    matching = match_intervals([(0, 19), (0, 9)], [(0, 14), (10, 29)])
    assert matching.pairs == [(0, 0)]
    assert matching.unmatched_detected == [1]
    assert matching.unmatched_truth == [1]
    assert matching.metric == EventMetric(1, 1, 1)


def test_match_intervals_breaks_ties_by_index():
    assert match_intervals([(0, 9), (0, 9)], [(0, 9)]).pairs == [(0, 0)]
    assert match_intervals([(0, 9)], [(0, 9), (0, 9)]).pairs == [(0, 0)]


intervals = st.lists(st.tuples(st.integers(0, 100), st.integers(0, 30)).map(lambda p: (p[0], p[0] + p[1])),
                     max_size=8)


@given(detected=intervals, truth=intervals)
def test_interval_matching_is_greedy(detected, truth):
    matching = match_intervals(detected, truth, threshold=0.2)
    assert len({d for d, _ in matching.pairs}) == len(matching.pairs)
    assert len({t for _, t in matching.pairs}) == len(matching.pairs)
    assert all(interval_iou(detected[d], truth[t]) >= 0.2 for d, t in matching.pairs)
    # no pair left over that both sides could still take
    assert all(interval_iou(detected[d], truth[t]) < 0.2
               for d in matching.unmatched_detected for t in matching.unmatched_truth)
    if matching.pairs:
        best = max(interval_iou(d, t) for d in detected for t in truth)
        assert max(interval_iou(detected[d], truth[t]) for d, t in matching.pairs) == best


def test_event_metric_scores():
    empty = EventMetric()
    assert (empty.precision, empty.recall, empty.f_score) == (0.0, 0.0, 0.0)
    metric = EventMetric(3, 1, 2)
    assert metric.precision == pytest.approx(0.75)
    assert metric.recall == pytest.approx(0.6)
    assert metric.f_score == pytest.approx(2 / 3)
    assert metric + metric == EventMetric(6, 2, 4)


def test_get_detection_score():
    truth = kicks(10, 50)
    assert get_detection_score(kicks(12, 80), truth) == EventMetric(1, 1, 1)
    passes = [IntervalEvent("c0", "Pass", 10, 40)]
    assert get_detection_score([IntervalEvent("c1", "Pass", 12, 40)], passes, interval=True) == EventMetric(1, 0, 0)


def test_evaluate_scores_each_level():
    truth = EventLog(kicks(10, 50), (IntervalEvent("c0", "Pass", 10, 40, {"KickingPlayer": 2, "ReceivingPlayer": 3}),))
    detected = EventLog(kicks(11, 90), (IntervalEvent("c0", "Pass", 12, 40), IntervalEvent("c1", "Shot", 90, 90)))
    report = evaluate(detected, truth)
    assert report.atomic == {"KickingTheBall": EventMetric(1, 1, 1)}
    assert report.complex["Pass"] == EventMetric(1, 0, 0)
    assert report.complex["Shot"] == EventMetric(0, 1, 0)
    assert report.macro["f_score"] == pytest.approx((0.5 + 1.0 + 0.0) / 3)

    strict = evaluate(detected, truth, EvaluationConfig(tolerance=0, iou_threshold=0.95))
    assert strict.atomic["KickingTheBall"] == EventMetric(0, 2, 2)
    assert strict.complex["Pass"] == EventMetric(0, 1, 1)


def test_identical_logs_score_one():
    log = EventLog(kicks(10, 50), (IntervalEvent("c0", "Pass", 10, 40),))
    report = evaluate(log, log)
    assert report.macro == {"precision": 1.0, "recall": 1.0, "f_score": 1.0}


def test_report_layout():
    truth = EventLog(kicks(10), (IntervalEvent("c0", "Pass", 10, 40),))
    report = evaluate(EventLog(kicks(10)), truth)
    content = report.to_dict()
    assert set(content) == {"atomic", "complex", "macro"}
    assert set(content["macro"]) == {"atomic", "complex", "overall"}
    assert content["complex"]["Pass"]["false_negatives"] == 1

    table = report_frame(report)
    assert list(table["event"]) == ["KickingTheBall", "Pass", "macro", "macro", "macro"]
    text = render_report(report)
    assert "macro" in text and "KickingTheBall" in text

    doubled = report + report
    assert doubled.atomic["KickingTheBall"] == EventMetric(2, 0, 0)
    assert isinstance(doubled, MetricsReport)
