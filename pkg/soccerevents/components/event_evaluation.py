import sys
from typing import Dict, List, Optional

import pandas as pd

from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import EventMetric, MetricsReport
from soccerevents.entity.config_entity import EvaluationConfig
from soccerevents.entity.trace_entity import EventLog
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.utils.ml_utils.metric.detection_metric import get_detection_score


def _types_present(order, detected, truth) -> List[str]:
    names = {e.event_type for e in detected} | {e.event_type for e in truth}
    known = [name for name in order if name in names]
    return known + sorted(names - set(known))


class EventEvaluation:
    """
    Scores a detected event log against ground truth.

    Atomic events match within a frame tolerance, complex events by interval IoU.
    Only types occurring in either log are scored.
    """

    def __init__(self, config: Optional[EvaluationConfig] = None):
        self.config = config or EvaluationConfig()

    def score_atomic(self, detected: EventLog, truth: EventLog) -> Dict[str, EventMetric]:
        return {
            name: get_detection_score(detected.atomic_of(name), truth.atomic_of(name),
                                      tolerance=self.config.tolerance)
            for name in _types_present(detection_pipeline.ATOMIC_EVENT_TYPES, detected.atomic, truth.atomic)
        }

    def score_complex(self, detected: EventLog, truth: EventLog) -> Dict[str, EventMetric]:
        return {
            name: get_detection_score(detected.complex_of(name), truth.complex_of(name), interval=True,
                                      threshold=self.config.iou_threshold)
            for name in _types_present(detection_pipeline.COMPLEX_EVENT_TYPES, detected.complex, truth.complex)
        }

    def initiate_evaluation(self, detected: EventLog, truth: EventLog) -> MetricsReport:
        try:
            report = MetricsReport(self.score_atomic(detected, truth), self.score_complex(detected, truth))
            logging.info(f"Evaluation macro F-score {report.macro['f_score']:.3f} over "
                         f"{len(report.atomic)} atomic and {len(report.complex)} complex types")
            return report
        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)


def evaluate(detected: EventLog, truth: EventLog, config: Optional[EvaluationConfig] = None) -> MetricsReport:
    return EventEvaluation(config).initiate_evaluation(detected, truth)


def report_frame(report: MetricsReport) -> pd.DataFrame:
    rows = []
    for level, metrics in (("atomic", report.atomic), ("complex", report.complex)):
        for name, metric in metrics.items():
            rows.append({"level": level, "event": name, "tp": metric.true_positives,
                         "fp": metric.false_positives, "fn": metric.false_negatives,
                         "precision": metric.precision, "recall": metric.recall, "f_score": metric.f_score})
    for level, macro in (("atomic", report.atomic_macro), ("complex", report.complex_macro),
                         ("overall", report.macro)):
        rows.append({"level": level, "event": "macro", "tp": None, "fp": None, "fn": None, **macro})
    return pd.DataFrame(rows, columns=["level", "event", "tp", "fp", "fn", "precision", "recall", "f_score"])


def render_report(report: MetricsReport) -> str:
    """Aligned text table: one row per event type, then the macro averages."""
    table = report_frame(report)
    table[["tp", "fp", "fn"]] = table[["tp", "fp", "fn"]].astype("Int64").astype(str).replace("<NA>", "")
    return table.to_string(index=False, float_format=lambda v: f"{v:.3f}") + "\n"
