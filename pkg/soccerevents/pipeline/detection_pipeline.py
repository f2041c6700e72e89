import os
import sys
from typing import Iterable, Iterator, List, Optional

import pandas as pd

from soccerevents.components.complex_detector import duration_stats
from soccerevents.components.event_evaluation import EventEvaluation, render_report
from soccerevents.components.trace_ingestion import iter_trace_chunks, load_events, save_events
from soccerevents.components.trace_validation import TraceValidation
from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import DetectionArtifact, DurationSummary, MetricsReport
from soccerevents.entity.config_entity import (DetectionConfig, DetectionPipelineConfig, DetectorConfig,
                                               EvaluationConfig, RuleParameterSet)
from soccerevents.entity.trace_entity import EventLog, Trace
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.utils.main_utils.utils import read_yaml_file, write_json_file, write_text_file
from soccerevents.utils.ml_utils.model.estimator import EventDetector


def load_parameters(params_path: Optional[str] = None) -> RuleParameterSet:
    """Rule parameters from a JSON or YAML file; missing entries keep their reference values."""
    if params_path is None:
        return RuleParameterSet.reference()
    return RuleParameterSet.from_dict(read_yaml_file(params_path))


def iter_chunks(trace: Trace, frames: int = detection_pipeline.DETECTION_CHUNK_FRAMES) -> Iterator[Trace]:
    for first in range(trace.start_frame, trace.end_frame + 1, frames):
        yield trace.slice(first, min(first + frames - 1, trace.end_frame))


class DetectionPipeline:
    """
    Detects atomic and complex events in a positional file and, when ground truth is
    given, scores them.

    Attributes:
        detection_config (DetectionConfig): Output paths.
        detector_config (DetectorConfig): Smoothing, speed span, strike radius, merge gap and rule file.
        evaluation_config (EvaluationConfig): Matching tolerances.
        chunk_frames (int): Frames per chunk read from the positional file.
    """

    def __init__(self, pipeline_config: Optional[DetectionPipelineConfig] = None,
                 detector_config: Optional[DetectorConfig] = None,
                 evaluation_config: Optional[EvaluationConfig] = None):
        self.pipeline_config = pipeline_config or DetectionPipelineConfig()
        self.detection_config = DetectionConfig(self.pipeline_config)
        self.detector_config = detector_config or DetectorConfig()
        self.evaluation_config = evaluation_config or EvaluationConfig()
        self.chunk_frames = detection_pipeline.DETECTION_CHUNK_FRAMES

    def start_trace_ingestion(self, trace_path: str) -> Iterator[Trace]:
        """Chunks of the positional file, each checked as it is read."""
        try:
            chunks = iter_trace_chunks(trace_path, self.chunk_frames)
            for index, chunk in enumerate(chunks):
                validation = TraceValidation(chunk)
                diagnostics = validation.initiate_trace_validation() if index == 0 else validation.validate_bounds()
                for diagnostic in diagnostics:
                    logging.warning(f"{diagnostic.kind} at frame {diagnostic.frame}: {diagnostic.message}")
                yield chunk

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def start_detection(self, chunks: Iterable[Trace], params: RuleParameterSet) -> EventLog:
        """Atomic rules run over the chunks as they are read, with a bounded look-ahead."""
        try:
            detector = EventDetector(params, config=self.detector_config)
            return detector.detect_stream(chunks)

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def start_evaluation(self, detected: EventLog, truth: EventLog) -> MetricsReport:
        return EventEvaluation(self.evaluation_config).initiate_evaluation(detected, truth)

    def run_pipeline(self, trace_path: str, params_path: Optional[str] = None, truth_path: Optional[str] = None,
                     events_path: Optional[str] = None) -> DetectionArtifact:
        try:
            detected = self.start_detection(self.start_trace_ingestion(trace_path), load_parameters(params_path))
            events_path = events_path or self.detection_config.events_file_path
            save_events(detected, events_path)
            artifact = DetectionArtifact(events_path, len(detected.atomic), len(detected.complex))
            if truth_path is not None:
                report = self.start_evaluation(detected, load_events(truth_path))
                report_path = self.detection_config.report_file_path
                if events_path != self.detection_config.events_file_path:
                    report_path = os.path.join(os.path.dirname(events_path), detection_pipeline.REPORT_FILE_NAME)
                write_json_file(report_path, report.to_dict())
                artifact.report_file_path = report_path
            logging.info(f"Detection artifact: {artifact}")
            return artifact

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)


def evaluate_files(detected_path: str, truth_path: str, report_path: Optional[str] = None,
                   config: Optional[EvaluationConfig] = None) -> MetricsReport:
    """
    Scores a detected event file against a ground-truth file. The report is written
    as JSON when the path ends in ``.json``, as an aligned table otherwise.
    """
    report = EventEvaluation(config).initiate_evaluation(load_events(detected_path), load_events(truth_path))
    if report_path is not None:
        if report_path.endswith(".json"):
            write_json_file(report_path, report.to_dict())
        else:
            write_text_file(report_path, render_report(report))
    return report


def durations_frame(summaries: List[DurationSummary]) -> pd.DataFrame:
    columns = ["event_type", "count", "min_frames", "mean_frames", "max_frames",
               "min_seconds", "mean_seconds", "max_seconds"]
    return pd.DataFrame([s.to_dict() for s in summaries], columns=columns + ["fps"])[columns]


def event_durations(events_path: str, fps: float = detection_pipeline.TRACE_FPS,
                    output_path: Optional[str] = None) -> pd.DataFrame:
    """Duration summary of every complex event type of an event file, optionally saved as CSV."""
    try:
        table = durations_frame(duration_stats(load_events(events_path).complex, fps))
        if output_path is not None:
            write_text_file(output_path, table.to_csv(index=False))
            logging.info(f"Wrote duration summary of {len(table)} event types to {output_path}")
        return table

    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)
