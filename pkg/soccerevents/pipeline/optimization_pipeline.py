import glob
import os
import sys
from typing import List, Optional, Tuple

import pandas as pd

from soccerevents.components.parameter_optimizer import (OPTIMIZED_TYPES, DetectionProblem, OptimizationResult,
                                                         ParameterOptimizer, select_best_per_event)
from soccerevents.components.trace_ingestion import load_events, load_trace
from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import OptimizationArtifact
from soccerevents.entity.config_entity import DetectionPipelineConfig, OptimizationConfig, OptimizerConfig
from soccerevents.entity.trace_entity import EventLog, Trace
from soccerevents.exception.exception import NoTrainingData, SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.utils.main_utils.utils import read_yaml_file, write_json_file, write_text_file


def load_optimizer_config(config_path: Optional[str] = None, seed: Optional[int] = None) -> OptimizerConfig:
    """Optimizer settings from a JSON or YAML file, defaults when no file is given."""
    content = dict(read_yaml_file(config_path)) if config_path else {}
    if seed is not None:
        content["seed"] = seed
    return OptimizerConfig.from_dict(content)


def training_pairs(train_dir: str) -> List[Tuple[str, str]]:
    """
    ``(trace, truth)`` file pairs below a directory: every ``trace.csv`` next to a
    ``truth.jsonl``, and every other ``name.csv`` next to a ``name.jsonl``.
    """
    if not os.path.isdir(train_dir):
        raise NoTrainingData(f"training directory {train_dir} does not exist")
    pairs = []
    for csv_path in sorted(glob.glob(os.path.join(train_dir, "**", "*.csv"), recursive=True)):
        folder, name = os.path.split(csv_path)
        if name == detection_pipeline.TRACE_FILE_NAME:
            truth_path = os.path.join(folder, detection_pipeline.TRUTH_FILE_NAME)
        else:
            truth_path = os.path.splitext(csv_path)[0] + ".jsonl"
        if os.path.exists(truth_path):
            pairs.append((csv_path, truth_path))
        else:
            logging.warning(f"Skipping {csv_path}: no ground truth at {truth_path}")
    if not pairs:
        raise NoTrainingData(f"no trace with ground truth below {train_dir}")
    return pairs


class OptimizationPipeline:
    """
    Searches atomic rule parameters on a directory of annotated traces and writes
    the final archive with its telemetry.

    Attributes:
        config (OptimizerConfig): Search settings.
        optimization_config (OptimizationConfig): Output paths; the archive path given
            on the command line moves all outputs next to it.
    """

    def __init__(self, config: Optional[OptimizerConfig] = None,
                 pipeline_config: Optional[DetectionPipelineConfig] = None, archive_path: Optional[str] = None):
        self.config = config or OptimizerConfig()
        self.optimization_config = OptimizationConfig(pipeline_config or DetectionPipelineConfig())
        if archive_path is not None:
            folder = os.path.dirname(archive_path)
            oc = self.optimization_config
            oc.optimizer_dir = folder
            oc.archive_file_path = archive_path
            oc.telemetry_file_path = os.path.join(folder, detection_pipeline.OPTIMIZER_TELEMETRY_FILE_NAME)
            oc.hypervolume_file_path = os.path.join(folder, detection_pipeline.OPTIMIZER_HYPERVOLUME_FILE_NAME)

    def start_data_ingestion(self, train_dir: str) -> Tuple[List[Trace], List[EventLog]]:
        try:
            traces, truths = [], []
            for trace_path, truth_path in training_pairs(train_dir):
                traces.append(load_trace(trace_path))
                truths.append(load_events(truth_path))
            logging.info(f"Loaded {len(traces)} training traces from {train_dir}")
            return traces, truths

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def start_optimization(self, traces: List[Trace], truths: List[EventLog]) -> Tuple[DetectionProblem,
                                                                                       OptimizationResult]:
        problem = DetectionProblem(traces, truths, self.config)
        return problem, ParameterOptimizer(problem, self.config).initiate_optimization()

    def save_results(self, problem: DetectionProblem, result: OptimizationResult) -> OptimizationArtifact:
        """
        Archive JSON with every member's genes, parameters, objectives and training
        F-scores, plus the best member of each optimized type; telemetry as CSV.
        """
        try:
            oc = self.optimization_config
            scores = [problem.score_parameters(m.params) for m in result.archive]
            members = []
            for member, score in zip(result.archive, scores):
                content = member.to_dict(problem.space)
                content["f_scores"] = {name: score[name].f_score for name in OPTIMIZED_TYPES}
                content["macro_f"] = sum(content["f_scores"].values()) / len(OPTIMIZED_TYPES)
                members.append(content)
            best = select_best_per_event(scores) if scores else {}
            write_json_file(oc.archive_file_path, {
                "seed": self.config.seed,
                "population_size": self.config.population_size,
                "generations": self.config.generations,
                "detector": {"smoothing_window": self.config.detector.smoothing_window,
                             "speed_span": self.config.detector.speed_span,
                             "strike_radius": self.config.detector.strike_radius},
                "archive": members,
                "best_per_event": best,
            })
            gene_columns = ["generation", "gene", "mean", "std"]
            write_text_file(oc.telemetry_file_path,
                            pd.DataFrame(result.telemetry.gene_rows(), columns=gene_columns).to_csv(index=False))
            hv_columns = ["generation", "hypervolume", "archive_size"]
            write_text_file(oc.hypervolume_file_path,
                            pd.DataFrame(result.telemetry.hypervolume_rows(), columns=hv_columns).to_csv(index=False))
            return OptimizationArtifact(oc.archive_file_path, oc.telemetry_file_path, oc.hypervolume_file_path,
                                        max((m["macro_f"] for m in members), default=0.0))

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def run_pipeline(self, train_dir: str) -> OptimizationArtifact:
        try:
            traces, truths = self.start_data_ingestion(train_dir)
            problem, result = self.start_optimization(traces, truths)
            artifact = self.save_results(problem, result)
            logging.info(f"Optimization artifact: {artifact}")
            return artifact

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)
