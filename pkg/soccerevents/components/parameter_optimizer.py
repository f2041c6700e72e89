import sys
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import mlflow
import numpy as np

from soccerevents.components.atomic_detector import detect_atomic
from soccerevents.components.feature_extraction import smooth_trace
from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import EventMetric, GenerationRecord, ObjectivePoint, Telemetry
from soccerevents.entity.config_entity import DetectorConfig, OptimizerConfig, RuleParameterSet
from soccerevents.entity.trace_entity import EventLog, Trace
from soccerevents.exception.exception import NoArchive, NoTrainingData, SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.utils.ml_utils.genetic.genome import GeneGrid, Genome, GenomeSpace, RuleGenomeSpace
from soccerevents.utils.ml_utils.genetic.operators import binary_tournament, blx_crossover, mutate
from soccerevents.utils.ml_utils.genetic.spea2 import (environmental_selection, hypervolume, nondominated,
                                                        spea2_fitness)
from soccerevents.utils.ml_utils.metric.detection_metric import get_detection_score

OPTIMIZED_TYPES = detection_pipeline.PARAMETERIZED_EVENT_TYPES


def score_parameters(params: RuleParameterSet, traces: Sequence[Trace], truths: Sequence[EventLog],
                     tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES,
                     detector: Optional[DetectorConfig] = None) -> Dict[str, EventMetric]:
    """Counts of each optimized atomic type, summed over the traces, detected with the ``detector`` options."""
    totals = {name: EventMetric() for name in OPTIMIZED_TYPES}
    for trace, truth in zip(traces, truths):
        detected = detect_atomic(trace, params, detector)
        for name in OPTIMIZED_TYPES:
            totals[name] = totals[name] + get_detection_score(
                [e for e in detected if e.event_type == name], truth.atomic_of(name), tolerance=tolerance)
    return totals


def weighted_objectives(scores: Dict[str, EventMetric], weights: Dict[str, float]) -> Tuple[float, float]:
    """
    Weighted mean precision and recall.

    Types with neither detections nor ground truth carry no information and are
    left out of the average.
    """
    used = {name: m for name, m in scores.items()
            if m.true_positives + m.false_positives + m.false_negatives > 0 and weights.get(name, 0.0) > 0}
    total = sum(weights[name] for name in used)
    if total == 0:
        return 0.0, 0.0
    precision = sum(weights[name] * m.precision for name, m in used.items()) / total
    recall = sum(weights[name] * m.recall for name, m in used.items()) / total
    return precision, recall


class DetectionProblem:
    """
    Maximizes mean precision and mean recall of the atomic detector on
    training traces with ground truth.

    The traces are smoothed once with the configured detector options; every
    genome is then scored with the remaining options (speed span, strike radius).
    """

    def __init__(self, traces: Sequence[Trace], truths: Sequence[EventLog], config: OptimizerConfig,
                 tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES,
                 possession_requires_comoving: bool = False):
        if not traces or len(traces) != len(truths) or not any(t.atomic for t in truths):
            raise NoTrainingData()
        self.traces = [smooth_trace(trace, config.detector.smoothing_window) for trace in traces]
        self.truths = list(truths)
        self.weights = dict(config.objective_weights)
        self.tolerance = tolerance
        self.detector = replace(config.detector, smoothing_window=1)
        self.space = RuleGenomeSpace(config.grids, config.full_threshold_genome, possession_requires_comoving)

    def score_parameters(self, params: RuleParameterSet) -> Dict[str, EventMetric]:
        return score_parameters(params, self.traces, self.truths, self.tolerance, self.detector)

    def scores(self, genome: Genome) -> Dict[str, EventMetric]:
        return self.score_parameters(self.space.decode(genome))

    def evaluate(self, genome: Genome) -> Tuple[float, float]:
        return weighted_objectives(self.scores(genome), self.weights)

    def phenotype(self, genome: Genome) -> RuleParameterSet:
        return self.space.decode(genome)


class SchafferProblem:
    """
    Bi-objective test problem on ``x in [0, 2]``: minimize ``x^2`` and ``(x - 2)^2``,
    posed as maximizing ``1 - f/4`` so both objectives lie in ``[0, 1]``.
    The Pareto set is the whole interval and its front dominates an area of 5/6.
    """
    OPTIMAL_HYPERVOLUME = 5.0 / 6.0

    def __init__(self, step: float = 0.01):
        self.space = GenomeSpace([GeneGrid("x", 0.0, 2.0, step)])

    def evaluate(self, genome: Genome) -> Tuple[float, float]:
        x = genome.genes[0]
        return 1.0 - x * x / 4.0, 1.0 - (x - 2.0) ** 2 / 4.0

    def phenotype(self, genome: Genome) -> None:
        return None


@dataclass
class ArchiveMember:
    """
    Individual kept by environmental selection.

    Attributes:
        genome (Genome): Encoded solution.
        objectives (ObjectivePoint): Maximized objectives.
        fitness (float): SPEA2 fitness in the last generation; below 1 when nondominated.
        params (RuleParameterSet, optional): Decoded rule parameters, for detection problems.
    """
    genome: Genome
    objectives: ObjectivePoint
    fitness: float
    params: Optional[RuleParameterSet] = None

    def to_dict(self, space: GenomeSpace) -> dict:
        content = {
            "genes": space.gene_values(self.genome),
            "mean_precision": self.objectives.mean_precision,
            "mean_recall": self.objectives.mean_recall,
            "fitness": self.fitness,
        }
        if self.params is not None:
            content["params"] = self.params.to_dict()
        return content


@dataclass
class OptimizationResult:
    archive: List[ArchiveMember]
    telemetry: Telemetry = field(default_factory=Telemetry)

    @property
    def front(self) -> List[ArchiveMember]:
        points = np.array([m.objectives.as_tuple() for m in self.archive]).reshape(-1, 2)
        return [self.archive[i] for i in nondominated(points)]


_worker_problem = None


def _init_worker(problem) -> None:
    global _worker_problem
    _worker_problem = problem


def _evaluate_in_worker(genome: Genome) -> Tuple[float, float]:
    return _worker_problem.evaluate(genome)


class ParameterOptimizer:
    """
    SPEA2 search: each generation scores the offspring together with the archive,
    keeps the best by environmental selection, and breeds the next offspring from
    the archive by binary tournament, blend crossover and resampling mutation.

    Objective values are cached by genome, so an individual is evaluated once
    per run however often it survives or reappears.
    """

    def __init__(self, problem, config: Optional[OptimizerConfig] = None):
        try:
            self.problem = problem
            self.config = config or OptimizerConfig()
            self.space: GenomeSpace = problem.space
            self._cache: Dict[Tuple, Tuple[float, float]] = {}
            self._executor: Optional[Executor] = None
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def evaluate(self, genomes: Sequence[Genome]) -> np.ndarray:
        pending: Dict[Tuple, Genome] = {}
        for genome in genomes:
            if genome.key not in self._cache and genome.key not in pending:
                pending[genome.key] = genome
        if pending:
            todo = list(pending.values())
            if self._executor is not None and len(todo) > 1:
                chunk = max(1, len(todo) // (4 * self.config.workers))
                results = list(self._executor.map(_evaluate_in_worker, todo, chunksize=chunk))
            else:
                results = [self.problem.evaluate(g) for g in todo]
            for genome, objectives in zip(todo, results):
                self._cache[genome.key] = tuple(float(v) for v in objectives)
        return np.array([self._cache[g.key] for g in genomes], dtype=float).reshape(-1, 2)

    def record(self, generation: int, population: Sequence[Genome], archive_points: np.ndarray) -> GenerationRecord:
        values = np.array([list(self.space.gene_values(g).values()) for g in population], dtype=float)
        names = list(self.space.gene_values(population[0]).keys())
        front = archive_points[nondominated(archive_points)] if len(archive_points) else archive_points
        return GenerationRecord(
            generation=generation,
            gene_mean={name: float(v) for name, v in zip(names, values.mean(axis=0))},
            gene_std={name: float(v) for name, v in zip(names, values.std(axis=0))},
            front=[(float(a), float(b)) for a, b in front],
            hypervolume=hypervolume(front),
            archive_size=len(archive_points),
        )

    def vary(self, archive: Sequence[Genome], fitness: np.ndarray, rng: np.random.Generator) -> List[Genome]:
        config = self.config
        parents = binary_tournament(fitness, 2 * config.population_size, rng)
        offspring = []
        for i in range(config.population_size):
            first, second = archive[parents[2 * i]], archive[parents[2 * i + 1]]
            if rng.random() < config.crossover_probability:
                child = blx_crossover(first, second, self.space, config.blx_alpha, rng)
            else:
                child = first
            offspring.append(mutate(child, self.space, config.mutation_probability, rng, config.mutation_mode))
        return offspring

    def _generations(self) -> OptimizationResult:
        config = self.config
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(config.generations + 1)]
        population = [self.space.random(streams[0]) for _ in range(config.population_size)]
        archive: List[Genome] = []
        archive_fitness = np.zeros(0)
        telemetry = Telemetry()

        for generation in range(config.generations + 1):
            combined = population + archive
            points = self.evaluate(combined)
            fitness = spea2_fitness(points)
            keep = environmental_selection(points, fitness, config.archive_size)
            archive = [combined[i] for i in keep]
            archive_points = points[keep]
            archive_fitness = fitness.value[keep]

            record = self.record(generation, population, archive_points)
            telemetry.records.append(record)
            logging.info(f"Generation {generation}: front of {len(record.front)} in archive of "
                         f"{record.archive_size}, hypervolume {record.hypervolume:.4f}")

            if generation == config.generations:
                break
            population = self.vary(archive, archive_fitness, streams[generation + 1])

        members = [ArchiveMember(g, ObjectivePoint(*map(float, p)), float(f), self.problem.phenotype(g))
                   for g, p, f in zip(archive, archive_points, archive_fitness)]
        return OptimizationResult(members, telemetry)

    def initiate_optimization(self) -> OptimizationResult:
        try:
            logging.info(f"Optimization started: population {self.config.population_size}, "
                         f"{self.config.generations} generations, archive {self.config.archive_size}, "
                         f"{self.space.mutable_genes} genes")
            if self.config.workers > 1:
                with ProcessPoolExecutor(max_workers=self.config.workers, initializer=_init_worker,
                                         initargs=(self.problem,)) as executor:
                    self._executor = executor
                    try:
                        result = self._generations()
                    finally:
                        self._executor = None
            else:
                result = self._generations()
            logging.info(f"Optimization finished with {len(result.archive)} archive members, "
                         f"{len(self._cache)} distinct individuals evaluated")
            if self.config.track_mlflow:
                self.track_mlflow(result)
            return result

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def track_mlflow(self, result: OptimizationResult) -> None:
        with mlflow.start_run():
            mlflow.log_params({
                "population_size": self.config.population_size,
                "generations": self.config.generations,
                "archive_size": self.config.archive_size,
                "seed": self.config.seed,
                "smoothing_window": self.config.detector.smoothing_window,
                "speed_span": self.config.detector.speed_span,
                "strike_radius": self.config.detector.strike_radius,
            })
            for record in result.telemetry.records:
                mlflow.log_metric("hypervolume", record.hypervolume, step=record.generation)
            front = result.front
            mlflow.log_metric("best_mean_precision", max(m.objectives.mean_precision for m in front))
            mlflow.log_metric("best_mean_recall", max(m.objectives.mean_recall for m in front))


def run_optimization(train_traces: Sequence[Trace], truth_logs: Sequence[EventLog],
                     config: Optional[OptimizerConfig] = None, **problem_options) -> OptimizationResult:
    """
    Searches atomic rule parameters on training traces.

    Args:
        train_traces (Sequence[Trace]): Training traces.
        truth_logs (Sequence[EventLog]): Ground truth of each trace.
        config (OptimizerConfig, optional): Search settings.

    Returns:
        OptimizationResult: Final archive and per-generation telemetry.

    Raises:
        NoTrainingData: If no trace with atomic ground truth is given.
    """
    config = config or OptimizerConfig()
    problem = DetectionProblem(train_traces, truth_logs, config, **problem_options)
    return ParameterOptimizer(problem, config).initiate_optimization()


def select_best_per_event(scores: Sequence[Dict[str, EventMetric]]) -> Dict[str, int]:
    """Index of the member with the highest F-score of each type; ties go to the higher macro F, then the first."""
    if not scores:
        raise NoArchive()
    macro = [sum(s[name].f_score for name in OPTIMIZED_TYPES) / len(OPTIMIZED_TYPES) for s in scores]
    best = {}
    for name in OPTIMIZED_TYPES:
        best[name] = max(range(len(scores)), key=lambda i: (scores[i][name].f_score, macro[i], -i))
    return best


def best_per_event(archive: Sequence[ArchiveMember], eval_traces: Sequence[Trace], truth_logs: Sequence[EventLog],
                   tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES,
                   detector: Optional[DetectorConfig] = None) -> Dict[str, ArchiveMember]:
    """
    Archive member maximizing the F-score of each optimized atomic type, detected
    with the ``detector`` options the search used.

    Raises:
        NoArchive: If the archive is empty.
        NoTrainingData: If no evaluation trace is given.
    """
    if not archive:
        raise NoArchive()
    if not eval_traces or len(eval_traces) != len(truth_logs):
        raise NoTrainingData("best_per_event needs evaluation traces with ground truth")
    scores = [score_parameters(m.params, eval_traces, truth_logs, tolerance, detector) for m in archive]
    chosen = select_best_per_event(scores)
    for name, index in chosen.items():
        logging.info(f"Best {name}: archive member {index}, F-score {scores[index][name].f_score:.3f}")
    return {name: archive[index] for name, index in chosen.items()}
