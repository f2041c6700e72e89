import math
import os
from dataclasses import dataclass, field, fields, replace
from datetime import datetime
from typing import Dict, Mapping, Optional, Tuple

from soccerevents.constant import detection_pipeline
from soccerevents.exception.exception import DataError, OutOfGrid, SoccerEventsException


class DetectionPipelineConfig:
    """
    Directory layout of one pipeline run.

    Every run writes below a timestamped folder of the artifact directory, so
    repeated runs never overwrite each other.

    Attributes:
        pipeline_name (str): Name of the pipeline.
        artifact_dir (str): Timestamped folder holding this run's outputs.
        timestamp (str): Run timestamp (MM_DD_YYYY_HH_MM_SS).
    """

    def __init__(self, timestamp: Optional[datetime] = None, artifact_root: Optional[str] = None):
        if timestamp is None:
            timestamp = datetime.now()
        timestamp = timestamp.strftime("%m_%d_%Y_%H_%M_%S")
        self.pipeline_name = detection_pipeline.PIPELINE_NAME
        self.artifact_name = artifact_root or detection_pipeline.ARTIFACT_DIR
        self.artifact_dir = os.path.join(self.artifact_name, timestamp)
        self.timestamp: str = timestamp


class DetectionConfig:
    """
    Output paths of the detection stage.

    Attributes:
        detection_dir (str): Stage folder.
        events_file_path (str): Detected events as JSONL.
        report_file_path (str): Evaluation report, written when ground truth is given.
    """

    def __init__(self, pipeline_config: DetectionPipelineConfig):
        self.detection_dir: str = os.path.join(pipeline_config.artifact_dir, detection_pipeline.DETECTION_DIR_NAME)
        self.events_file_path: str = os.path.join(self.detection_dir, detection_pipeline.EVENTS_FILE_NAME)
        self.report_file_path: str = os.path.join(self.detection_dir, detection_pipeline.REPORT_FILE_NAME)


class GenerationConfig:
    """
    Output paths of the scenario generation stage.

    Attributes:
        generation_dir (str): Stage folder, or the folder given on the command line.
        trace_file_path (str): Generated positions as CSV.
        truth_file_path (str): Ground truth as JSONL.
    """

    def __init__(self, pipeline_config: Optional[DetectionPipelineConfig] = None, output_dir: Optional[str] = None):
        if output_dir is None:
            pipeline_config = pipeline_config or DetectionPipelineConfig()
            output_dir = os.path.join(pipeline_config.artifact_dir, detection_pipeline.GENERATION_DIR_NAME)
        self.generation_dir: str = output_dir
        self.trace_file_path: str = os.path.join(output_dir, detection_pipeline.TRACE_FILE_NAME)
        self.truth_file_path: str = os.path.join(output_dir, detection_pipeline.TRUTH_FILE_NAME)


class OptimizationConfig:
    """
    Output paths of the optimization stage.

    Attributes:
        optimizer_dir (str): Stage folder.
        telemetry_file_path (str): Per-generation gene statistics as CSV.
        hypervolume_file_path (str): Per-generation archive hypervolume as CSV.
        archive_file_path (str): Final archive as JSON.
    """

    def __init__(self, pipeline_config: DetectionPipelineConfig):
        self.optimizer_dir: str = os.path.join(pipeline_config.artifact_dir, detection_pipeline.OPTIMIZER_DIR_NAME)
        self.telemetry_file_path: str = os.path.join(
            self.optimizer_dir, detection_pipeline.OPTIMIZER_TELEMETRY_FILE_NAME)
        self.hypervolume_file_path: str = os.path.join(
            self.optimizer_dir, detection_pipeline.OPTIMIZER_HYPERVOLUME_FILE_NAME)
        self.archive_file_path: str = os.path.join(self.optimizer_dir, detection_pipeline.OPTIMIZER_ARCHIVE_FILE_NAME)


def on_grid(value: float, low: float, high: float, step: float) -> bool:
    if value < low - 1e-9 or value > high + 1e-9:
        return False
    steps = (value - low) / step
    return abs(steps - round(steps)) < 1e-6


def _check_range(name: str, value, grid: Tuple[float, float, float]) -> None:
    low, high, _ = grid
    if value is None:
        return
    if not (low - 1e-9 <= value <= high + 1e-9) or (isinstance(value, float) and math.isnan(value)):
        raise OutOfGrid(name, value)


@dataclass(frozen=True)
class RuleThresholds:
    """
    Thresholds of one parameterized atomic rule.

    Attributes:
        inner_distance (float): Player-to-ball distance below which the player is engaged (m).
        speed (float): Ball speed threshold (m/s).
        window (int): Frames the rule looks ahead of the anchor frame.
        outer_distance (float, optional): Opponent-to-ball radius (m); used by possession and tackle.
        acceleration (float, optional): Ball acceleration magnitude (m/s^2); used by kick and deflection.
    """
    inner_distance: float
    speed: float
    window: int
    outer_distance: Optional[float] = None
    acceleration: Optional[float] = None

    def validate(self, rule: str) -> None:
        _check_range(f"{rule}.window", self.window, detection_pipeline.OPTIMIZER_WINDOW_GRID)
        _check_range(f"{rule}.speed", self.speed, detection_pipeline.OPTIMIZER_SPEED_GRID)
        _check_range(f"{rule}.inner_distance", self.inner_distance, detection_pipeline.OPTIMIZER_DISTANCE_GRID)
        _check_range(f"{rule}.outer_distance", self.outer_distance, detection_pipeline.OPTIMIZER_DISTANCE_GRID)
        _check_range(f"{rule}.acceleration", self.acceleration, detection_pipeline.OPTIMIZER_ACCELERATION_GRID)
        if int(self.window) != self.window:
            raise OutOfGrid(f"{rule}.window", self.window)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


_RULE_FIELDS = {
    "KickingTheBall": "kicking",
    "BallPossession": "possession",
    "Tackle": "tackle",
    "BallDeflection": "deflection",
}


@dataclass(frozen=True)
class RuleParameterSet:
    """
    Phenotype of an optimizer genome: thresholds and windows of the four
    parameterized atomic rules, plus the order in which they are evaluated.

    Attributes:
        kicking (RuleThresholds): KickingTheBall thresholds.
        possession (RuleThresholds): BallPossession thresholds.
        tackle (RuleThresholds): Tackle thresholds.
        deflection (RuleThresholds): BallDeflection thresholds.
        evaluation_order (tuple): Permutation of the four rule names.
        possession_requires_comoving (bool): Extra possession clause; the possessor and the
            ball must share the same moving status over the window.
    """
    kicking: RuleThresholds
    possession: RuleThresholds
    tackle: RuleThresholds
    deflection: RuleThresholds
    evaluation_order: Tuple[str, ...] = detection_pipeline.PARAMETERIZED_EVENT_TYPES
    possession_requires_comoving: bool = False

    def __post_init__(self):
        object.__setattr__(self, "evaluation_order", tuple(self.evaluation_order))
        if sorted(self.evaluation_order) != sorted(detection_pipeline.PARAMETERIZED_EVENT_TYPES):
            raise SoccerEventsException(f"evaluation order {self.evaluation_order} is not a permutation of the rules")
        for name, attr in _RULE_FIELDS.items():
            getattr(self, attr).validate(name)
        if self.possession.outer_distance is None or self.tackle.outer_distance is None:
            raise SoccerEventsException("possession and tackle need an outer distance")
        if self.kicking.acceleration is None or self.deflection.acceleration is None:
            raise SoccerEventsException("kicking and deflection need an acceleration threshold")

    def rule(self, event_type: str) -> RuleThresholds:
        return getattr(self, _RULE_FIELDS[event_type])

    @property
    def max_window(self) -> int:
        return max(self.rule(name).window for name in _RULE_FIELDS)

    def precedes(self, first: str, second: str) -> bool:
        return self.evaluation_order.index(first) < self.evaluation_order.index(second)

    def with_rule(self, event_type: str, **changes) -> "RuleParameterSet":
        return replace(self, **{_RULE_FIELDS[event_type]: replace(self.rule(event_type), **changes)})

    @classmethod
    def reference(cls) -> "RuleParameterSet":
        return cls.from_dict({})

    @classmethod
    def from_dict(cls, content: Mapping) -> "RuleParameterSet":
        """Build from a parameter file mapping; rules or keys left out take reference values."""
        rules = {}
        for name, attr in _RULE_FIELDS.items():
            values = dict(detection_pipeline.ATOMIC_REFERENCE_PARAMS[name])
            values.update(content.get(name, {}) or {})
            values["window"] = int(values["window"])
            rules[attr] = RuleThresholds(**values)
        return cls(
            evaluation_order=tuple(content.get("evaluation_order", detection_pipeline.PARAMETERIZED_EVENT_TYPES)),
            possession_requires_comoving=bool(content.get("possession_requires_comoving", False)),
            **rules,
        )

    def to_dict(self) -> dict:
        content = {name: self.rule(name).to_dict() for name in _RULE_FIELDS}
        content["evaluation_order"] = list(self.evaluation_order)
        if self.possession_requires_comoving:
            content["possession_requires_comoving"] = True
        return content


@dataclass(frozen=True)
class DetectorConfig:
    """
    Options of the full detector beyond the rule thresholds.

    Attributes:
        smoothing_window (int): Width of the moving average applied to positions; 1 disables it.
        speed_span (int): Frames every speed is measured over; 1 compares consecutive frames.
        strike_radius (int): Kicks and deflections of one player closer than this many frames
            collapse into the strongest, placed at its largest speed change; 0 keeps every anchor.
        merge_gap (int): Largest gap in frames bridged when merging possession and tackle atoms.
        rules_path (str, optional): Rule file replacing the shipped complex rules.
    """
    smoothing_window: int = detection_pipeline.FEATURE_SMOOTHING_WINDOW
    speed_span: int = detection_pipeline.FEATURE_SPEED_SPAN_FRAMES
    strike_radius: int = detection_pipeline.ATOMIC_STRIKE_RADIUS_FRAMES
    merge_gap: int = detection_pipeline.COMPLEX_MERGE_GAP_FRAMES
    rules_path: Optional[str] = None

    def __post_init__(self):
        if self.smoothing_window < 1 or self.speed_span < 1:
            raise DataError(f"smoothing window and speed span must be 1 or more, got "
                            f"{self.smoothing_window} and {self.speed_span}")
        if self.strike_radius < 0 or self.merge_gap < 0:
            raise DataError(f"strike radius and merge gap must be non-negative, got "
                            f"{self.strike_radius} and {self.merge_gap}")

    @property
    def margin(self) -> int:
        """Extra frames on each side a block of anchors reads beyond its rule windows."""
        return self.speed_span + self.smoothing_window // 2

    @classmethod
    def from_dict(cls, content: Mapping) -> "DetectorConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(content) - known
        if unknown:
            raise DataError(f"unknown detector settings: {sorted(unknown)}")
        return cls(**dict(content))


@dataclass(frozen=True)
class EvaluationConfig:
    tolerance: int = detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES
    iou_threshold: float = detection_pipeline.EVALUATION_INTERVAL_IOU_THRESHOLD


def _default_grids() -> Dict[str, Tuple[float, float, float]]:
    return {
        "window": detection_pipeline.OPTIMIZER_WINDOW_GRID,
        "speed": detection_pipeline.OPTIMIZER_SPEED_GRID,
        "distance": detection_pipeline.OPTIMIZER_DISTANCE_GRID,
        "acceleration": detection_pipeline.OPTIMIZER_ACCELERATION_GRID,
    }


def _default_weights() -> Dict[str, float]:
    return {name: 1.0 for name in detection_pipeline.PARAMETERIZED_EVENT_TYPES}


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Settings of the evolutionary parameter search.

    Attributes:
        population_size (int): Offspring per generation.
        generations (int): Number of generations after the initial one.
        archive_size (int): Size of the elite archive.
        crossover_probability (float): Chance a mating pair is recombined.
        mutation_probability (float): Chance an individual (or gene, per mode) is mutated.
        blx_alpha (float): Extension factor of the blend crossover.
        seed (int): Seed of the random stream.
        mutation_mode (str): "single" resamples one gene per mutated individual,
            "per_gene" tests every gene independently.
        full_threshold_genome (bool): Encode all four thresholds for each rule (20 genes)
            instead of the twelve the rules read (16 genes).
        objective_weights (dict): Weight of each atomic event type in the objectives.
        grids (dict): (low, high, step) of window, speed, distance and acceleration genes.
        workers (int): Processes evaluating fitness; 1 evaluates in-process.
        track_mlflow (bool): Log the final archive to the active mlflow tracking server.
        detector (DetectorConfig): Smoothing, speed span and strike radius the candidates are scored with.
    """
    population_size: int = detection_pipeline.OPTIMIZER_POPULATION_SIZE
    generations: int = detection_pipeline.OPTIMIZER_GENERATIONS
    archive_size: int = detection_pipeline.OPTIMIZER_ARCHIVE_SIZE
    crossover_probability: float = detection_pipeline.OPTIMIZER_CROSSOVER_PROBABILITY
    mutation_probability: float = detection_pipeline.OPTIMIZER_MUTATION_PROBABILITY
    blx_alpha: float = detection_pipeline.OPTIMIZER_BLX_ALPHA
    seed: int = detection_pipeline.OPTIMIZER_SEED
    mutation_mode: str = "single"
    full_threshold_genome: bool = False
    objective_weights: Dict[str, float] = field(default_factory=_default_weights)
    grids: Dict[str, Tuple[float, float, float]] = field(default_factory=_default_grids)
    workers: int = 1
    track_mlflow: bool = False
    detector: DetectorConfig = field(default_factory=DetectorConfig)

    def __post_init__(self):
        if isinstance(self.detector, Mapping):
            object.__setattr__(self, "detector", DetectorConfig.from_dict(self.detector))
        if self.population_size < 2 or self.archive_size < 1 or self.generations < 0:
            raise SoccerEventsException("population must hold 2+ individuals, archive 1+, generations 0+")
        if not 0.0 <= self.crossover_probability <= 1.0 or not 0.0 <= self.mutation_probability <= 1.0:
            raise SoccerEventsException("operator probabilities must lie in [0, 1]")
        if self.mutation_mode not in ("single", "per_gene"):
            raise SoccerEventsException(f"unknown mutation mode {self.mutation_mode!r}")
        grids = _default_grids()
        grids.update({k: tuple(v) for k, v in (self.grids or {}).items()})
        object.__setattr__(self, "grids", grids)
        weights = _default_weights()
        weights.update(self.objective_weights or {})
        object.__setattr__(self, "objective_weights", weights)

    @classmethod
    def from_dict(cls, content: Mapping) -> "OptimizerConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(content) - known
        if unknown:
            raise DataError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**dict(content))


@dataclass(frozen=True)
class NoiseSpec:
    """
    Corruption applied to a clean trace.

    Attributes:
        sigma (float): Standard deviation of the Gaussian jitter added to every coordinate (m).
        dropout (float): Probability that a row is lost and re-filled by interpolation.
    """
    sigma: float = 0.0
    dropout: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise DataError(f"noise sigma must be non-negative, got {self.sigma}")
        if not 0.0 <= self.dropout <= detection_pipeline.SCENARIO_MAX_DROPOUT:
            raise DataError(
                f"dropout must lie in [0, {detection_pipeline.SCENARIO_MAX_DROPOUT}], got {self.dropout}")


SCENARIO_KINDS = (
    "Pass", "Cross", "FilteringPass", "PassThenGoal", "CrossThenGoal", "FilteringPassThenGoal",
    "Tackle", "Shot", "Dribble",
)
SCENARIO_OUTCOMES = {
    "Tackle": ("Won", "Lost"),
    "Shot": ("Goal", "Out", "Saved"),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Script of one scenario.

    Attributes:
        kind (str): One of ``SCENARIO_KINDS``.
        outcome (str, optional): "Won"/"Lost" for tackles, "Goal"/"Out"/"Saved" for shots.
        placements (dict): Starting positions by actor (kicker, receiver, shooter,
            possessor, tackler, defender, keeper) and the dribble end point "target";
            missing entries take the kind's defaults.
        v0 (float): Kick speed (m/s).
        mu (float): Rolling deceleration of the ball (m/s^2).
        team (str): Attacking team, "home" or "away".
        offset (int): First frame of the scenario inside a match.
        save_style (str): "parry" deflects a saved shot, "catch" holds it.
        seed (int): Seed used when the scenario is generated on its own.
    """
    kind: str
    outcome: Optional[str] = None
    placements: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    v0: float = 14.0
    mu: float = 3.0
    team: str = "home"
    offset: int = 0
    save_style: str = "parry"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise DataError(f"unknown scenario kind {self.kind!r}")
        allowed = SCENARIO_OUTCOMES.get(self.kind)
        if allowed is not None:
            outcome = self.outcome or allowed[0]
            if outcome not in allowed:
                raise DataError(f"{self.kind} outcome must be one of {allowed}, got {self.outcome!r}")
            object.__setattr__(self, "outcome", outcome)
        low, high = detection_pipeline.SCENARIO_SPEED_RANGE
        if not low <= self.v0 <= high:
            raise DataError(f"kick speed {self.v0} outside [{low}, {high}]")
        low, high = detection_pipeline.SCENARIO_FRICTION_RANGE
        if not low <= self.mu <= high:
            raise DataError(f"friction {self.mu} outside [{low}, {high}]")
        if self.team not in ("home", "away"):
            raise DataError(f"attacking team must be home or away, got {self.team!r}")
        if self.save_style not in ("parry", "catch"):
            raise DataError(f"save style must be parry or catch, got {self.save_style!r}")
        if self.offset < 0:
            raise DataError("scenario offset must be non-negative")
        placements = {}
        for actor, point in (self.placements or {}).items():
            x, y = float(point[0]), float(point[1])
            if not (0.0 <= x <= detection_pipeline.FIELD_LENGTH_M and 0.0 <= y <= detection_pipeline.FIELD_WIDTH_M):
                raise DataError(f"{actor} placed outside the pitch at ({x}, {y})")
            placements[actor] = (x, y)
        object.__setattr__(self, "placements", placements)

    @classmethod
    def from_dict(cls, content: Mapping) -> "ScenarioSpec":
        content = dict(content)
        unknown = set(content) - {f.name for f in fields(cls)}
        if unknown:
            raise DataError(f"unknown scenario settings: {sorted(unknown)}")
        if "placements" in content:
            content["placements"] = {k: tuple(v) for k, v in content["placements"].items()}
        return cls(**content)


@dataclass(frozen=True)
class RunConfig:
    """
    Parsed command line of one CLI invocation.

    Attributes:
        subcommand (str): generate, detect, evaluate, optimize or stats.
        inputs (tuple): Positional input paths.
        output (str, optional): Output path.
        rules_path (str, optional): Rule file overriding the shipped rules.
        params_path (str, optional): Parameter-set file.
        config_path (str, optional): Optimizer configuration file.
        seed (int, optional): Seed overriding the one in the configuration.
        verbosity (int): Positive for debug logging, negative for warnings only.
    """
    subcommand: str
    inputs: Tuple[str, ...] = ()
    output: Optional[str] = None
    rules_path: Optional[str] = None
    params_path: Optional[str] = None
    config_path: Optional[str] = None
    seed: Optional[int] = None
    verbosity: int = 0
