from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class Diagnostic:
    """
    One violated trace invariant.

    Attributes:
        kind (str): OutOfBounds, DuplicateBall, MissingBall, GoalkeeperCount,
            BallWithTeam, NonContiguousFrames or BadFps.
        frame (int, optional): Frame where it was found.
        object_id (int, optional): Object concerned.
        message (str): Human readable explanation.
    """
    kind: str
    frame: Optional[int] = None
    object_id: Optional[int] = None
    message: str = ""


@dataclass
class EventMetric:
    """
    Detection counts and scores of one event type.

    Attributes:
        true_positives (int): Detections matched to a ground-truth event.
        false_positives (int): Unmatched detections.
        false_negatives (int): Unmatched ground-truth events.
    """
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0

    @property
    def precision(self) -> float:
        detected = self.true_positives + self.false_positives
        return self.true_positives / detected if detected else 0.0

    @property
    def recall(self) -> float:
        relevant = self.true_positives + self.false_negatives
        return self.true_positives / relevant if relevant else 0.0

    @property
    def f_score(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other: "EventMetric") -> "EventMetric":
        return EventMetric(self.true_positives + other.true_positives,
                           self.false_positives + other.false_positives,
                           self.false_negatives + other.false_negatives)

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
        }


def _macro(metrics: Dict[str, EventMetric]) -> Dict[str, float]:
    if not metrics:
        return {"precision": 0.0, "recall": 0.0, "f_score": 0.0}
    n = len(metrics)
    return {
        "precision": sum(m.precision for m in metrics.values()) / n,
        "recall": sum(m.recall for m in metrics.values()) / n,
        "f_score": sum(m.f_score for m in metrics.values()) / n,
    }


@dataclass
class MetricsReport:
    """
    Scores of a detected log against ground truth, per event type.

    Atomic and complex scores are kept apart because BallPossession and Tackle exist
    at both levels.

    Attributes:
        atomic (dict): Event type to EventMetric, matched within a frame tolerance.
        complex (dict): Event type to EventMetric, matched by interval overlap.
    """
    atomic: Dict[str, EventMetric] = field(default_factory=dict)
    complex: Dict[str, EventMetric] = field(default_factory=dict)

    @property
    def atomic_macro(self) -> Dict[str, float]:
        return _macro(self.atomic)

    @property
    def complex_macro(self) -> Dict[str, float]:
        return _macro(self.complex)

    @property
    def macro(self) -> Dict[str, float]:
        merged = {f"atomic:{k}": v for k, v in self.atomic.items()}
        merged.update({f"complex:{k}": v for k, v in self.complex.items()})
        return _macro(merged)

    def __add__(self, other: "MetricsReport") -> "MetricsReport":
        def combine(a: Dict[str, EventMetric], b: Dict[str, EventMetric]) -> Dict[str, EventMetric]:
            out = dict(a)
            for key, value in b.items():
                out[key] = out[key] + value if key in out else value
            return out
        return MetricsReport(combine(self.atomic, other.atomic), combine(self.complex, other.complex))

    def to_dict(self) -> dict:
        return {
            "atomic": {k: v.to_dict() for k, v in sorted(self.atomic.items())},
            "complex": {k: v.to_dict() for k, v in sorted(self.complex.items())},
            "macro": {
                "atomic": self.atomic_macro,
                "complex": self.complex_macro,
                "overall": self.macro,
            },
        }


@dataclass(frozen=True)
class ObjectivePoint:
    """Maximized objectives of one individual."""
    mean_precision: float
    mean_recall: float

    def as_tuple(self) -> Tuple[float, float]:
        return self.mean_precision, self.mean_recall


@dataclass
class GenerationRecord:
    """
    Telemetry of one generation.

    Attributes:
        generation (int): 0 for the initial population.
        gene_mean (dict): Gene name to population mean.
        gene_std (dict): Gene name to population standard deviation.
        front (list): Objective points of the nondominated archive members.
        hypervolume (float): Area dominated by the front above the origin.
        archive_size (int): Members kept by environmental selection.
    """
    generation: int
    gene_mean: Dict[str, float]
    gene_std: Dict[str, float]
    front: List[Tuple[float, float]]
    hypervolume: float
    archive_size: int


@dataclass
class Telemetry:
    records: List[GenerationRecord] = field(default_factory=list)

    def gene_rows(self) -> List[dict]:
        rows = []
        for record in self.records:
            for gene, mean in record.gene_mean.items():
                rows.append({"generation": record.generation, "gene": gene,
                             "mean": mean, "std": record.gene_std[gene]})
        return rows

    def hypervolume_rows(self) -> List[dict]:
        return [{"generation": r.generation, "hypervolume": r.hypervolume, "archive_size": r.archive_size}
                for r in self.records]


@dataclass(frozen=True)
class DurationSummary:
    """
    Duration statistics of one complex event type.

    Attributes:
        event_type (str): Complex event type.
        count (int): Number of instances.
        min_frames (int): Shortest instance (end - start).
        mean_frames (float): Mean duration in frames.
        max_frames (int): Longest instance.
        fps (float): Frame rate used for the second columns.
    """
    event_type: str
    count: int
    min_frames: int
    mean_frames: float
    max_frames: int
    fps: float

    @property
    def min_seconds(self) -> float:
        return self.min_frames / self.fps

    @property
    def mean_seconds(self) -> float:
        return self.mean_frames / self.fps

    @property
    def max_seconds(self) -> float:
        return self.max_frames / self.fps

    def to_dict(self) -> dict:
        content = asdict(self)
        content.update(min_seconds=self.min_seconds, mean_seconds=self.mean_seconds, max_seconds=self.max_seconds)
        return content


@dataclass
class GenerationArtifact:
    """
    Files produced by the scenario generation stage.

    Attributes:
        trace_file_path (str): Positional CSV.
        truth_file_path (str): Ground truth JSONL.
        frames (int): Length of the generated trace.
        atomic_count (int): Atomic ground-truth events.
        complex_count (int): Complex ground-truth events.
    """
    trace_file_path: str
    truth_file_path: str
    frames: int
    atomic_count: int
    complex_count: int


@dataclass
class DetectionArtifact:
    """
    Files produced by the detection stage.

    Attributes:
        events_file_path (str): Detected events as JSONL.
        atomic_count (int): Number of atomic events.
        complex_count (int): Number of complex events.
        report_file_path (str, optional): Evaluation report, when ground truth was given.
    """
    events_file_path: str
    atomic_count: int
    complex_count: int
    report_file_path: Optional[str] = None


@dataclass
class OptimizationArtifact:
    """
    Files produced by the optimization stage.

    Attributes:
        archive_file_path (str): Final archive as JSON.
        telemetry_file_path (str): Gene statistics per generation.
        hypervolume_file_path (str): Archive hypervolume per generation.
        best_macro_f (float): Best macro F-score over the archive on the training data.
    """
    archive_file_path: str
    telemetry_file_path: str
    hypervolume_file_path: str
    best_macro_f: float
