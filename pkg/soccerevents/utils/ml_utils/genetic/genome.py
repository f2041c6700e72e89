import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from soccerevents.constant import detection_pipeline
from soccerevents.entity.config_entity import RuleParameterSet, RuleThresholds, on_grid
from soccerevents.exception.exception import OutOfGrid

RULES = detection_pipeline.PARAMETERIZED_EVENT_TYPES

## thresholds each rule reads; the full genome carries all four for every rule
RULE_GENES: Dict[str, Tuple[str, ...]] = {
    "KickingTheBall": ("inner_distance", "speed", "acceleration", "window"),
    "BallPossession": ("inner_distance", "outer_distance", "speed", "window"),
    "Tackle": ("inner_distance", "outer_distance", "speed", "window"),
    "BallDeflection": ("inner_distance", "speed", "acceleration", "window"),
}
FULL_GENES: Tuple[str, ...] = ("inner_distance", "outer_distance", "speed", "acceleration", "window")

_GRID_OF = {
    "inner_distance": "distance",
    "outer_distance": "distance",
    "speed": "speed",
    "acceleration": "acceleration",
    "window": "window",
}


@dataclass(frozen=True)
class GeneGrid:
    """
    Discrete range of one real-valued gene.

    Attributes:
        name (str): ``Rule.threshold`` or a plain variable name.
        low (float): Smallest allowed value.
        high (float): Largest allowed value.
        step (float): Grid spacing.
    """
    name: str
    low: float
    high: float
    step: float

    @property
    def levels(self) -> int:
        return int(round((self.high - self.low) / self.step)) + 1

    def value(self, level: int) -> float:
        return round(self.low + level * self.step, 10)

    def snap(self, value: float) -> float:
        clamped = min(max(float(value), self.low), self.high)
        return self.value(int(round((clamped - self.low) / self.step)))

    def contains(self, value: float) -> bool:
        return not math.isnan(value) and on_grid(value, self.low, self.high, self.step)

    def sample(self, rng: np.random.Generator) -> float:
        return self.value(int(rng.integers(self.levels)))


@dataclass(frozen=True)
class Genome:
    """
    One individual.

    Attributes:
        genes (tuple): Real gene values, all on their grids.
        order (tuple): Lehmer code of the rule evaluation order; empty when the
            problem has no ordering gene.
    """
    genes: Tuple[float, ...]
    order: Tuple[int, ...] = ()

    @property
    def key(self) -> Tuple:
        return self.genes, self.order


def lehmer_decode(code: Sequence[int], items: Sequence) -> Tuple:
    """Permutation of ``items`` named by ``code``; digit ``i`` picks among the items still unused."""
    pool = list(items)
    if len(code) != len(pool):
        raise OutOfGrid("order", list(code))
    out = []
    for i, digit in enumerate(code):
        if not 0 <= digit < len(pool) or int(digit) != digit:
            raise OutOfGrid(f"order[{i}]", digit)
        out.append(pool.pop(int(digit)))
    return tuple(out)


def lehmer_encode(permutation: Sequence, items: Sequence) -> Tuple[int, ...]:
    pool = list(items)
    code = []
    for item in permutation:
        index = pool.index(item)
        code.append(index)
        pool.pop(index)
    return tuple(code)


class GenomeSpace:
    """
    Encoding of candidate solutions: real genes on grids plus an optional
    permutation gene stored as a Lehmer code.

    The permutation counts as a single gene for mutation, so a space with ``n``
    real genes and an order has ``n + 1`` mutable genes.
    """

    def __init__(self, grids: Sequence[GeneGrid], order_items: Sequence[str] = ()):
        self.grids: Tuple[GeneGrid, ...] = tuple(grids)
        self.order_items: Tuple[str, ...] = tuple(order_items)

    @property
    def gene_names(self) -> List[str]:
        return [g.name for g in self.grids]

    @property
    def order_length(self) -> int:
        return len(self.order_items)

    @property
    def mutable_genes(self) -> int:
        return len(self.grids) + (1 if self.order_items else 0)

    def order_bound(self, digit: int) -> int:
        """Number of values digit ``digit`` of the Lehmer code can take."""
        return self.order_length - digit

    def random(self, rng: np.random.Generator) -> Genome:
        genes = tuple(g.sample(rng) for g in self.grids)
        order = tuple(int(rng.integers(self.order_bound(i))) for i in range(self.order_length))
        return Genome(genes, order)

    def validate(self, genome: Genome) -> Genome:
        if len(genome.genes) != len(self.grids):
            raise OutOfGrid("genes", len(genome.genes))
        for grid, value in zip(self.grids, genome.genes):
            if not grid.contains(value):
                raise OutOfGrid(grid.name, value)
        lehmer_decode(genome.order, self.order_items)
        return genome

    def permutation(self, genome: Genome) -> Tuple[str, ...]:
        return lehmer_decode(genome.order, self.order_items)

    def gene_values(self, genome: Genome) -> Dict[str, float]:
        values = dict(zip(self.gene_names, genome.genes))
        for i, digit in enumerate(genome.order):
            values[f"order.{i}"] = float(digit)
        return values


class RuleGenomeSpace(GenomeSpace):
    """
    Genome of the four parameterized atomic rules.

    Genes are named ``Rule.threshold``; the order gene permutes the rule names.
    """

    def __init__(self, grids: Optional[Mapping[str, Tuple[float, float, float]]] = None,
                 full_threshold_genome: bool = False, possession_requires_comoving: bool = False):
        ranges = {
            "window": detection_pipeline.OPTIMIZER_WINDOW_GRID,
            "speed": detection_pipeline.OPTIMIZER_SPEED_GRID,
            "distance": detection_pipeline.OPTIMIZER_DISTANCE_GRID,
            "acceleration": detection_pipeline.OPTIMIZER_ACCELERATION_GRID,
        }
        ranges.update(grids or {})
        self.full_threshold_genome = full_threshold_genome
        self.possession_requires_comoving = possession_requires_comoving
        genes = []
        for rule in RULES:
            for threshold in (FULL_GENES if full_threshold_genome else RULE_GENES[rule]):
                genes.append(GeneGrid(f"{rule}.{threshold}", *map(float, ranges[_GRID_OF[threshold]])))
        super().__init__(genes, RULES)

    def decode(self, genome: Genome) -> RuleParameterSet:
        """
        Parameter set of a genome.

        Raises:
            OutOfGrid: If a gene lies off its grid or a Lehmer digit exceeds its bound.
        """
        self.validate(genome)
        per_rule: Dict[str, Dict[str, float]] = {rule: {} for rule in RULES}
        for name, value in zip(self.gene_names, genome.genes):
            rule, threshold = name.split(".")
            per_rule[rule][threshold] = value
        thresholds = {}
        for rule, values in per_rule.items():
            values["window"] = int(round(values["window"]))
            thresholds[rule] = RuleThresholds(**values)
        return RuleParameterSet(
            kicking=thresholds["KickingTheBall"],
            possession=thresholds["BallPossession"],
            tackle=thresholds["Tackle"],
            deflection=thresholds["BallDeflection"],
            evaluation_order=self.permutation(genome),
            possession_requires_comoving=self.possession_requires_comoving,
        )

    def encode(self, params: RuleParameterSet) -> Genome:
        """Genome of a parameter set; thresholds the rule does not carry snap to the grid floor."""
        genes = []
        for grid in self.grids:
            rule, threshold = grid.name.split(".")
            value = getattr(params.rule(rule), threshold)
            genes.append(grid.snap(grid.low if value is None else value))
        return self.validate(Genome(tuple(genes), lehmer_encode(params.evaluation_order, self.order_items)))
