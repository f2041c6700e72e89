from typing import List

import numpy as np

from soccerevents.utils.ml_utils.genetic.genome import Genome, GenomeSpace


def binary_tournament(fitness: np.ndarray, count: int, rng: np.random.Generator) -> List[int]:
    """Winners of ``count`` tournaments between two uniformly drawn individuals; lower fitness wins."""
    fitness = np.asarray(fitness, dtype=float)
    first = rng.integers(len(fitness), size=count)
    second = rng.integers(len(fitness), size=count)
    return [int(a if fitness[a] <= fitness[b] else b) for a, b in zip(first, second)]


def blx_crossover(first: Genome, second: Genome, space: GenomeSpace, alpha: float,
                  rng: np.random.Generator) -> Genome:
    """
    Blend crossover of two parents.

    Each real gene is drawn uniformly from the parents' interval widened by
    ``alpha`` times its length on both sides, then clamped and snapped to its
    grid. The evaluation order is inherited whole from one parent.
    """
    genes = []
    for grid, a, b in zip(space.grids, first.genes, second.genes):
        low, high = min(a, b), max(a, b)
        spread = alpha * (high - low)
        genes.append(grid.snap(rng.uniform(low - spread, high + spread)))
    order = first.order if rng.random() < 0.5 else second.order
    return Genome(tuple(genes), order)


def _resample(genome: Genome, space: GenomeSpace, gene: int, rng: np.random.Generator) -> Genome:
    if gene < len(space.grids):
        genes = list(genome.genes)
        genes[gene] = space.grids[gene].sample(rng)
        return Genome(tuple(genes), genome.order)
    # the order gene: redraw one Lehmer digit that has a choice
    digit = int(rng.integers(max(space.order_length - 1, 1)))
    order = list(genome.order)
    order[digit] = int(rng.integers(space.order_bound(digit)))
    return Genome(genome.genes, tuple(order))


def mutate(genome: Genome, space: GenomeSpace, probability: float, rng: np.random.Generator,
           mode: str = "single") -> Genome:
    """
    Uniform resampling mutation.

    In ``single`` mode the individual is mutated with ``probability`` and then
    exactly one of its genes, chosen uniformly, is redrawn. In ``per_gene``
    mode every gene is redrawn independently with ``probability``.
    """
    if mode == "per_gene":
        for gene in range(space.mutable_genes):
            if rng.random() < probability:
                genome = _resample(genome, space, gene, rng)
        return genome
    if rng.random() < probability:
        genome = _resample(genome, space, int(rng.integers(space.mutable_genes)), rng)
    return genome
