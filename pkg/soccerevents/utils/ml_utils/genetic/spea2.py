"""
Strength Pareto selection on maximized objective vectors.

All functions take an ``(n, m)`` array of objective values, one row per
individual, where larger is better in every column.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True when ``a`` is no worse than ``b`` everywhere and better somewhere."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(a >= b) and np.any(a > b))


def dominance_matrix(objectives: np.ndarray) -> np.ndarray:
    """``out[i, j]`` is True when row ``i`` dominates row ``j``."""
    a = objectives[:, None, :]
    b = objectives[None, :, :]
    return np.all(a >= b, axis=2) & np.any(a > b, axis=2)


def nondominated(objectives: np.ndarray) -> np.ndarray:
    """Indices of the rows no other row dominates, in input order."""
    objectives = np.asarray(objectives, dtype=float)
    if len(objectives) == 0:
        return np.array([], dtype=int)
    return np.flatnonzero(~dominance_matrix(objectives).any(axis=0))


@dataclass
class Fitness:
    """
    Fitness terms of a combined population and archive.

    Attributes:
        strength (np.ndarray): Number of individuals each one dominates.
        raw (np.ndarray): Summed strength of each individual's dominators; 0 when nondominated.
        density (np.ndarray): ``1 / (sigma_k + 2)`` from the distance to the k-th nearest neighbour.
        value (np.ndarray): ``raw + density``; lower is better, below 1 means nondominated.
    """
    strength: np.ndarray
    raw: np.ndarray
    density: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return self.raw + self.density


def spea2_fitness(objectives: np.ndarray) -> Fitness:
    objectives = np.asarray(objectives, dtype=float)
    n = len(objectives)
    if n == 0:
        empty = np.zeros(0)
        return Fitness(empty, empty, empty)
    dom = dominance_matrix(objectives)
    strength = dom.sum(axis=1).astype(float)
    raw = (dom * strength[:, None]).sum(axis=0)
    if n == 1:
        return Fitness(strength, raw, np.full(1, 0.5))
    k = int(math.floor(math.sqrt(n)))
    distances = np.sort(cdist(objectives, objectives), axis=1)
    # column 0 is each point's distance to itself
    sigma_k = distances[:, min(k, n - 1)]
    return Fitness(strength, raw, 1.0 / (sigma_k + 2.0))


def _truncate(objectives: np.ndarray, keep: List[int], size: int) -> List[int]:
    """
    Removes the most crowded individual until ``size`` remain.

    Crowding compares sorted neighbour distances lexicographically. The best
    individual of each objective is never removed.
    """
    keep = list(keep)
    points = objectives[keep]
    protected = set()
    for column in range(points.shape[1]):
        protected.add(int(np.argmax(points[:, column])))
    distances = cdist(points, points)
    np.fill_diagonal(distances, np.inf)
    alive = np.ones(len(keep), dtype=bool)
    while alive.sum() > size:
        rows = np.flatnonzero(alive)
        candidates = [r for r in rows if r not in protected] or list(rows)
        ranked = np.sort(distances[np.ix_(candidates, rows)], axis=1)
        # lexsort treats its last key as primary
        victim = candidates[int(np.lexsort(ranked.T[::-1])[0])]
        alive[victim] = False
    return [keep[i] for i in np.flatnonzero(alive)]


def environmental_selection(objectives: np.ndarray, fitness: Fitness, size: int) -> List[int]:
    """
    Indices of the next archive.

    Every nondominated individual is kept when they fit; a surplus is truncated
    by crowding, a shortfall is filled with the best dominated individuals.
    """
    objectives = np.asarray(objectives, dtype=float)
    values = fitness.value
    front = [int(i) for i in np.flatnonzero(fitness.raw == 0)]
    if len(front) > size:
        return sorted(_truncate(objectives, front, size))
    if len(front) < size:
        dominated = [int(i) for i in np.argsort(values, kind="stable") if fitness.raw[i] > 0]
        front = front + dominated[:size - len(front)]
    return sorted(front)


def hypervolume(points: np.ndarray, reference: Tuple[float, float] = (0.0, 0.0)) -> float:
    """Area of two-objective space dominated by ``points`` and bounded below by ``reference``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        return 0.0
    ordered = points[np.lexsort((-points[:, 1], -points[:, 0]))]
    area, ceiling = 0.0, reference[1]
    for x, y in ordered:
        if x <= reference[0] or y <= ceiling:
            continue
        area += (x - reference[0]) * (y - ceiling)
        ceiling = y
    return float(area)
