"""One-to-one matchings via the linear assignment problem.

`assign_profiles` minimises the summed profile discrepancy over all
bijections, a global alternative to the per-point argmin in matching.py.
`assign_ot_baseline` solves the same problem on squared Euclidean point
costs, which is the natural optimal-transport baseline when both clouds
live in the same space.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, InputFormatError
from .geometry import PointCloud, pairwise_distances
from .matching import discrepancy_matrix

__all__ = [
    "Permutation",
    "solve_lap",
    "assign_profiles",
    "assign_ot_baseline",
    "profile_cost_matrix",
    "baseline_cost_matrix",
]


@dataclass
class Permutation:
    """Bijection on {0, ..., n-1}, stored as the image array."""

    mapping: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.mapping, dtype=np.int64)
        if m.ndim != 1 or m.size == 0:
            raise DimensionMismatchError("permutation mapping must be a non-empty 1-d array")
        n = m.shape[0]
        seen = np.zeros(n, dtype=bool)
        ok = True
        for v in m:
            if v < 0 or v >= n or seen[v]:
                ok = False
                break
            seen[v] = True
        if not ok:
            raise InputFormatError("mapping is not a bijection on {0..n-1}")
        self.mapping = m
        self.n = n


def solve_lap(cost: np.ndarray) -> tuple[Permutation, float]:
    """Exact minimum-cost bijection for a square cost matrix."""
    c = np.ascontiguousarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.size == 0:
        raise DimensionMismatchError(f"cost matrix must be square and non-empty, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InputFormatError("cost matrix contains non-finite entries")
    rows, cols = linear_sum_assignment(c)
    mapping = np.empty(c.shape[0], dtype=np.int64)
    mapping[rows] = cols
    total = float(np.sum(c[rows, cols]))
    return Permutation(mapping), total


def profile_cost_matrix(x: PointCloud, y: PointCloud) -> np.ndarray:
    """Order-1 profile discrepancy matrix used by `assign_profiles`."""
    if x.n != y.n:
        raise DimensionMismatchError(f"assignment needs equal sizes, got n={x.n} and m={y.n}")
    return discrepancy_matrix(pairwise_distances(x), pairwise_distances(y), order=1.0).entries


def baseline_cost_matrix(x: PointCloud, y: PointCloud) -> np.ndarray:
    """Squared Euclidean cost matrix used by `assign_ot_baseline`."""
    if x.d != y.d:
        raise DimensionMismatchError(f"baseline needs matching dimensions, got {x.d} and {y.d}")
    if x.n != y.n:
        raise DimensionMismatchError(f"baseline needs equal sizes, got n={x.n} and m={y.n}")
    return cdist(x.points, y.points, "sqeuclidean")


def assign_profiles(x: PointCloud, y: PointCloud) -> Permutation:
    """Bijection minimising the total W1 profile discrepancy."""
    perm, _ = solve_lap(profile_cost_matrix(x, y))
    return perm


def assign_ot_baseline(x: PointCloud, y: PointCloud) -> Permutation:
    """Bijection minimising the total squared Euclidean distance."""
    perm, _ = solve_lap(baseline_cost_matrix(x, y))
    return perm
