"""Distance-profile matching between two point clouds.

Each source point is matched to the target point whose distance profile is
closest in W_order, with ties broken toward the smallest target index.
Points whose best discrepancy is not strictly below the threshold are
reported as outliers.

Profiles from clouds of sizes n and m are uniform measures, so all n*m
pairwise Wasserstein distances share one quantile grid: the merged
breakpoints k/n and k/m.  Expressing every sorted distance row on that
grid turns each W_order^order into a fixed-weight inner product, which is
what the compiled kernels consume.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._kernels import P_GEN, P_ONE, P_TWO, argmin_rows, wpow_matrix
from .errors import DimensionMismatchError, InputFormatError
from .geometry import DistanceMatrix, PointCloud, pairwise_distances

__all__ = [
    "DiscrepancyMatrix",
    "MatchResult",
    "discrepancy_matrix",
    "match",
    "match_clouds",
]

# below this many profile pairs the full matrix is cheap enough that the
# pruned argmin path is not worth dispatching
_FUSED_MIN_PAIRS = 250_000


@dataclass
class DiscrepancyMatrix:
    """W_order distances between all source and target profiles."""

    entries: np.ndarray
    order: float

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.size == 0:
            raise DimensionMismatchError("discrepancy matrix must be 2-dimensional and non-empty")
        if not np.all(np.isfinite(e)):
            raise InputFormatError("discrepancy matrix contains non-finite entries")
        if np.min(e) < 0.0:
            raise InputFormatError("discrepancy matrix has negative entries")
        self.entries = e
        self.order = float(self.order)


@dataclass
class MatchResult:
    """Outcome of profile matching.

    Attributes:
        pi: target index for every source point.
        discrepancy: matched profile distance for every source point.
        inliers: sorted source indices with discrepancy strictly below the
            threshold.
        threshold: the outlier threshold used.
    """

    pi: np.ndarray
    discrepancy: np.ndarray
    inliers: np.ndarray
    threshold: float

    n: int = field(init=False)

    def __post_init__(self):
        self.pi = np.ascontiguousarray(self.pi, dtype=np.int64)
        self.discrepancy = np.ascontiguousarray(self.discrepancy, dtype=np.float64)
        self.inliers = np.ascontiguousarray(self.inliers, dtype=np.int64)
        self.threshold = float(self.threshold)
        self.n = self.pi.shape[0]


@lru_cache(maxsize=128)
def _grid_pair(nx: int, ny: int):
    """Merged quantile grid for uniform profiles of nx and ny atoms.

    Returns gather indices into the sorted nx-row and ny-row plus the
    segment weights, all over the common denominator nx*ny so breakpoint
    comparisons are exact integer comparisons.
    """
    bx = np.arange(1, nx + 1, dtype=np.int64) * ny
    by = np.arange(1, ny + 1, dtype=np.int64) * nx
    merged = np.union1d(bx, by)
    seg = np.diff(merged, prepend=np.int64(0))
    w = seg.astype(np.float64) / float(nx * ny)
    ax = (merged + ny - 1) // ny - 1
    ay = (merged + nx - 1) // nx - 1
    # w stays writable: the kernels declare a writable contiguous argument
    ax.setflags(write=False)
    ay.setflags(write=False)
    return ax, ay, w


def _gather(rows: np.ndarray, idx: np.ndarray) -> np.ndarray:
    if rows.shape[1] == idx.shape[0] and np.array_equal(idx, np.arange(idx.shape[0])):
        return np.ascontiguousarray(rows)
    return np.ascontiguousarray(rows[:, idx])


def _order_code(order):
    order = float(order)
    if not np.isfinite(order) or order < 1.0:
        raise InputFormatError(f"order must be a finite number >= 1, got {order}")
    if order == 1.0:
        return order, P_ONE
    if order == 2.0:
        return order, P_TWO
    return order, P_GEN


def _grid_rows(dmat_x: DistanceMatrix, dmat_y: DistanceMatrix):
    xs = np.sort(dmat_x.entries, axis=1)
    ys = np.sort(dmat_y.entries, axis=1)
    ax, ay, w = _grid_pair(dmat_x.n, dmat_y.n)
    return _gather(xs, ax), _gather(ys, ay), w


def discrepancy_matrix(
    dmat_x: DistanceMatrix, dmat_y: DistanceMatrix, order: float = 1.0
) -> DiscrepancyMatrix:
    """All pairwise W_order distances between the two profile families."""
    order, code = _order_code(order)
    xg, yg, w = _grid_rows(dmat_x, dmat_y)
    pow_entries = wpow_matrix(xg, yg, w, code, order)
    if order != 1.0:
        pow_entries = pow_entries ** (1.0 / order)
    return DiscrepancyMatrix(pow_entries, order)


def match(disc: DiscrepancyMatrix, threshold: float = np.inf) -> MatchResult:
    """Row-wise argmin matching with strict-threshold outlier detection."""
    threshold = float(threshold)
    if np.isnan(threshold):
        raise InputFormatError("threshold must not be NaN")
    pi = np.argmin(disc.entries, axis=1)
    discrepancy = disc.entries[np.arange(disc.entries.shape[0]), pi]
    inliers = np.flatnonzero(discrepancy < threshold)
    return MatchResult(pi, discrepancy, inliers, threshold)


def match_clouds(
    x: PointCloud, y: PointCloud, order: float = 1.0, threshold: float = np.inf
) -> MatchResult:
    """Profile-match two clouds directly.

    Identical in every output to building the discrepancy matrix and
    calling `match`; for large order-1 problems it takes a pruned path
    that skips columns once their partial sum exceeds the running best,
    which cannot change the argmin or the tie-breaking.
    """
    threshold = float(threshold)
    if np.isnan(threshold):
        raise InputFormatError("threshold must not be NaN")
    order_f, code = _order_code(order)
    dmx = pairwise_distances(x)
    dmy = pairwise_distances(y)
    if order_f != 1.0 or x.n * y.n < _FUSED_MIN_PAIRS:
        return match(discrepancy_matrix(dmx, dmy, order_f), threshold)
    xg, yg, w = _grid_rows(dmx, dmy)
    # candidate ordering by profile means: means are W1-Lipschitz, so the
    # true argmin is found early and most scans abandon fast
    xmeans = xg @ w
    ymeans = yg @ w
    yorder = np.argsort(ymeans, kind="stable")
    pi, discrepancy = argmin_rows(
        xg, yg, w, code, order_f, yorder, np.ascontiguousarray(ymeans[yorder]), xmeans
    )
    inliers = np.flatnonzero(discrepancy < threshold)
    return MatchResult(pi, discrepancy, inliers, threshold)
