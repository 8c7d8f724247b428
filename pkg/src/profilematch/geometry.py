"""Point clouds, distance matrices, and distance profiles.

A distance profile is the uniform empirical measure over one point's
distances to every point in its cloud, itself included, so a cloud of n
points yields n profiles with n atoms each and the atom 0 always present.
"""

from dataclasses import InitVar, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, InputFormatError

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "DistanceProfile",
    "pairwise_distances",
    "distance_profile",
    "all_profiles",
]


def _as_float_matrix(a, name):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputFormatError(f"{name} contains non-finite entries")
    return arr


@dataclass
class PointCloud:
    """Finite set of points in R^d, one row per point.

    Attributes:
        points: float64 array of shape (n, d).
        n: number of points.
        d: ambient dimension.
    """

    points: np.ndarray
    n: int = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        self.points = _as_float_matrix(self.points, "points")
        self.n, self.d = self.points.shape
        if self.n < 1 or self.d < 1:
            raise DimensionMismatchError("point cloud needs n >= 1 points and d >= 1 coordinates")


@dataclass
class DistanceMatrix:
    """Symmetric nonnegative matrix of pairwise distances.

    Validation requires a zero diagonal and symmetry up to 1e-12 relative
    to the largest entry.  The triangle inequality scan is O(n^3), so it
    only runs when asked for.
    """

    entries: np.ndarray
    n: int = field(init=False)
    check_triangle: InitVar[bool] = False

    def __post_init__(self, check_triangle):
        e = _as_float_matrix(self.entries, "entries")
        if e.shape[0] != e.shape[1]:
            raise DimensionMismatchError(f"distance matrix must be square, got {e.shape}")
        scale = max(1.0, float(np.max(np.abs(e)))) if e.size else 1.0
        if np.min(e) < 0.0:
            raise InputFormatError("distance matrix has negative entries")
        if np.max(np.abs(np.diagonal(e))) > 1e-12 * scale:
            raise InputFormatError("distance matrix diagonal is not zero")
        if np.max(np.abs(e - e.T)) > 1e-12 * scale:
            raise InputFormatError("distance matrix is not symmetric")
        self.entries = e
        self.n = e.shape[0]
        if check_triangle:
            tol = 1e-9 * scale
            for k in range(self.n):
                if np.min(e[:, k, None] + e[None, k, :] - e) < -tol:
                    raise InputFormatError("distance matrix violates the triangle inequality")


@dataclass
class DistanceProfile:
    """Discrete probability measure on the line with sorted atom values."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if v.ndim != 1 or w.ndim != 1 or v.shape != w.shape or v.size == 0:
            raise DimensionMismatchError("profile needs matching 1-d values and weights")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise InputFormatError("profile contains non-finite entries")
        if v[0] < 0.0:
            raise InputFormatError("profile values must be nonnegative")
        if np.any(np.diff(v) < 0.0):
            raise InputFormatError("profile values must be sorted ascending")
        if np.any(w <= 0.0):
            raise InputFormatError("profile weights must be positive")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise InputFormatError("profile weights must sum to 1")
        self.values = v
        self.weights = w

    @property
    def size(self):
        return self.values.shape[0]


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """Euclidean distance matrix of a cloud, with an exactly zero diagonal."""
    e = cdist(cloud.points, cloud.points)
    np.fill_diagonal(e, 0.0)
    return DistanceMatrix(e)


def distance_profile(dmat: DistanceMatrix, i: int) -> DistanceProfile:
    """Uniform measure over row i of the matrix, self-distance included."""
    if not 0 <= i < dmat.n:
        raise InputFormatError(f"profile index {i} out of range for n={dmat.n}")
    values = np.sort(dmat.entries[i])
    weights = np.full(dmat.n, 1.0 / dmat.n)
    return DistanceProfile(values, weights)


def all_profiles(dmat: DistanceMatrix) -> list[DistanceProfile]:
    """Distance profiles of every point, in index order."""
    ordered = np.sort(dmat.entries, axis=1)
    weights = np.full(dmat.n, 1.0 / dmat.n)
    return [DistanceProfile(ordered[i], weights.copy()) for i in range(dmat.n)]
