"""Exact discrete optimal transport and the third-lower-bound objective.

`solve_discrete_ot` moves uniform mass 1/n over rows to uniform mass 1/m
over columns at minimum cost.  Scaling by L = lcm(n, m) turns this into an
integer transportation problem with supplies L/n and demands L/m, solved
exactly by successive shortest augmenting paths, so the returned coupling
is an exact vertex solution rather than an entropic approximation.

`tlb` applies this to the matrix of pairwise profile distances raised to
the chosen order.  The result lower-bounds the Gromov-Wasserstein
objective of every admissible coupling, which `gw_objective` evaluates.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import ssp_transport, wpow_matrix
from .errors import DimensionMismatchError, InputFormatError
from .geometry import DistanceMatrix
from .matching import _grid_rows, _order_code

__all__ = [
    "Coupling",
    "solve_discrete_ot",
    "product_coupling",
    "tlb",
    "gw_objective",
]

# supplies and demands are L/n and L/m; path bookkeeping stays within
# int64 as long as L times the larger side fits
_INT_GUARD = 2**62


@dataclass
class Coupling:
    """Joint measure with uniform marginals 1/n (rows) and 1/m (columns)."""

    gamma: np.ndarray
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        g = np.ascontiguousarray(self.gamma, dtype=np.float64)
        if g.ndim != 2 or g.size == 0:
            raise DimensionMismatchError("coupling must be a non-empty 2-d array")
        if not np.all(np.isfinite(g)):
            raise InputFormatError("coupling contains non-finite entries")
        if np.min(g) < -1e-15:
            raise InputFormatError("coupling has negative entries")
        g = np.maximum(g, 0.0)
        n, m = g.shape
        if np.max(np.abs(g.sum(axis=1) - 1.0 / n)) > 1e-9:
            raise InputFormatError("coupling row sums must equal 1/n")
        if np.max(np.abs(g.sum(axis=0) - 1.0 / m)) > 1e-9:
            raise InputFormatError("coupling column sums must equal 1/m")
        self.gamma = g
        self.n = n
        self.m = m


def product_coupling(n: int, m: int) -> Coupling:
    """Independent coupling: every cell carries mass 1/(n*m)."""
    if n < 1 or m < 1:
        raise DimensionMismatchError("coupling sizes must be positive")
    return Coupling(np.full((n, m), 1.0 / (n * m)))


def solve_discrete_ot(cost: np.ndarray) -> tuple[Coupling, float]:
    """Exact optimal transport between uniform discrete marginals.

    Returns the optimal coupling and its cost.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.size == 0:
        raise DimensionMismatchError("cost matrix must be a non-empty 2-d array")
    n, m = c.shape
    # check before touching the data so absurd shapes fail without a copy
    scale = math.lcm(n, m)
    if scale * max(n, m) > _INT_GUARD:
        raise InputFormatError(
            f"lcm({n}, {m}) is too large for exact integer transport (int64 guard)"
        )
    c = np.ascontiguousarray(c)
    if not np.all(np.isfinite(c)):
        raise InputFormatError("cost matrix contains non-finite entries")
    if np.min(c) < 0.0:
        raise InputFormatError("cost matrix has negative entries")
    flow = ssp_transport(c, scale // n, scale // m)
    gamma = flow / float(scale)
    value = float(np.dot(flow.ravel(), c.ravel()) / scale)
    return Coupling(gamma), value


def tlb(
    dmat_x: DistanceMatrix, dmat_y: DistanceMatrix, order: float = 1.0
) -> tuple[float, Coupling]:
    """Transport lower bound on the order-`order` Gromov-Wasserstein distance.

    Optimally transports source profiles onto target profiles under the
    cost W_order^order and returns the order-th root of the optimum along
    with the minimising coupling.
    """
    order, code = _order_code(order)
    xg, yg, w = _grid_rows(dmat_x, dmat_y)
    cost = wpow_matrix(xg, yg, w, code, order)
    coupling, value = solve_discrete_ot(cost)
    return float(value ** (1.0 / order)), coupling


def gw_objective(
    dmat_x: DistanceMatrix, dmat_y: DistanceMatrix, coupling: Coupling, order: float = 1.0
) -> float:
    """Gromov-Wasserstein objective of a given coupling.

    Computes the order-th root of
    sum_{i,j,k,l} |dX(i,k) - dY(j,l)|^order gamma_ij gamma_kl.
    """
    order, _ = _order_code(order)
    n, m = dmat_x.n, dmat_y.n
    g = coupling.gamma
    if g.shape != (n, m):
        raise DimensionMismatchError(
            f"coupling shape {g.shape} does not match matrices ({n}, {m})"
        )
    if (
        np.max(np.abs(g.sum(axis=1) - 1.0 / n)) > 1e-6
        or np.max(np.abs(g.sum(axis=0) - 1.0 / m)) > 1e-6
    ):
        raise InputFormatError("coupling marginals are not uniform")
    a = dmat_x.entries
    b = dmat_y.entries
    total = 0.0
    # stream over source rows to keep the |a_ik - b_jl| block at m*n*m floats
    for i in range(n):
        block = np.abs(a[i][:, None, None] - b[None, :, :])
        if order == 1.0:
            pass
        elif order == 2.0:
            block *= block
        else:
            block **= order
        total += float(np.einsum("kjl,j,kl->", block, g[i], g))
    return float(total ** (1.0 / order))
