"""Compiled numerical kernels.

Everything here is deliberately low-level: flat loops over contiguous
float64/int64 arrays, fixed accumulation order, no fastmath.  Results must
be bit-identical across runs and across thread counts, so each output cell
is written by exactly one thread and reductions always combine partial
sums in the same order.

The discrepancy kernels operate on "grid" matrices: row i holds the sorted
distances of point i evaluated on a shared quantile grid, and `w` holds the
grid segment weights.  Building those grids is geometry.py's job.
"""

import numpy as np
from numba import njit, prange

# Exponent dispatch codes: 1 and 2 get dedicated branches, 0 means a
# general float exponent `p`.
P_ONE = 1
P_TWO = 2
P_GEN = 0

_BLOCK = 128


@njit(inline="always")
def _row_wpow(x, y, w, pcode, p, limit):
    """Weighted sum of |x-y|^p with early abandon.

    Accumulates in four fixed lanes combined as (a0+a1)+(a2+a3).  After
    each 128-element block the partial sum is compared against `limit`;
    once it exceeds the limit the partial is returned as-is.  Callers must
    treat any return value > limit as "abandoned, true value is larger".
    With limit=inf this computes the exact full sum.
    """
    n = x.shape[0]
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    s = 0
    while s < n:
        e = s + _BLOCK
        if e > n:
            e = n
        i = s
        if pcode == P_ONE:
            while i + 4 <= e:
                a0 += abs(x[i] - y[i]) * w[i]
                a1 += abs(x[i + 1] - y[i + 1]) * w[i + 1]
                a2 += abs(x[i + 2] - y[i + 2]) * w[i + 2]
                a3 += abs(x[i + 3] - y[i + 3]) * w[i + 3]
                i += 4
            while i < e:
                a0 += abs(x[i] - y[i]) * w[i]
                i += 1
        elif pcode == P_TWO:
            while i + 4 <= e:
                d0 = x[i] - y[i]
                d1 = x[i + 1] - y[i + 1]
                d2 = x[i + 2] - y[i + 2]
                d3 = x[i + 3] - y[i + 3]
                a0 += d0 * d0 * w[i]
                a1 += d1 * d1 * w[i + 1]
                a2 += d2 * d2 * w[i + 2]
                a3 += d3 * d3 * w[i + 3]
                i += 4
            while i < e:
                d0 = x[i] - y[i]
                a0 += d0 * d0 * w[i]
                i += 1
        else:
            while i + 4 <= e:
                a0 += abs(x[i] - y[i]) ** p * w[i]
                a1 += abs(x[i + 1] - y[i + 1]) ** p * w[i + 1]
                a2 += abs(x[i + 2] - y[i + 2]) ** p * w[i + 2]
                a3 += abs(x[i + 3] - y[i + 3]) ** p * w[i + 3]
                i += 4
            while i < e:
                a0 += abs(x[i] - y[i]) ** p * w[i]
                i += 1
        s = e
        part = (a0 + a1) + (a2 + a3)
        if part > limit:
            return part
    return (a0 + a1) + (a2 + a3)


@njit(
    "float64[:,::1](float64[:,::1], float64[:,::1], float64[::1], int64, float64)",
    parallel=True,
    cache=True,
)
def wpow_matrix(xg, yg, w, pcode, p):
    """All-pairs weighted |.|^p discrepancies between grid rows."""
    n = xg.shape[0]
    m = yg.shape[0]
    out = np.empty((n, m))
    for i in prange(n):
        for j in range(m):
            out[i, j] = _row_wpow(xg[i], yg[j], w, pcode, p, np.inf)
    return out


@njit(
    "float64[::1](float64[:,::1], float64[:,::1], float64[::1], int64, float64)",
    parallel=True,
    cache=True,
)
def wpow_diag(xg, yg, w, pcode, p):
    """Row-wise discrepancies between paired grid rows."""
    n = xg.shape[0]
    out = np.empty(n)
    for i in prange(n):
        out[i] = _row_wpow(xg[i], yg[i], w, pcode, p, np.inf)
    return out


@njit(
    "Tuple((int64[::1], float64[::1]))(float64[:,::1], float64[:,::1], "
    "float64[::1], int64, float64, int64[::1], float64[::1], float64[::1])",
    parallel=True,
    cache=True,
)
def argmin_rows(xg, yg, w, pcode, p, yorder, ymeans_sorted, xmeans):
    """Per-row argmin over all columns without materialising the matrix.

    Candidates are visited in order of |row mean - column mean| (profile
    means are 1-Lipschitz under W1, so near means are tried first) and each
    candidate scan abandons once its partial sum exceeds the current best.
    By Jensen the scan value is at least |row mean - column mean|^p, so once
    the next candidate's mean gap strictly beats the running best the whole
    remainder is pruned.  Skipped or abandoned candidates all have values
    strictly above the running best, so the result is exactly the
    full-matrix argmin with smallest-index ties.
    """
    n = xg.shape[0]
    m = yg.shape[0]
    pi = np.empty(n, np.int64)
    val = np.empty(n)
    for i in prange(n):
        xm = xmeans[i]
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) // 2
            if ymeans_sorted[mid] < xm:
                lo = mid + 1
            else:
                hi = mid
        a = lo - 1
        b = lo
        best = np.inf
        bestj = -1
        for _ in range(m):
            if a < 0:
                t = b
                g = ymeans_sorted[b] - xm
                b += 1
            elif b >= m:
                t = a
                g = xm - ymeans_sorted[a]
                a -= 1
            elif xm - ymeans_sorted[a] <= ymeans_sorted[b] - xm:
                t = a
                g = xm - ymeans_sorted[a]
                a -= 1
            else:
                t = b
                g = ymeans_sorted[b] - xm
                b += 1
            if pcode == P_ONE:
                gpow = g
            elif pcode == P_TWO:
                gpow = g * g
            else:
                gpow = g**p
            # candidates only get further in mean gap from here on; strict
            # comparison keeps exact ties eligible for the index tie-break
            if gpow > best:
                break
            j = yorder[t]
            v = _row_wpow(xg[i], yg[j], w, pcode, p, best)
            if v < best or (v == best and j < bestj):
                best = v
                bestj = j
        pi[i] = bestj
        val[i] = best
    return pi, val


@njit(
    "float64(float64[::1], float64[::1], float64[::1], float64[::1], int64, float64)",
    cache=True,
)
def merge_wpow(xv, xc, yv, yc, pcode, p):
    """W_p^p between two sorted weighted atom lists via the quantile coupling.

    xc/yc are cumulative weights with the final entry clamped to exactly 1.
    Ties in cumulative weight advance both cursors; zero-width segments
    contribute nothing.
    """
    na = xv.shape[0]
    nb = yv.shape[0]
    i = 0
    j = 0
    prev = 0.0
    acc = 0.0
    while i < na and j < nb:
        ca = xc[i]
        cb = yc[j]
        t = ca if ca < cb else cb
        seg = t - prev
        if seg > 0.0:
            d = abs(xv[i] - yv[j])
            if pcode == P_ONE:
                acc += seg * d
            elif pcode == P_TWO:
                acc += seg * d * d
            else:
                acc += seg * d**p
        prev = t
        if ca <= t:
            i += 1
        if cb <= t:
            j += 1
    return acc


@njit("int64[:,::1](float64[:,::1], int64, int64)", cache=True)
def ssp_transport(cost, supply_each, demand_each):
    """Integer transportation problem, successive shortest paths.

    Every source row carries `supply_each` units, every sink column takes
    `demand_each` units (n*supply_each == m*demand_each).  Runs Dijkstra on
    reduced costs with node potentials; flow arcs stay tight so arcs keep
    nonnegative reduced cost and smallest-index tie-breaking makes the
    result deterministic.  Returns the integer flow matrix.
    """
    n = cost.shape[0]
    m = cost.shape[1]
    flow = np.zeros((n, m), np.int64)
    rem_s = np.full(n, supply_each, np.int64)
    rem_d = np.full(m, demand_each, np.int64)
    pr = np.zeros(n)
    pc = np.zeros(m)
    dist = np.empty(m)
    pred_row = np.empty(m, np.int64)
    scanned = np.empty(m, np.bool_)
    row_seen = np.empty(n, np.bool_)
    row_dist = np.empty(n)
    row_from_col = np.empty(n, np.int64)
    # Rows with positive flow into each column, with lazy deletion.  A
    # column never holds more than demand_each units, so demand_each live
    # entries bound the list; the rest is stale slack that gets compacted
    # on scan or rebuilt when the list fills up.
    cap = 2 * demand_each + 8
    if cap > n:
        cap = n
    col_rows = np.empty((m, cap), np.int32)
    col_deg = np.zeros(m, np.int64)

    for src in range(n):
        while rem_s[src] > 0:
            for j in range(m):
                dist[j] = cost[src, j] + pr[src] - pc[j]
                pred_row[j] = src
                scanned[j] = False
            for r in range(n):
                row_seen[r] = False
            row_seen[src] = True
            row_dist[src] = 0.0
            tgt = -1
            nscan = 0
            while nscan < m:
                best = np.inf
                jstar = -1
                for j in range(m):
                    if not scanned[j] and dist[j] < best:
                        best = dist[j]
                        jstar = j
                if jstar < 0:
                    break
                if rem_d[jstar] > 0:
                    tgt = jstar
                    break
                scanned[jstar] = True
                nscan += 1
                deg = col_deg[jstar]
                wp = 0
                for idx in range(deg):
                    r = col_rows[jstar, idx]
                    if flow[r, jstar] <= 0:
                        continue
                    col_rows[jstar, wp] = r
                    wp += 1
                    if row_seen[r]:
                        continue
                    row_seen[r] = True
                    row_dist[r] = dist[jstar]
                    row_from_col[r] = jstar
                    base = dist[jstar] + pr[r]
                    for j2 in range(m):
                        if not scanned[j2]:
                            nd = base + cost[r, j2] - pc[j2]
                            if nd < dist[j2]:
                                dist[j2] = nd
                                pred_row[j2] = r
                col_deg[jstar] = wp
            if tgt < 0:
                raise RuntimeError("no augmenting path to any open column")
            big = dist[tgt]
            for j in range(m):
                dj = dist[j]
                if dj > big:
                    dj = big
                pc[j] += dj
            for r in range(n):
                if row_seen[r]:
                    pr[r] += row_dist[r]
                else:
                    pr[r] += big
            # bottleneck along the augmenting path
            delta = rem_s[src]
            if rem_d[tgt] < delta:
                delta = rem_d[tgt]
            j = tgt
            while True:
                r = pred_row[j]
                if r == src:
                    break
                j2 = row_from_col[r]
                f = flow[r, j2]
                if f < delta:
                    delta = f
                j = j2
            # apply it
            j = tgt
            while True:
                r = pred_row[j]
                if flow[r, j] == 0:
                    if col_deg[j] == cap:
                        d2 = 0
                        for rr in range(n):
                            if flow[rr, j] > 0:
                                col_rows[j, d2] = rr
                                d2 += 1
                        col_deg[j] = d2
                    col_rows[j, col_deg[j]] = r
                    col_deg[j] += 1
                flow[r, j] += delta
                if r == src:
                    break
                j2 = row_from_col[r]
                flow[r, j2] -= delta
                j = j2
            rem_s[src] -= delta
            rem_d[tgt] -= delta
    return flow
