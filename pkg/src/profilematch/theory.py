"""Separation quantities, matching guarantees, and the experiment drivers.

Everything here works at the level of mixture centers or sampled clouds:
profile distances between centers, the separation margins that govern
when matching provably succeeds, noise ceilings for assignment recovery,
accuracy bookkeeping, and the seeded sweeps the CLI exposes.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .assignment import Permutation, assign_ot_baseline, assign_profiles
from .errors import DimensionMismatchError, InputFormatError
from .geometry import DistanceProfile, PointCloud, pairwise_distances
from .matching import MatchResult, discrepancy_matrix, match_clouds
from .models import (
    MixtureSpec,
    PairedMixtures,
    derived_rng,
    derived_seed,
    make_paired_mixtures,
    make_two_coordinate_rotation,
    noisy_correspondence_instance,
    random_rotation,
    sample_mixture,
)
from .wasserstein import wasserstein_p

__all__ = [
    "SeparationReport",
    "ExperimentRecord",
    "METHODS",
    "center_profile_distance",
    "separation_report",
    "lemma1_bound_check",
    "phi",
    "theorem2_noise_bound",
    "matching_accuracy",
    "perfect_matching",
    "inlier_threshold_interval",
    "run_mixture_experiment",
    "run_noise_stability_experiment",
    "proposition1_check",
]

METHODS = ("profile", "assignment", "ot_baseline")


@dataclass
class SeparationReport:
    """Center-level separation margins and the matching guarantee threshold.

    omega is the margin between shared components and everything else
    after discounting outlier mass; omega_o is the sharper per-component
    version; omega_prime additionally separates outlier components (it
    controls when a threshold can isolate the inliers).  rhs is the noise
    and sampling term the margin must exceed at confidence 1 - delta.
    """

    wbar_min_offdiag: float
    wbar_max_diag: float
    omega: float
    omega_o: float
    omega_prime: float
    rhs: float
    R: float
    Gamma: float


@dataclass
class ExperimentRecord:
    """One replicate outcome of one method at one noise level."""

    sigma: float
    replicate: int
    perfect: bool
    accuracy: float
    method: str

    def __post_init__(self):
        self.sigma = float(self.sigma)
        self.replicate = int(self.replicate)
        self.perfect = bool(self.perfect)
        self.accuracy = float(self.accuracy)
        if not 0.0 <= self.accuracy <= 1.0:
            raise InputFormatError(f"accuracy must lie in [0,1], got {self.accuracy}")
        if self.method not in METHODS:
            raise InputFormatError(f"unknown method {self.method!r}")


def _center_profile(centers: np.ndarray, weights: np.ndarray, idx: int) -> DistanceProfile:
    dists = np.linalg.norm(centers - centers[idx], axis=1)
    keep = weights > 0.0
    d = dists[keep]
    w = weights[keep]
    order = np.argsort(d, kind="stable")
    return DistanceProfile(d[order], w[order])


def center_profile_distance(pm: PairedMixtures, alpha: int, beta: int) -> float:
    """W1 between the weighted center-distance profiles of component alpha
    of mu and component beta of nu (0-based indices)."""
    if not 0 <= alpha < pm.mu.k:
        raise InputFormatError(f"alpha {alpha} out of range for t={pm.mu.k}")
    if not 0 <= beta < pm.nu.k:
        raise InputFormatError(f"beta {beta} out of range for s={pm.nu.k}")
    p = _center_profile(pm.mu.centers, pm.mu.weights, alpha)
    q = _center_profile(pm.nu.centers, pm.nu.weights, beta)
    return wasserstein_p(p, q, 1.0)


def _wbar_matrix(pm: PairedMixtures) -> np.ndarray:
    t, s = pm.mu.k, pm.nu.k
    out = np.empty((t, s))
    for a in range(t):
        p = _center_profile(pm.mu.centers, pm.mu.weights, a)
        for b in range(s):
            q = _center_profile(pm.nu.centers, pm.nu.weights, b)
            out[a, b] = wasserstein_p(p, q, 1.0)
    return out


def _center_radius(pm: PairedMixtures) -> float:
    allc = np.concatenate([pm.mu.centers, pm.nu.centers])
    return float(np.max(cdist(allc, allc)))


def separation_report(pm: PairedMixtures, n: int, m: int, delta: float) -> SeparationReport:
    """Evaluate the separation margins for clouds of sizes n and m."""
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise InputFormatError(f"delta must lie in (0, 1), got {delta}")
    if n < 1 or m < 1:
        raise InputFormatError("sample sizes must be >= 1")
    K, t, s, d = pm.K, pm.mu.k, pm.nu.k, pm.mu.d
    wb = _wbar_matrix(pm)

    offdiag = np.inf
    diag = -np.inf
    omega_o = np.inf
    for a in range(K):
        row = np.delete(wb[a], a)
        row_min = float(np.min(row)) if row.size else np.inf
        offdiag = min(offdiag, row_min)
        diag = max(diag, wb[a, a])
        omega_o = min(omega_o, row_min - wb[a, a])
    outlier_min = float(np.min(wb[K:])) if t > K else np.inf

    lam = float(np.sum(pm.mu.weights[:K]))
    radius = _center_radius(pm)
    gamma = float(max(np.max(pm.mu.stds), np.max(pm.nu.stds)))

    omega = offdiag - radius * (1.0 - lam)
    omega_prime = min(offdiag, outlier_min) - radius * (1.0 - lam)

    term1 = 16.0 * gamma * math.sqrt(d)
    pairs = t + s - 2
    if pairs >= 1:
        term2 = 8.0 * radius * math.sqrt(
            (math.log(K) + math.log(pairs) + math.log(4.0 / delta)) / (2.0 * min(n, m))
        )
    else:
        term2 = 0.0
    term3 = 32.0 * gamma * math.sqrt(2.0 * math.log(4.0 * max(n, m) ** 2 / delta))
    rhs = max(term1, term2, term3)

    return SeparationReport(
        wbar_min_offdiag=float(offdiag),
        wbar_max_diag=float(diag),
        omega=float(omega),
        omega_o=float(omega_o),
        omega_prime=float(omega_prime),
        rhs=float(rhs),
        R=radius,
        Gamma=gamma,
    )


def lemma1_bound_check(pm: PairedMixtures) -> bool:
    """Shared-component self-discrepancy never exceeds outlier mass times
    the largest cross-set center distance (plus 1e-9 slack)."""
    K = pm.K
    lam = float(np.sum(pm.mu.weights[:K]))
    cross = float(np.max(cdist(pm.mu.centers, pm.nu.centers)))
    cap = (1.0 - lam) * cross + 1e-9
    return all(center_profile_distance(pm, a, a) <= cap for a in range(K))


def phi(locations: PointCloud) -> float:
    """Smallest W1 distance between the profiles of two distinct points."""
    if locations.n < 2:
        raise InputFormatError("phi needs at least two locations")
    dm = pairwise_distances(locations)
    disc = discrepancy_matrix(dm, dm, order=1.0).entries.copy()
    np.fill_diagonal(disc, np.inf)
    return float(np.min(disc))


def theorem2_noise_bound(locations: PointCloud, delta: float) -> float:
    """Largest admissible sigma^2 (and tau^2) for exact assignment recovery
    at confidence 1 - delta."""
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise InputFormatError(f"delta must lie in (0, 1), got {delta}")
    sep = phi(locations)
    if sep <= 0.0:
        raise InputFormatError("locations have coinciding profiles; assignment unidentifiable")
    n, d = locations.n, locations.d
    return sep**2 / (64.0 * max(d, 8.0 * math.log(2.0 * n**2 / delta)))


def _inlier_mask(labels, n, K):
    lab = np.ascontiguousarray(labels, dtype=np.int64)
    if lab.ndim != 1 or lab.shape[0] != n:
        raise DimensionMismatchError("labels must be 1-d with one entry per source point")
    return lab, lab < K


def matching_accuracy(result: MatchResult, labels_x, labels_y, K: int) -> float:
    """Fraction of shared-component source points matched to a target point
    of the same component; 1.0 when there are no such source points."""
    lx, inl = _inlier_mask(labels_x, result.n, K)
    ly = np.ascontiguousarray(labels_y, dtype=np.int64)
    if ly.ndim != 1 or (result.pi.size and np.max(result.pi) >= ly.shape[0]):
        raise DimensionMismatchError("target labels do not cover the matched indices")
    total = int(np.count_nonzero(inl))
    if total == 0:
        return 1.0
    correct = int(np.count_nonzero(ly[result.pi[inl]] == lx[inl]))
    return correct / total


def perfect_matching(result: MatchResult, labels_x, labels_y, K: int) -> bool:
    """True iff every shared-component source point is matched correctly."""
    return matching_accuracy(result, labels_x, labels_y, K) == 1.0


def inlier_threshold_interval(result: MatchResult, labels_x, K: int) -> tuple[float, float]:
    """Range of thresholds that exactly isolate the shared-component points.

    Returns (lo, hi) where lo is the worst matched discrepancy among true
    inliers and hi the best among true outliers.  Any threshold in
    (lo, hi] reproduces the inlier set when lo < hi; lo >= hi is returned
    as-is and means no threshold works.
    """
    lx, inl = _inlier_mask(labels_x, result.n, K)
    if not np.any(inl):
        raise InputFormatError("no source points from shared components")
    if np.all(inl):
        raise InputFormatError("no source points from outlier components")
    lo = float(np.max(result.discrepancy[inl]))
    hi = float(np.min(result.discrepancy[~inl]))
    return lo, hi


_MIXTURE_KEYS = {"d", "K", "t", "s", "n", "m", "sigmas", "replicates", "seed", "center_scale"}
_NOISE_KEYS = {"d", "n", "sigmas", "rotation", "replicates", "seed", "angle"}


def _check_config(config: dict, allowed: set, required: set, kind: str) -> None:
    extra = set(config) - allowed
    if extra:
        raise InputFormatError(f"unknown {kind} config keys: {sorted(extra)}")
    missing = required - set(config)
    if missing:
        raise InputFormatError(f"missing {kind} config keys: {sorted(missing)}")


def _sigma_list(raw) -> list[float]:
    sigmas = [float(v) for v in raw]
    if not sigmas or any(not np.isfinite(v) or v < 0.0 for v in sigmas):
        raise InputFormatError("sigmas must be a non-empty list of nonnegative reals")
    return sigmas


def run_mixture_experiment(config: dict) -> list[ExperimentRecord]:
    """Sweep of profile matching over noise levels on paired mixtures.

    The center configuration is drawn once from the master seed and reused
    for every sigma, so the sweep varies only the noise; each (sigma,
    replicate) pair samples fresh clouds from its own child seed.
    """
    _check_config(
        config, _MIXTURE_KEYS, {"d", "K", "t", "s", "n", "m", "sigmas", "replicates", "seed"},
        "mixture",
    )
    d, K, t, s = (int(config[k]) for k in ("d", "K", "t", "s"))
    n, m = int(config["n"]), int(config["m"])
    sigmas = _sigma_list(config["sigmas"])
    replicates = int(config["replicates"])
    seed = int(config["seed"])
    scale = float(config.get("center_scale", 1.0))
    if replicates < 1:
        raise InputFormatError("replicates must be >= 1")

    records = []
    for a, sigma in enumerate(sigmas):
        # same child seed for every sigma: identical centers, only the
        # component stds change across the sweep
        pm = make_paired_mixtures(K, t, s, d, scale, sigma, derived_seed(seed, 0))
        for r in range(replicates):
            sx = sample_mixture(pm.mu, n, derived_seed(seed, 1, a, r, 0))
            sy = sample_mixture(pm.nu, m, derived_seed(seed, 1, a, r, 1))
            result = match_clouds(sx.cloud, sy.cloud, order=1.0)
            acc = matching_accuracy(result, sx.labels, sy.labels, K)
            records.append(ExperimentRecord(sigma, r, acc == 1.0, acc, "profile"))
    return records


def run_noise_stability_experiment(config: dict) -> list[ExperimentRecord]:
    """Sweep of both assignment matchers on the rigid-correspondence model.

    Locations, the rigid motion, and the true permutation are fixed by the
    master seed; each (sigma, replicate) redraws only the noise.  Records
    report exact recovery and the per-point agreement fraction.
    """
    _check_config(config, _NOISE_KEYS, {"d", "n", "sigmas", "rotation", "replicates", "seed"},
                  "noise")
    d, n = int(config["d"]), int(config["n"])
    sigmas = _sigma_list(config["sigmas"])
    rotation_kind = str(config["rotation"])
    replicates = int(config["replicates"])
    seed = int(config["seed"])
    angle = float(config.get("angle", math.pi / 16.0))
    if replicates < 1:
        raise InputFormatError("replicates must be >= 1")
    if n < 2 or d < 2:
        raise InputFormatError("noise experiment needs n >= 2 and d >= 2")

    locations = PointCloud(derived_rng(seed, 0).random((n, d)) - 0.5)
    pi_star = derived_rng(seed, 1).permutation(n).astype(np.int64)
    if rotation_kind == "two_coord":
        rot = make_two_coordinate_rotation(d, angle)
    elif rotation_kind == "full":
        rot = random_rotation(d, derived_seed(seed, 2))
    else:
        raise InputFormatError(f"rotation must be 'two_coord' or 'full', got {rotation_kind!r}")
    shift = np.zeros(d)

    star = Permutation(pi_star)
    solvers = (("assignment", assign_profiles), ("ot_baseline", assign_ot_baseline))
    records = []
    for a, sigma in enumerate(sigmas):
        for r in range(replicates):
            x, y = noisy_correspondence_instance(
                locations, rot, shift, star, sigma, sigma, derived_seed(seed, 3, a, r)
            )
            for method, solver in solvers:
                perm = solver(x, y)
                acc = float(np.mean(perm.mapping == pi_star))
                records.append(ExperimentRecord(sigma, r, acc == 1.0, acc, method))
    return records


def proposition1_check(
    spec: MixtureSpec,
    trials: int,
    seed: int,
    mc_samples: int = 100_000,
    budget: float | None = None,
) -> bool:
    """Monte-Carlo check that profile distances are center-Lipschitz.

    For random pairs x, x' drawn from the mixture, W1 between their
    population distance profiles must not exceed the weighted difference
    of center distances.  Profiles are approximated with `mc_samples`
    draws, so the comparison allows 3x the Monte-Carlo error budget.
    """
    if trials < 1:
        raise InputFormatError("trials must be >= 1")
    gamma = float(np.max(spec.stds))
    if budget is None:
        budget = 0.02 * gamma
    eps = 3.0 * float(budget)
    for trial in range(trials):
        pair = sample_mixture(spec, 2, derived_seed(seed, trial, 0))
        zs = sample_mixture(spec, mc_samples, derived_seed(seed, trial, 1))
        x, xp = pair.cloud.points
        dx = np.sort(np.linalg.norm(zs.cloud.points - x, axis=1))
        dxp = np.sort(np.linalg.norm(zs.cloud.points - xp, axis=1))
        lhs = float(np.mean(np.abs(dx - dxp)))
        center_gap = np.abs(
            np.linalg.norm(spec.centers - x, axis=1) - np.linalg.norm(spec.centers - xp, axis=1)
        )
        rhs = float(np.dot(spec.weights, center_gap))
        if lhs > rhs + eps:
            return False
    return True
