"""Synthetic data generators: Gaussian mixtures with shared components,
noisy rigid-correspondence instances, rotations, and k-means plumbing.

All samplers are pure functions of their seed.  Derived child seeds (via
SeedSequence) isolate the RNG streams of replicates so experiment sweeps
stay reproducible regardless of evaluation order.
"""

from dataclasses import dataclass, field

import numpy as np

from .assignment import Permutation
from .errors import DimensionMismatchError, InputFormatError
from .geometry import PointCloud

__all__ = [
    "MixtureSpec",
    "PairedMixtures",
    "LabeledSample",
    "sample_mixture",
    "make_paired_mixtures",
    "random_rotation",
    "make_two_coordinate_rotation",
    "apply_rigid",
    "noisy_correspondence_instance",
    "kmeans",
    "derived_rng",
    "derived_seed",
]

_U64 = (1 << 64) - 1


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for (seed, key); distinct keys give independent streams."""
    entropy = [int(seed) & _U64] + [int(k) & _U64 for k in key]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derived_seed(seed: int, *key: int) -> int:
    """Deterministic child seed for (seed, key), for seeding sub-samplers."""
    entropy = [int(seed) & _U64] + [int(k) & _U64 for k in key]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


@dataclass
class MixtureSpec:
    """Isotropic Gaussian mixture: one center, weight, and std per component."""

    centers: np.ndarray
    weights: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.centers, dtype=np.float64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        s = np.ascontiguousarray(self.stds, dtype=np.float64)
        if c.ndim != 2 or w.ndim != 1 or s.ndim != 1:
            raise DimensionMismatchError("centers must be 2-d, weights and stds 1-d")
        if not (c.shape[0] == w.shape[0] == s.shape[0]) or c.shape[0] == 0:
            raise DimensionMismatchError("component counts of centers/weights/stds differ")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(w)) and np.all(np.isfinite(s))):
            raise InputFormatError("mixture spec contains non-finite entries")
        if np.any(w < 0.0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise InputFormatError("weights must be nonnegative and sum to 1")
        # either a genuinely noisy mixture or the exactly noiseless case
        if not (np.all(s > 0.0) or np.all(s == 0.0)):
            raise InputFormatError("stds must be all positive or all exactly zero")
        self.centers = c
        self.weights = w
        self.stds = s

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]


@dataclass
class PairedMixtures:
    """Two mixtures whose first K components are identical."""

    mu: MixtureSpec
    nu: MixtureSpec
    K: int

    def __post_init__(self):
        k = int(self.K)
        if not 1 <= k <= min(self.mu.k, self.nu.k):
            raise InputFormatError(f"shared component count {k} out of range")
        if self.mu.d != self.nu.d:
            raise DimensionMismatchError("mixtures live in different dimensions")
        same = (
            np.array_equal(self.mu.centers[:k], self.nu.centers[:k])
            and np.array_equal(self.mu.weights[:k], self.nu.weights[:k])
            and np.array_equal(self.mu.stds[:k], self.nu.stds[:k])
        )
        if not same:
            raise InputFormatError("first shared components must match in center, weight, std")
        self.K = k


@dataclass
class LabeledSample:
    """Point cloud plus the component index each point was drawn from."""

    cloud: PointCloud
    labels: np.ndarray

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.shape[0] != self.cloud.n:
            raise DimensionMismatchError("labels must be 1-d with one entry per point")
        if lab.size and np.min(lab) < 0:
            raise InputFormatError("labels must be nonnegative")
        self.labels = lab


def sample_mixture(spec: MixtureSpec, n: int, seed: int) -> LabeledSample:
    """Draw n points: component by weight, then center + std * Gaussian."""
    if n < 1:
        raise InputFormatError(f"sample size must be >= 1, got {n}")
    rng = derived_rng(seed)
    labels = rng.choice(spec.k, size=n, p=spec.weights)
    noise = rng.standard_normal((n, spec.d))
    points = spec.centers[labels] + spec.stds[labels, None] * noise
    return LabeledSample(PointCloud(points), labels)


def make_paired_mixtures(
    K: int,
    t: int,
    s: int,
    d: int,
    center_scale: float,
    sigma: float,
    seed: int,
) -> PairedMixtures:
    """Uniform-weight paired mixtures with K shared components.

    Centers are drawn uniformly in [0, center_scale]^d and redrawn until
    every pair is at least 0.1 * center_scale apart, so the shared
    components are identifiable.  Shared components must carry equal
    weight on both sides, which with uniform weights 1/t and 1/s forces
    t == s.
    """
    if not 1 <= K <= min(t, s):
        raise InputFormatError(f"need 1 <= K <= min(t, s), got K={K}, t={t}, s={s}")
    if t != s:
        raise InputFormatError("uniform weights require t == s for the shared components")
    if d < 1:
        raise DimensionMismatchError(f"dimension must be >= 1, got {d}")
    center_scale = float(center_scale)
    sigma = float(sigma)
    if not (np.isfinite(center_scale) and center_scale > 0.0):
        raise InputFormatError("center_scale must be positive and finite")
    if not (np.isfinite(sigma) and sigma >= 0.0):
        raise InputFormatError("sigma must be nonnegative and finite")

    rng = derived_rng(seed)
    total = t + s - K
    min_sep = 0.1 * center_scale
    accepted = np.empty((total, d))
    count = 0
    attempts = 0
    while count < total:
        attempts += 1
        if attempts > 10_000 * total:
            raise InputFormatError("could not place separated centers; lower K or raise scale")
        cand = rng.uniform(0.0, center_scale, size=d)
        if count and np.min(np.linalg.norm(accepted[:count] - cand, axis=1)) < min_sep:
            continue
        accepted[count] = cand
        count += 1

    theta = np.concatenate([accepted[:K], accepted[K : K + (t - K)]])
    eta = np.concatenate([accepted[:K], accepted[K + (t - K) :]])
    mu = MixtureSpec(theta, np.full(t, 1.0 / t), np.full(t, sigma))
    nu = MixtureSpec(eta, np.full(s, 1.0 / s), np.full(s, sigma))
    return PairedMixtures(mu, nu, K)


def random_rotation(d: int, seed: int) -> np.ndarray:
    """Haar-distributed rotation with determinant +1."""
    if d < 1:
        raise DimensionMismatchError(f"dimension must be >= 1, got {d}")
    rng = derived_rng(seed)
    a = rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    sign = np.sign(np.diagonal(r))
    sign[sign == 0.0] = 1.0
    q = q * sign
    if np.linalg.det(q) < 0.0:
        q[:, -1] = -q[:, -1]
    return q


def make_two_coordinate_rotation(d: int, angle: float) -> np.ndarray:
    """Rotation by `angle` in the plane of the first two coordinates."""
    if d < 2:
        raise DimensionMismatchError(f"two-coordinate rotation needs d >= 2, got {d}")
    r = np.eye(d)
    c, s = np.cos(angle), np.sin(angle)
    r[0, 0] = c
    r[0, 1] = -s
    r[1, 0] = s
    r[1, 1] = c
    return r


def apply_rigid(cloud: PointCloud, rotation: np.ndarray, shift: np.ndarray) -> PointCloud:
    """Map every point x to rotation @ x + shift."""
    r = np.asarray(rotation, dtype=np.float64)
    b = np.asarray(shift, dtype=np.float64)
    if r.shape != (cloud.d, cloud.d) or b.shape != (cloud.d,):
        raise DimensionMismatchError(
            f"transform shapes {r.shape}, {b.shape} do not fit dimension {cloud.d}"
        )
    return PointCloud(cloud.points @ r.T + b)


def noisy_correspondence_instance(
    thetas: PointCloud,
    rotation: np.ndarray,
    shift: np.ndarray,
    pi_star: Permutation,
    sigma: float,
    tau: float,
    seed: int,
) -> tuple[PointCloud, PointCloud]:
    """Rigid-correspondence model: X around the locations, Y around their
    transformed images placed at positions pi_star."""
    sigma = float(sigma)
    tau = float(tau)
    if not (np.isfinite(sigma) and sigma >= 0.0 and np.isfinite(tau) and tau >= 0.0):
        raise InputFormatError("noise levels must be nonnegative and finite")
    if pi_star.n != thetas.n:
        raise DimensionMismatchError("permutation size does not match the locations")
    transformed = apply_rigid(thetas, rotation, shift)
    rng = derived_rng(seed)
    xi = rng.standard_normal((thetas.n, thetas.d))
    zeta = rng.standard_normal((thetas.n, thetas.d))
    x = thetas.points + sigma * xi
    eta = np.empty_like(transformed.points)
    eta[pi_star.mapping] = transformed.points
    y = eta + tau * zeta
    return PointCloud(x), PointCloud(y)


def kmeans(cloud: PointCloud, k: int, seed: int, max_iters: int = 100) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; returns one label per point.

    Runs until the assignment stops changing or max_iters is hit.  A
    cluster that loses all members is re-seeded to the point farthest from
    its current center.
    """
    if not 1 <= k <= cloud.n:
        raise InputFormatError(f"need 1 <= k <= n, got k={k}, n={cloud.n}")
    if max_iters < 1:
        raise InputFormatError("max_iters must be >= 1")
    pts = cloud.points
    n = cloud.n
    rng = derived_rng(seed)

    centers = np.empty((k, cloud.d))
    centers[0] = pts[rng.integers(n)]
    closest = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(np.sum(closest))
        if total <= 0.0:
            centers[j] = pts[rng.integers(n)]
        else:
            centers[j] = pts[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, np.sum((pts - centers[j]) ** 2, axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iters):
        d2 = (
            np.sum(pts**2, axis=1)[:, None]
            - 2.0 * pts @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_labels = np.argmin(d2, axis=1).astype(np.int64)
        for j in range(k):
            mask = new_labels == j
            if np.any(mask):
                centers[j] = np.mean(pts[mask], axis=0)
            else:
                far = int(np.argmax(np.min(d2, axis=1)))
                centers[j] = pts[far]
                new_labels[far] = j
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels
