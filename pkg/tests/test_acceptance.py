"""Acceptance gate: one test per shipped guarantee.

Each test prints a PASS line with its headline numbers (visible under
pytest -s); the assertions themselves carry the stated tolerances.
Expected values come from the independent reference implementations in
oracles.py or from hand-derived constructions documented inline.
"""

import json
import math
import shutil
import subprocess
import time

import numpy as np
import pytest

from profilematch import (
    Coupling,
    DistanceProfile,
    MixtureSpec,
    PairedMixtures,
    PointCloud,
    apply_rigid,
    center_profile_distance,
    discrepancy_matrix,
    distance_profile,
    gw_objective,
    inlier_threshold_interval,
    lemma1_bound_check,
    make_paired_mixtures,
    match,
    match_clouds,
    pairwise_distances,
    product_coupling,
    random_rotation,
    run_mixture_experiment,
    run_noise_stability_experiment,
    sample_mixture,
    separation_report,
    solve_discrete_ot,
    solve_lap,
    theorem2_noise_bound,
    tlb,
    wasserstein_p,
)
from profilematch.cli import entry
from profilematch.io import write_point_cloud_csv
from profilematch.models import derived_rng, derived_seed
from oracles import lap_enum_oracle, ot_lp_oracle, random_profile, wasserstein_lp_oracle


def profile(values, weights):
    order = np.argsort(values, kind="stable")
    return DistanceProfile(np.asarray(values, float)[order], np.asarray(weights, float)[order])


def test_criterion_01_wasserstein_matches_exact_lp():
    start = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(500):
        vp, wp = random_profile(rng)
        vq, wq = random_profile(rng)
        p, q = profile(vp, wp), profile(vq, wq)
        for order in (1.0, 2.0):
            got = wasserstein_p(p, q, order)
            want = wasserstein_lp_oracle(vp, wp, vq, wq, order) ** (1.0 / order)
            worst = max(worst, abs(got - want))
            assert abs(got - want) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(f"CRITERION 1: PASS (500 pairs x orders 1,2; max |err| {worst:.2e}; "
          f"{elapsed:.1f}s)", flush=True)


def test_criterion_02_lap_matches_enumeration():
    start = time.perf_counter()
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 8))
        cost = rng.uniform(0.0, 10.0, size=(n, n))
        _, total = solve_lap(cost)
        want = lap_enum_oracle(cost)
        worst = max(worst, abs(total - want))
        assert abs(total - want) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"CRITERION 2: PASS (500 instances n<=7; max |err| {worst:.2e}; "
          f"{elapsed:.1f}s)", flush=True)


def test_criterion_03_ot_equals_lap_on_square_problems():
    rng = np.random.default_rng(1003)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 31))
        cost = rng.uniform(0.0, 5.0, size=(n, n))
        _, value = solve_discrete_ot(cost)
        _, lap_total = solve_lap(cost)
        err = abs(value - lap_total / n)
        worst = max(worst, err)
        assert err <= 1e-9
    print(f"CRITERION 3: PASS (100 square instances n<=30; max |err| {worst:.2e})",
          flush=True)


def random_vertex_coupling(rng, n, m):
    row = np.full(n, 1.0 / n)
    col = np.full(m, 1.0 / m)
    gamma = np.zeros((n, m))
    cells = [(i, j) for i in range(n) for j in range(m)]
    rng.shuffle(cells)
    for i, j in cells:
        take = min(row[i], col[j])
        gamma[i, j] += take
        row[i] -= take
        col[j] -= take
    return Coupling(gamma)


def test_criterion_04_tlb_lower_bounds_gw():
    rng = np.random.default_rng(1004)
    worst_slack = -np.inf
    for _ in range(100):
        n = int(rng.integers(2, 13))
        m = int(rng.integers(2, 13))
        d = int(rng.integers(1, 4))
        dx = pairwise_distances(PointCloud(rng.normal(size=(n, d))))
        dy = pairwise_distances(PointCloud(rng.normal(size=(m, d))))
        value, opt = tlb(dx, dy, 1.0)
        couplings = [opt, product_coupling(n, m)]
        couplings += [random_vertex_coupling(rng, n, m) for _ in range(10)]
        for coupling in couplings:
            gap = value - gw_objective(dx, dy, coupling, 1.0)
            worst_slack = max(worst_slack, gap)
            assert gap <= 1e-9
    print(f"CRITERION 4: PASS (100 instances x 12 couplings; worst tlb-gw gap "
          f"{worst_slack:.2e})", flush=True)


def test_criterion_05_rigid_invariance():
    rng = np.random.default_rng(1005)
    worst = 0.0
    for trial in range(50):
        n = int(rng.integers(5, 201))
        m = int(rng.integers(5, 201))
        d = int(rng.integers(2, 11))
        xs = PointCloud(rng.normal(size=(n, d)))
        ys = PointCloud(rng.normal(size=(m, d)))
        before = discrepancy_matrix(pairwise_distances(xs), pairwise_distances(ys), 1.0)
        moved = apply_rigid(ys, random_rotation(d, 5000 + trial), rng.normal(size=d))
        after = discrepancy_matrix(pairwise_distances(xs), pairwise_distances(moved), 1.0)
        err = float(np.max(np.abs(before.entries - after.entries)))
        worst = max(worst, err)
        assert err <= 1e-9
        assert np.array_equal(match(before).pi, match(after).pi)
    print(f"CRITERION 5: PASS (50 clouds; max entry drift {worst:.2e}; pi identical)",
          flush=True)


def test_criterion_06_lemma_bounds_hold_with_equality_instances():
    rng = np.random.default_rng(1006)
    # center-profile self-gap never exceeds outlier mass times center spread
    for seed in range(200):
        t = int(rng.integers(2, 7))
        k = int(rng.integers(1, t + 1))
        # d >= 2 keeps the separation rejection sampler off the 1-d packing
        # limit; the bound itself is dimension-free
        d = int(rng.integers(2, 4))
        pm = make_paired_mixtures(K=k, t=t, s=t, d=d, center_scale=2.0, sigma=0.1,
                                  seed=seed)
        assert lemma1_bound_check(pm)
    # saturating instance: all mu mass at the origin, nu outlier at distance c
    c = 2.5
    mu = MixtureSpec(np.zeros((2, 1)), np.array([0.6, 0.4]), np.zeros(2))
    nu = MixtureSpec(np.array([[0.0], [c]]), np.array([0.6, 0.4]), np.zeros(2))
    tight = PairedMixtures(mu, nu, 1)
    gap = center_profile_distance(tight, 0, 0)
    assert abs(gap - 0.4 * c) <= 1e-12
    assert lemma1_bound_check(tight)

    # W1 between same-support measures vs spread times worst CDF gap
    for _ in range(200):
        k = int(rng.integers(2, 9))
        vals = np.sort(rng.uniform(0.0, 6.0, size=k))
        wp = rng.uniform(0.05, 1.0, size=k)
        wp /= wp.sum()
        wq = rng.uniform(0.05, 1.0, size=k)
        wq /= wq.sum()
        got = wasserstein_p(profile(vals, wp), profile(vals, wq), 1.0)
        cap = (vals[-1] - vals[0]) * float(np.max(np.abs(np.cumsum(wp - wq)[:-1])))
        assert got <= cap + 1e-9
    vals = np.array([0.0, 4.0])
    got = wasserstein_p(profile(vals, [0.7, 0.3]), profile(vals, [0.2, 0.8]), 1.0)
    assert abs(got - 4.0 * 0.5) <= 1e-12
    print("CRITERION 6: PASS (2x200 randomized bounds + equality instances)", flush=True)


def test_criterion_07_profile_map_is_distance_lipschitz():
    rng = np.random.default_rng(1007)
    worst = -np.inf
    for _ in range(100):
        n = int(rng.integers(2, 81))
        d = int(rng.integers(1, 9))
        dm = pairwise_distances(PointCloud(rng.normal(size=(n, d))))
        disc = discrepancy_matrix(dm, dm, 1.0)
        slack = float(np.max(disc.entries - dm.entries))
        worst = max(worst, slack)
        assert slack <= 1e-9
    print(f"CRITERION 7: PASS (100 clouds; max W1-minus-distance {worst:.2e})",
          flush=True)


def test_criterion_08_mixture_recovery_curve():
    start = time.perf_counter()
    seed, d, n, delta = 20, 3, 1000, 0.05
    base = separation_report(
        make_paired_mixtures(K=10, t=10, s=10, d=d, center_scale=1.0, sigma=0.0,
                             seed=derived_seed(seed, 0)),
        n, n, delta,
    )
    # the finite-sample term alone already exceeds the profile margin at
    # this size, so the smallest sigma is set by the spread-driven terms
    assert base.rhs > base.omega
    sigma0 = 0.99 * base.omega * min(
        1.0 / (16.0 * math.sqrt(d)),
        1.0 / (32.0 * math.sqrt(2.0 * math.log(4.0 * n**2 / delta))),
    )
    assert 16.0 * sigma0 * math.sqrt(d) < base.omega
    assert 32.0 * sigma0 * math.sqrt(2.0 * math.log(4.0 * n**2 / delta)) < base.omega

    sigmas = [sigma0 * f for f in (1, 16, 64, 128, 256)]
    common = {"d": d, "n": n, "m": n, "sigmas": sigmas, "replicates": 100, "seed": seed}
    clean = run_mixture_experiment({"K": 10, "t": 10, "s": 10, **common})
    contaminated = run_mixture_experiment({"K": 10, "t": 11, "s": 11, **common})
    assert len(clean) == len(contaminated) == 500

    def per_sigma(records, field):
        return [
            float(np.mean([getattr(r, field) for r in records if r.sigma == s]))
            for s in sigmas
        ]

    perfect = per_sigma(clean, "perfect")
    assert perfect[0] >= 0.95
    for k in range(len(sigmas) - 1):
        assert perfect[k + 1] <= perfect[k] + 0.1
    acc_clean = per_sigma(clean, "accuracy")
    acc_cont = per_sigma(contaminated, "accuracy")
    for a_cont, a_clean in zip(acc_cont, acc_clean):
        assert a_cont <= a_clean + 0.05
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    print(f"CRITERION 8: PASS (perfect rate {['%.2f' % p for p in perfect]}, "
          f"contaminated acc {['%.2f' % a for a in acc_cont]}; {elapsed:.0f}s)",
          flush=True)


def test_criterion_09_rotation_robustness_split():
    start = time.perf_counter()
    seed, d, n, delta = 31, 10, 100, 0.05
    # same fixed locations the experiment runner derives from this seed
    locations = PointCloud(derived_rng(seed, 0).random((n, d)) - 0.5)
    sigma_cap = math.sqrt(theorem2_noise_bound(locations, delta))
    grid = [0.25 * sigma_cap, 0.5 * sigma_cap, sigma_cap]
    common = {"d": d, "n": n, "replicates": 100, "seed": seed}

    two = run_noise_stability_experiment({"sigmas": grid, "rotation": "two_coord", **common})

    def freq(records, method, sigma):
        sel = [r.perfect for r in records if r.method == method and r.sigma == sigma]
        return float(np.mean(sel))

    freq_profile = freq(two, "assignment", grid[0])
    freq_ot = freq(two, "ot_baseline", grid[0])
    assert freq_profile >= 0.9
    assert freq_ot >= 0.9

    full = run_noise_stability_experiment(
        {"sigmas": [grid[0]], "rotation": "full", **common}
    )
    full_profile = freq(full, "assignment", grid[0])
    full_ot = freq(full, "ot_baseline", grid[0])
    assert full_profile >= 0.9
    assert full_ot <= 0.2
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    print(f"CRITERION 9: PASS (two_coord {freq_profile:.2f}/{freq_ot:.2f}, "
          f"full rotation {full_profile:.2f}/{full_ot:.2f}; {elapsed:.0f}s)", flush=True)


def test_criterion_10_noise_bound_guarantees_recovery():
    seed, d, n, delta = 57, 10, 100, 0.05
    locations = PointCloud(derived_rng(seed, 0).random((n, d)) - 0.5)
    sigma = math.sqrt(theorem2_noise_bound(locations, delta))  # sigma^2 == bound
    records = run_noise_stability_experiment(
        {"d": d, "n": n, "sigmas": [sigma], "rotation": "full",
         "replicates": 200, "seed": seed}
    )
    freq = float(np.mean([r.perfect for r in records if r.method == "assignment"]))
    assert freq >= 0.9
    print(f"CRITERION 10: PASS (recovery frequency {freq:.3f} at the bound, "
          f"200 replicates)", flush=True)


def test_criterion_11_profile_convergence_scaling():
    start = time.perf_counter()
    from scipy.spatial.distance import cdist

    spec = MixtureSpec(
        np.array([[0.0, 0.0], [2.2, 0.3], [0.7, 1.9]]),
        np.array([0.5, 0.3, 0.2]),
        np.full(3, 0.4),
    )
    seed = 404
    dm_ref = pairwise_distances(sample_mixture(spec, 1000, derived_seed(seed, 0)).cloud)
    ref_big = sample_mixture(spec, 20_000, derived_seed(seed, 1)).cloud
    w_big = np.full(ref_big.n, 1.0 / ref_big.n)

    sizes = [50, 100, 200, 400]
    reps = 20
    tlb_stats = np.empty((len(sizes), reps))
    sup_stats = np.empty((len(sizes), reps))
    for a, n in enumerate(sizes):
        for r in range(reps):
            cloud = sample_mixture(spec, n, derived_seed(seed, 2, n, r)).cloud
            dmc = pairwise_distances(cloud)
            tlb_stats[a, r], _ = tlb(dmc, dm_ref, 1.0)
            to_ref = np.sort(cdist(cloud.points, ref_big.points), axis=1)
            worst = 0.0
            for i in range(n):
                dev = wasserstein_p(
                    distance_profile(dmc, i), DistanceProfile(to_ref[i], w_big), 1.0
                )
                worst = max(worst, dev)
            sup_stats[a, r] = worst

    def check_monotone(stats, name):
        means = stats.mean(axis=1)
        ses = stats.std(axis=1) / math.sqrt(reps)
        violations = 0
        for k in range(len(sizes) - 1):
            rise = means[k + 1] - means[k]
            if rise > 0.0:
                violations += 1
                assert rise <= math.hypot(ses[k], ses[k + 1]), (
                    f"{name} rose by {rise} at n={sizes[k + 1]}"
                )
        assert violations <= 1, f"{name} violated monotonicity {violations} times"
        return means

    tlb_means = check_monotone(tlb_stats, "tlb")
    sup_means = check_monotone(sup_stats, "sup-deviation")
    slope = float(np.polyfit(np.log(sizes), np.log(sup_means), 1)[0])
    assert -0.8 <= slope <= -0.25
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    print(f"CRITERION 11: PASS (tlb {['%.3f' % v for v in tlb_means]}, "
          f"sup-dev slope {slope:.2f}; {elapsed:.0f}s)", flush=True)


def test_criterion_12_threshold_interval_isolates_inliers():
    # one shared component (mass 0.9) at the origin; each side has its own
    # outlier (mu at 1.0, nu at 0.5).  Exact-proportion clouds of ten points
    # make the empirical profiles equal to the population ones, so the
    # interval ends are exact: lo = 0.1*|1-0.5| = 0.05, hi = 0.8*0.5 +
    # 0.1*|1-0.5| = 0.45.
    mu = MixtureSpec(np.array([[0.0], [1.0]]), np.array([0.9, 0.1]), np.zeros(2))
    nu = MixtureSpec(np.array([[0.0], [0.5]]), np.array([0.9, 0.1]), np.zeros(2))
    pm = PairedMixtures(mu, nu, 1)
    report = separation_report(pm, 10, 10, 0.05)
    assert report.omega_prime > 0.0  # strengthened separation, outliers included
    assert abs(report.omega_prime - 0.35) <= 1e-12

    x = PointCloud(np.array([[0.0]] * 9 + [[1.0]]))
    y = PointCloud(np.array([[0.0]] * 9 + [[0.5]]))
    labels_x = [0] * 9 + [1]
    result = match_clouds(x, y, 1.0)
    lo, hi = inlier_threshold_interval(result, labels_x, K=1)
    assert lo < hi
    assert abs(lo - 0.05) <= 1e-12 and abs(hi - 0.45) <= 1e-12
    true_inliers = list(range(9))
    for rho in (lo + 1e-9, 0.5 * (lo + hi), hi):
        gated = match_clouds(x, y, 1.0, threshold=rho)
        assert gated.inliers.tolist() == true_inliers
    print(f"CRITERION 12: PASS (interval ({lo}, {hi}]; inliers exact at 3 thresholds)",
          flush=True)


def _run_cli_inprocess(argv):
    code = entry(argv)
    assert code == 0, f"CLI failed: {argv}"


def test_criterion_13_cli_reruns_are_byte_identical(tmp_path):
    rng = np.random.default_rng(1013)
    src = tmp_path / "src.csv"
    tgt = tmp_path / "tgt.csv"
    write_point_cloud_csv(src, PointCloud(rng.normal(size=(15, 3))))
    write_point_cloud_csv(tgt, PointCloud(rng.normal(size=(15, 3))))
    mix_cfg = tmp_path / "mix.json"
    mix_cfg.write_text(json.dumps({
        "d": 2, "K": 2, "t": 2, "s": 2, "n": 40, "m": 40,
        "sigmas": [0.0, 0.05], "replicates": 2, "seed": 3,
    }))

    def outputs(tag):
        base = tmp_path / tag
        base.mkdir()
        jobs = [
            (["match", "--source", str(src), "--target", str(tgt),
              "--threshold", "0.8", "--out", str(base / "match.csv")],
             ["match.csv"]),
            (["assign", "--source", str(src), "--target", str(tgt),
              "--out", str(base / "assign.csv")], ["assign.csv"]),
            (["assign", "--source", str(src), "--target", str(tgt), "--baseline",
              "--out", str(base / "baseline.csv")], ["baseline.csv"]),
            (["tlb", "--source", str(src), "--target", str(tgt),
              "--emit-coupling", str(base / "gamma.csv")],
             ["gamma.csv", "gamma.csv.json"]),
            (["simulate", "mixture", "--config", str(mix_cfg),
              "--out", str(base / "mix.csv"), "--summary", str(base / "mix.json")],
             ["mix.csv", "mix.json"]),
            (["simulate", "noise", "--d", "2", "--n", "10", "--sigmas", "0.0,0.01",
              "--rotation", "two_coord", "--replicates", "2", "--seed", "5",
              "--out", str(base / "noise.csv")],
             ["noise.csv", "noise.csv.summary.json"]),
            (["cluster", "--input", str(src), "--k", "3", "--seed", "7",
              "--out", str(base / "labels.csv")], ["labels.csv"]),
        ]
        produced = {}
        for argv, names in jobs:
            _run_cli_inprocess(argv)
            for name in names:
                produced[name] = (base / name).read_bytes()
        return produced

    first = outputs("run1")
    second = outputs("run2")
    assert set(first) == set(second)
    for name in first:
        assert first[name] == second[name], f"{name} differs between reruns"

    # the installed console script must behave the same way end to end
    exe = shutil.which("profilematch")
    assert exe is not None, "console script not installed"
    for tag in ("s1", "s2"):
        out = tmp_path / f"script_{tag}.csv"
        proc = subprocess.run(
            [exe, "match", "--source", str(src), "--target", str(tgt),
             "--out", str(out)],
            capture_output=True, text=True, timeout=180,
        )
        assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "script_s1.csv").read_bytes() == (
        tmp_path / "script_s2.csv"
    ).read_bytes()
    assert first["match.csv"] != b""
    print(f"CRITERION 13: PASS ({len(first)} output files byte-identical across reruns)",
          flush=True)
