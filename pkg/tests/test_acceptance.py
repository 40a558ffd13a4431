"""Exit criteria of the build, one test per criterion.

Seeds are fixed here once (base seed 0, trial indices 0..k-1) and are not
tuned. Each test records a one-line PASS/FAIL summary printed at the end
of the pytest run.
"""

import math
import random
import time

import numpy as np

from conftest import brute_counts, brute_sumset
from pseudopowers import cli
from pseudopowers.events import (build_interval_system, exact_gap_probability,
                                 janson_bounds, lemma_sum_iii, montecarlo_gap_probability,
                                 omega_probability_sum, random_interval_systems)
from pseudopowers.modelmath import gamma_reciprocal_power, gap_constant, lambda_s
from pseudopowers.sampler import sample_sequence
from pseudopowers.stats import (exponent_fit, poisson_reference, pooled_distribution, run_trial,
                                sumset_density, total_variation)
from pseudopowers.sumset import gaps, max_normalized_gap, representation_counts, sumset

BASE_SEED = 0
PI_8 = math.pi / 8
# 40-digit references
GAMMA_REF = {1: 1.0, 2: 1.772453850905516027298167483341145182798,
             3: 2.678938534707747633655692940974677644129}
LAMBDA_3 = 0.118678823781454899329535696625670964295


def rel(a, b):
    return abs(a - b) / abs(b)


def test_c01_constants(criterion):
    errs = [rel(lambda_s(2), PI_8), rel(gap_constant(2), 8 / math.pi)]
    gam = [rel(gamma_reciprocal_power(s), v) for s, v in GAMMA_REF.items()]
    ok = max(errs) <= 1e-10 and max(gam) <= 1e-12
    criterion(1, ok, f"lambda/gap rel err {max(errs):.1e} (<=1e-10), Gamma rel err {max(gam):.1e} (<=1e-12)")
    assert ok


def test_c02_oracle_equivalence(criterion):
    rng = random.Random(20261019)
    mismatches = 0
    start = time.perf_counter()
    for _ in range(200):
        N = rng.randint(1, 500)
        A = rng.sample(range(1, N + 1), rng.randint(0, min(30, N)))
        s = rng.choice([2, 3, 4])
        if set(sumset(A, s, N).members().tolist()) != brute_sumset(A, s, N):
            mismatches += 1
        table = representation_counts(A, s, N)
        got = {int(n): int(table.counts[n]) for n in np.flatnonzero(table.counts)}
        if got != brute_counts(A, s, N):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 30
    criterion(2, ok, f"200 instances, {mismatches} mismatches, {elapsed:.1f}s (<30s)")
    assert ok


def test_c03_janson_sandwich(criterion):
    start = time.perf_counter()
    systems = random_interval_systems(BASE_SEED, 100, (2, 3), 20)
    failures = 0
    for s, i, alpha, M in systems:
        system = build_interval_system(i, alpha, s, M)
        lower, upper = janson_bounds(system)
        exact = exact_gap_probability(s, M, system.interval)
        # relative 1e-12 only absorbs floating-point rounding of the products
        if not (lower <= exact * (1 + 1e-12) and exact <= upper * (1 + 1e-12)):
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 120 and max(M for *_, M in systems) <= 20
    criterion(3, ok, f"{len(systems)} systems (M<=20, s in 2,3), {failures} violations, {elapsed:.1f}s")
    assert ok


def test_c04_exact_vs_montecarlo(criterion):
    start = time.perf_counter()
    p = lambda n: 0.5 * n ** -0.5
    worked = exact_gap_probability(2, 3, [4, 5])
    hand = (1 - p(2)) * (1 - p(1) * p(3))
    cases = [(2, [4, 5], 3)]
    for s, i, alpha, M in random_interval_systems(BASE_SEED + 1, 40, (2, 3), 12):
        system = build_interval_system(i, alpha, s, M)
        if len(system) and len(cases) < 24:
            cases.append((s, system.interval, M))
    worst = 0.0
    for k, (s, interval, M) in enumerate(cases):
        exact = exact_gap_probability(s, M, interval)
        est, se = montecarlo_gap_probability(s, interval=interval, universe_cap=M,
                                             trials=100_000, seed=BASE_SEED, stream=k)
        z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
        worst = max(worst, z)
    elapsed = time.perf_counter() - start
    ok = worst <= 3 and len(cases) >= 20 and abs(worked - hand) < 1e-15 and elapsed < 120
    criterion(4, ok, f"{len(cases)} systems, worst |MC-exact|/SE = {worst:.2f} (<=3), "
                     f"M=3 exact {worked:.7f}, {elapsed:.1f}s")
    assert ok


def test_c05_lemma_iii(criterion):
    start = time.perf_counter()
    errs = [abs(lemma_sum_iii(2, z).value - math.pi / 2) for z in (10**3, 10**4, 10**5)]
    at_1e4 = errs[1] / (math.pi / 2)
    s2_ok = at_1e4 < 0.02 and errs[0] > errs[1] > errs[2]
    s3 = lemma_sum_iii(3, 3000).value
    target3 = 27 * LAMBDA_3
    s3_dev = rel(s3, target3)
    s3_ok = s3_dev <= 0.10
    elapsed = time.perf_counter() - start
    ok = s2_ok and s3_ok
    criterion(5, ok, f"s=2: rel err {at_1e4:.2e} at z=1e4 (<2%), decreasing={errs[0] > errs[1] > errs[2]}; "
                     f"s=3 z=3000: {s3:.4f} vs 27*lambda_3={target3:.4f}, dev {s3_dev:.1%} (<=10%); {elapsed:.1f}s")
    assert s2_ok, "s=2 part"
    assert s3_ok, "s=3 part: z^(-1/3) convergence leaves a 13.9% deficit at z=3000"


def test_c06_lemma_3_1(criterion):
    zs = (10**2, 10**3, 10**4)
    errs = [abs(omega_probability_sum(z, 2) - PI_8) for z in zs]
    ok = errs[-1] < 0.05 * PI_8 and errs[0] > errs[1] > errs[2]
    criterion(6, ok, f"|sum - pi/8| along z grid: {', '.join(f'{e:.2e}' for e in errs)}; "
                     f"{errs[-1] / PI_8:.2%} of pi/8 at 1e4 (<5%)")
    assert ok


def test_c07_poisson_profile(criterion):
    start = time.perf_counter()
    reports = [run_trial(2, 10**6, BASE_SEED, k, n_min=10**3, gap_min_b=10**3) for k in range(5)]
    pooled = {}
    for r in reports:
        for d, c in r.rep_histogram.items():
            pooled[d] = pooled.get(d, 0) + c
    d_max = 10
    tv = total_variation(pooled_distribution(pooled, d_max), poisson_reference(PI_8, d_max))
    densities = []
    for k in range(5):
        profile = sumset(sample_sequence(2, 10**7, BASE_SEED, k), 2, 10**7)
        densities.append(sumset_density(profile, 10**3))
    density = math.fsum(densities) / len(densities)
    target = 1 - math.exp(-PI_8)
    elapsed = time.perf_counter() - start
    tv_ok = tv < 0.02
    dens_ok = abs(density - target) <= 0.01
    ok = tv_ok and dens_ok
    criterion(7, ok, f"pooled TV {tv:.4f} (<0.02); mean density at 1e7 {density:.4f} vs {target:.4f} "
                     f"(+-0.01; per trial {', '.join(f'{d:.4f}' for d in densities)}); {elapsed:.0f}s")
    assert tv_ok, "TV distance"
    assert dens_ok, "density band"


def test_c08_gap_trend(criterion):
    start = time.perf_counter()
    values = []
    for k in range(10):
        profile = sumset(sample_sequence(2, 10**7, BASE_SEED, k), 2, 10**7)
        values.append(max_normalized_gap(gaps(profile, min_b=10**3)))
    median = float(np.median(values))
    elapsed = time.perf_counter() - start
    each_ok = all(1.2 <= v <= 4.8 for v in values)
    median_ok = 1.7 <= median <= 3.6
    ok = each_ok and median_ok
    criterion(8, ok, f"max normalized gaps {', '.join(f'{v:.3f}' for v in values)} (each in [1.2, 4.8]); "
                     f"median {median:.3f} (in [1.7, 3.6], 8/pi={8 / math.pi:.3f}); {elapsed:.0f}s")
    assert each_ok, "per-trial band"
    assert median_ok, "median band"


def test_c09_exponent_fit(criterion):
    start = time.perf_counter()
    grid = (200, 400, 800, 1600)
    points = []
    for i in grid:
        est, _ = montecarlo_gap_probability(2, i, 2.0, trials=100_000, seed=BASE_SEED)
        points.append((i, est))
    fit = exponent_fit(points)
    target = -2 * PI_8
    elapsed = time.perf_counter() - start
    ok = rel(fit.slope, target) <= 0.15 and fit.r_squared > 0.9
    criterion(9, ok, f"slope {fit.slope:.4f} vs {target:.4f} ({rel(fit.slope, target):.1%}, <=15%), "
                     f"r^2 {fit.r_squared:.4f} (>0.9); estimates {[f'{p:.5f}' for _, p in points]}; {elapsed:.0f}s")
    assert ok


DETERMINISM_RUNS = [
    ["sample", "--s", "2", "--n", "200000", "--seed", "7"],
    ["gaps", "--s", "2", "--n", "200000", "--seed", "3", "--trials", "8"],
    ["poisson", "--s", "2", "--n", "100000", "--seed", "3", "--trials", "8", "--n-min", "1000"],
    ["lemma", "--s", "3", "--z", "50,500", "--t", "2", "--coeffs", "1,1"],
    ["janson", "--seed", "3", "--systems", "16", "--max-m", "14"],
    ["gapprob", "--seed", "3", "--i", "20,40,80,160", "--trials", "5000"],
]


def test_c10_determinism(criterion, tmp_path, monkeypatch):
    monkeypatch.setenv("PSEUDOPOWERS_RUNLOG", str(tmp_path / "runlog.jsonl"))
    start = time.perf_counter()
    differing = []
    for argv in DETERMINISM_RUNS:
        outputs = {}
        for workers in (1, 8, 1):
            out = tmp_path / f"{argv[0]}_{workers}_{len(outputs)}"
            assert cli.main(argv + ["--workers", str(workers), "--out-dir", str(out)]) == 0
            outputs[(workers, len(outputs))] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        files = list(outputs.values())
        if not all(f == files[0] for f in files[1:]):
            differing.append(argv[0])
    elapsed = time.perf_counter() - start
    ok = not differing and elapsed < 300
    criterion(10, ok, f"{len(DETERMINISM_RUNS)} commands x (1, 8, 1) workers, "
                      f"differing: {differing or 'none'}; {elapsed:.0f}s")
    assert ok
