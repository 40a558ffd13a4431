"""Per-trial statistics and their aggregation across trials."""

import math
import statistics
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .modelmath import poisson_pmf
from .sampler import sample_sequence
from .sumset import (NoDataError, RepCountTable, SumsetProfile, gaps, max_normalized_gap,
                     representation_counts, sumset)


@dataclass(frozen=True)
class PoissonProfile:
    """Counts of n in [n_min, N] with r_s(A, n) = d for d <= d_max, plus an overflow bucket."""

    n_min: int
    limit_n: int
    counts: Tuple[int, ...]  # length d_max + 2, last entry counts d > d_max

    @property
    def d_max(self) -> int:
        return len(self.counts) - 2

    @property
    def total(self) -> int:
        return sum(self.counts)

    def fractions(self) -> List[Fraction]:
        return [Fraction(c, self.total) for c in self.counts]

    def frequencies(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.total


def poisson_profile(table: RepCountTable, n_min: int, d_max: int) -> PoissonProfile:
    if n_min < 1 or d_max < 0:
        raise ValueError("need n_min >= 1 and d_max >= 0")
    if n_min > table.limit_n:
        raise NoDataError("n_min exceeds limit_n")
    r = table.counts[n_min:]
    hist = np.bincount(np.minimum(r, d_max + 1), minlength=d_max + 2)
    return PoissonProfile(n_min=n_min, limit_n=table.limit_n, counts=tuple(int(c) for c in hist))


def poisson_reference(lam: float, d_max: int) -> np.ndarray:
    """Poisson(lam) masses for d <= d_max followed by the tail mass P(D > d_max)."""
    head = poisson_pmf(lam, np.arange(d_max + 1))
    return np.append(head, max(0.0, 1.0 - math.fsum(head)))


def total_variation(p, q) -> float:
    """Half the L1 distance; the shorter vector is zero-extended."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for name, v in (("p", p), ("q", q)):
        if abs(math.fsum(v) - 1.0) > 1e-9:
            raise ValueError(f"{name} does not sum to 1")
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return 0.5 * math.fsum(np.abs(p - q))


def sumset_density(profile: SumsetProfile, n_min: int = 1) -> float:
    """Fraction of [n_min, N] covered by sA."""
    if not 1 <= n_min <= profile.limit_n:
        raise ValueError("need 1 <= n_min <= limit_n")
    window = profile.membership[n_min:]
    return int(np.count_nonzero(window)) / window.size


@dataclass(frozen=True)
class PowerFit:
    slope: float
    intercept: float
    r_squared: float
    dropped: int = 0


def exponent_fit(points: Sequence[Tuple[float, float]]) -> PowerFit:
    """Unweighted least squares of log(probability) on log(i)."""
    kept = [(i, p) for i, p in points if p > 0]
    dropped = len(points) - len(kept)
    if dropped:
        warnings.warn(f"exponent_fit dropped {dropped} zero-probability point(s)", stacklevel=2)
    if len(kept) < 3:
        raise ValueError("need at least 3 points with positive probability")
    x = np.log([i for i, _ in kept])
    y = np.log([p for _, p in kept])
    design = np.column_stack((x, np.ones_like(x)))
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return PowerFit(slope=float(slope), intercept=float(intercept), r_squared=r2, dropped=dropped)


def default_burn_in(limit_n: int) -> int:
    return min(limit_n, max(100, math.isqrt(limit_n)))


@dataclass(frozen=True)
class TrialReport:
    s: int
    limit_n: int
    seed: int
    trial_index: int
    n_min: int
    sequence_size: int
    sumset_density: float
    max_normalized_gap: float  # nan if no gap in the window
    rep_histogram: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rep_histogram"] = {str(d): c for d, c in sorted(self.rep_histogram.items())}
        return out


def run_trial(s: int, limit_n: int, seed: int, trial_index: int,
              n_min: Optional[int] = None, gap_min_b: Optional[int] = None,
              with_histogram: bool = True) -> TrialReport:
    """Sample one sequence and collect its density, gap and representation statistics.

    ``n_min`` is the burn-in for density and histogram, ``gap_min_b`` the
    smallest left endpoint for the max normalized gap; both default to
    max(100, sqrt(N)).
    """
    n_min = default_burn_in(limit_n) if n_min is None else n_min
    gap_min_b = max(2, default_burn_in(limit_n) if gap_min_b is None else gap_min_b)
    seq = sample_sequence(s, limit_n, seed, trial_index)
    profile = sumset(seq, s, limit_n)
    try:
        mng = max_normalized_gap(gaps(profile, gap_min_b))
    except NoDataError:
        mng = float("nan")
    hist = {}
    if with_histogram:
        table = representation_counts(seq, s, limit_n)
        counts = np.bincount(table.counts[n_min:])
        hist = {d: int(c) for d, c in enumerate(counts) if c}
    return TrialReport(s=s, limit_n=limit_n, seed=seed, trial_index=trial_index, n_min=n_min,
                       sequence_size=len(seq), sumset_density=sumset_density(profile, n_min),
                       max_normalized_gap=mng, rep_histogram=hist)


def _describe(values: List[float]) -> dict:
    n = len(values)
    mean = math.fsum(values) / n
    sd = statistics.stdev(values) if n > 1 else 0.0
    return {"mean": mean, "median": statistics.median(values), "std_error": sd / math.sqrt(n),
            "min": min(values), "max": max(values)}


def aggregate(reports: Sequence[TrialReport]) -> dict:
    """Means, medians and standard errors per statistic plus the pooled histogram.

    Reports are sorted by (seed, trial_index) first, so the result does not
    depend on the order in which trials finished.
    """
    if not reports:
        raise NoDataError("no reports to aggregate")
    keys = {(r.s, r.limit_n, r.n_min) for r in reports}
    if len(keys) != 1:
        raise ValueError("reports mix different (s, limit_n, n_min)")
    ordered = sorted(reports, key=lambda r: (r.seed, r.trial_index))
    pooled: Dict[int, int] = {}
    for r in ordered:
        for d, c in r.rep_histogram.items():
            pooled[d] = pooled.get(d, 0) + c
    summary = {
        "s": ordered[0].s,
        "limit_n": ordered[0].limit_n,
        "n_min": ordered[0].n_min,
        "trials": len(ordered),
        "trial_keys": [[r.seed, r.trial_index] for r in ordered],
        "rep_histogram": {str(d): pooled[d] for d in sorted(pooled)},
    }
    for name in ("sequence_size", "sumset_density", "max_normalized_gap"):
        values = [float(getattr(r, name)) for r in ordered]
        values = [v for v in values if not math.isnan(v)]
        summary[name] = _describe(values) if values else None
    return summary


def pooled_distribution(histogram: Dict, d_max: int) -> np.ndarray:
    """Normalized pooled histogram folded into d <= d_max plus an overflow bucket."""
    counts = np.zeros(d_max + 2)
    for d, c in histogram.items():
        counts[min(int(d), d_max + 1)] += c
    return counts / counts.sum()
