"""Exact finite-universe probability machinery for the events E_w = {w subset of A}.

A support w is a finite set of distinct positive integers; sigma(w) is the
set of sums a_1 x_1 + ... + a_r x_r over w = {x_1, ..., x_r} with positive
multiplicities a_i adding up to s. The family of supports whose sigma meets
a set of targets gives F = {sA misses the targets} as the intersection of
the complements E_w^c, which is what the Janson bounds sandwich.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .modelmath import lambda_s, membership_probability
from .sampler import ProbabilityFn, _philox, _to_unit
from .sumset import sumset_bits

EXACT_UNIVERSE_CAP = 26


class GuardError(ValueError):
    """An exhaustive computation was asked for beyond its complexity guard."""


class JansonPreconditionError(ValueError):
    """Some event in the family has probability above 1/2."""


def probability_table(universe_cap: int, s: int, prob: Optional[ProbabilityFn] = None) -> np.ndarray:
    """p[x] = P(x in A) for x in [1, universe_cap]; p[0] = 0."""
    p = np.zeros(universe_cap + 1)
    if universe_cap >= 1:
        n = np.arange(1, universe_cap + 1)
        p[1:] = prob(n) if prob is not None else membership_probability(n, s)
    return p


# --------------------------------------------------------------------------
# supports, patterns and families


@dataclass(frozen=True)
class RepPattern:
    xs: Tuple[int, ...]
    coeffs: Tuple[int, ...]
    target: int

    def __post_init__(self):
        if len(self.xs) != len(self.coeffs) or not self.xs:
            raise ValueError("xs and coeffs must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])) or self.xs[0] < 1:
            raise ValueError("xs must be strictly increasing positive integers")
        if any(a < 1 for a in self.coeffs):
            raise ValueError("coefficients must be positive")
        if sum(a * x for a, x in zip(self.coeffs, self.xs)) != self.target:
            raise ValueError("target does not match sum of coeffs * xs")

    @property
    def s(self):
        return sum(self.coeffs)


@dataclass(frozen=True, order=True)
class OmegaSet:
    support: Tuple[int, ...]
    prob: float = field(compare=False)

    def related(self, other: "OmegaSet") -> bool:
        """True iff the supports meet but differ, i.e. E_w and E_w' are distinct and dependent."""
        return self.support != other.support and not set(self.support).isdisjoint(other.support)


def _nondecreasing_tuples(z: int, s: int, cap: int):
    """Yield non-decreasing s-tuples of integers in [1, cap] summing to z."""
    def rec(prefix, lo, remaining, parts):
        if parts == 1:
            if lo <= remaining <= cap:
                yield prefix + (remaining,)
            return
        hi = min(cap, remaining // parts)
        for x in range(lo, hi + 1):
            yield from rec(prefix + (x,), x, remaining - x, parts - 1)

    if z >= s >= 1:
        yield from rec((), 1, z, s)


def rep_patterns(z: int, s: int, universe_cap: int) -> List[RepPattern]:
    """Every (support, multiplicities) representation of z with parts <= universe_cap."""
    out = []
    for tup in _nondecreasing_tuples(z, s, universe_cap):
        xs, coeffs = zip(*[(x, len(list(g))) for x, g in itertools.groupby(tup)])
        out.append(RepPattern(xs=tuple(xs), coeffs=tuple(coeffs), target=z))
    return out


def _supports_for(z, s, universe_cap):
    return {tuple(sorted(set(t))) for t in _nondecreasing_tuples(z, s, universe_cap)}


def enumerate_omega(z: int, s: int, universe_cap: int,
                    prob: Optional[ProbabilityFn] = None) -> List[OmegaSet]:
    """Distinct supports w within [1, universe_cap] with z in sigma(w), sorted."""
    supports = sorted(_supports_for(z, s, universe_cap))
    if not supports:
        return []
    p = probability_table(universe_cap, s, prob)
    return [OmegaSet(w, math.prod(float(p[x]) for x in w)) for w in supports]


def omega_probability_sum(z: int, s: int, prob: Optional[ProbabilityFn] = None) -> float:
    """Sum of P(E_w) over the supports w with z in sigma(w)."""
    return math.fsum(w.prob for w in enumerate_omega(z, s, z, prob))


def _dependence_pairs(family: Sequence[OmegaSet], allowed=None):
    """Unordered index pairs (u, v), u < v, of related supports in ``family``."""
    by_element = {}
    for k, w in enumerate(family):
        for x in w.support:
            by_element.setdefault(x, []).append(k)
    pairs = set()
    for idx in by_element.values():
        for u, v in itertools.combinations(idx, 2):
            if family[u].support != family[v].support and (allowed is None or allowed(u, v)):
                pairs.add((u, v))
    return sorted(pairs)


def _joint_prob(a: OmegaSet, b: OmegaSet, p) -> float:
    return math.prod(float(p[x]) for x in sorted(set(a.support) | set(b.support)))


def pairwise_dependence_sum(z: int, z_prime: int, s: int,
                            universe_cap: Optional[int] = None,
                            prob: Optional[ProbabilityFn] = None) -> float:
    """Sum of P(E_w and E_w') over unordered related pairs with w in Omega_z, w' in Omega_z'."""
    if not s <= z <= z_prime:
        raise ValueError("need s <= z <= z_prime")
    cap = z_prime if universe_cap is None else universe_cap
    in_z = _supports_for(z, s, cap)
    in_zp = _supports_for(z_prime, s, cap)
    supports = sorted(in_z | in_zp)
    p = probability_table(cap, s, prob)
    family = [OmegaSet(w, 0.0) for w in supports]
    flags = [(w in in_z, w in in_zp) for w in supports]

    def allowed(u, v):
        return (flags[u][0] and flags[v][1]) or (flags[v][0] and flags[u][1])

    return math.fsum(_joint_prob(family[u], family[v], p)
                     for u, v in _dependence_pairs(family, allowed))


@dataclass(frozen=True)
class IntervalSpec:
    """Integer targets z with i <= z <= i + alpha ln i (upper end floored)."""

    i: int
    alpha: Optional[float]
    members: Tuple[int, ...]

    @classmethod
    def from_alpha(cls, i: int, alpha: float) -> "IntervalSpec":
        if i < 2 or not alpha > 0:
            raise ValueError("need i >= 2 and alpha > 0")
        top = math.floor(i + alpha * math.log(i))
        return cls(i=i, alpha=float(alpha), members=tuple(range(i, top + 1)))

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "IntervalSpec":
        members = tuple(sorted(set(int(z) for z in members)))
        return cls(i=members[0] if members else 0, alpha=None, members=members)


def _as_interval(interval) -> IntervalSpec:
    if isinstance(interval, IntervalSpec):
        return interval
    return IntervalSpec.from_members(interval)


@dataclass(frozen=True)
class EventSystem:
    s: int
    universe_cap: int
    family: Tuple[OmegaSet, ...]
    interval: IntervalSpec

    def __len__(self):
        return len(self.family)

    def probabilities(self) -> np.ndarray:
        return np.array([w.prob for w in self.family])


def build_system(interval, s: int, universe_cap: int,
                 prob: Optional[ProbabilityFn] = None) -> EventSystem:
    """Deduplicated union of Omega_z (supports within [1, universe_cap]) over the targets."""
    interval = _as_interval(interval)
    supports = set()
    for z in interval.members:
        supports |= _supports_for(z, s, universe_cap)
    p = probability_table(universe_cap, s, prob)
    family = tuple(OmegaSet(w, math.prod(float(p[x]) for x in w)) for w in sorted(supports))
    return EventSystem(s=s, universe_cap=universe_cap, family=family, interval=interval)


def build_interval_system(i: int, alpha: float, s: int, universe_cap: int,
                          prob: Optional[ProbabilityFn] = None) -> EventSystem:
    return build_system(IntervalSpec.from_alpha(i, alpha), s, universe_cap, prob)


def independent_product(system: EventSystem) -> float:
    """Product of P(E_w^c) over the family (1 for an empty family)."""
    return math.prod(1.0 - w.prob for w in system.family)


def dependence_sum(system: EventSystem, prob: Optional[ProbabilityFn] = None) -> float:
    """Sum of P(E_w and E_w') over unordered related pairs of the family."""
    p = probability_table(system.universe_cap, system.s, prob)
    fam = system.family
    return math.fsum(_joint_prob(fam[u], fam[v], p) for u, v in _dependence_pairs(fam))


def janson_bounds(system: EventSystem, prob: Optional[ProbabilityFn] = None) -> Tuple[float, float]:
    """(prod P(E_w^c), prod P(E_w^c) * exp(2 * dependence sum))."""
    probs = system.probabilities()
    if probs.size and probs.max() > 0.5:
        raise JansonPreconditionError("Janson bounds need P(E_w) <= 1/2 for every w")
    lower = independent_product(system)
    return lower, lower * math.exp(2.0 * dependence_sum(system, prob))


def random_interval_systems(seed: int, count: int, s_values=(2, 3), max_universe: int = 16):
    """Deterministic list of small (s, i, alpha, M) parameters with i reachable from [1, M]."""
    key = np.array([seed, 0x4A414E53], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    out = []
    for _ in range(count):
        s = int(rng.choice(list(s_values)))
        M = int(rng.integers(2, max_universe + 1))
        i = int(rng.integers(max(2, s), s * M + 1))
        alpha = float(rng.uniform(0.5, 3.0))
        out.append((s, i, alpha, M))
    return out


# --------------------------------------------------------------------------
# exhaustive enumeration


def _shift_words(words: np.ndarray, k: int) -> np.ndarray:
    """Shift little-endian multiword bitsets (rows of uint64 words) left by k bits."""
    nwords = words.shape[1]
    q, r = divmod(k, 64)
    out = np.zeros_like(words)
    if q >= nwords:
        return out
    src = words[:, : nwords - q]
    out[:, q:] = src << np.uint64(r)
    if r:
        out[:, q + 1:] |= src[:, : nwords - q - 1] >> np.uint64(64 - r)
    return out


def _sumset_hits(include: np.ndarray, s: int, targets: Sequence[int]) -> np.ndarray:
    """For each row of the (rows, M) inclusion matrix over [1, M], does sA meet ``targets``?"""
    rows, universe = include.shape
    zmax = max(targets)
    nwords = zmax // 64 + 1
    top_mask = np.uint64((1 << (zmax % 64 + 1)) - 1)
    relevant = min(universe, zmax)

    base = np.zeros((rows, nwords), dtype=np.uint64)
    for a in range(1, relevant + 1):
        q, r = divmod(a, 64)
        base[include[:, a - 1], q] |= np.uint64(1) << np.uint64(r)
    level = base
    for _ in range(1, s):
        acc = np.zeros_like(level)
        for a in range(1, relevant + 1):
            sel = include[:, a - 1]
            if sel.any():
                acc[sel] |= _shift_words(level[sel], a)
        acc[:, -1] &= top_mask
        level = acc
    hit = np.zeros(rows, dtype=bool)
    for z in targets:
        q, r = divmod(z, 64)
        hit |= ((level[:, q] >> np.uint64(r)) & np.uint64(1)).astype(bool)
    return hit


def exact_gap_probability(s: int, universe_cap: int, interval,
                          prob: Optional[ProbabilityFn] = None, chunk_bits: int = 18) -> float:
    """P(sA misses the interval) by summing over all 2^M subsets A of [1, M].

    Each subset is weighted by prod_{n in A} p_n prod_{n not in A} (1 - p_n)
    and its s-fold sumset is computed directly.
    """
    interval = _as_interval(interval)
    M = int(universe_cap)
    if M > EXACT_UNIVERSE_CAP:
        raise GuardError(f"exhaustive enumeration refused for M={M} > {EXACT_UNIVERSE_CAP}")
    targets = [z for z in interval.members if s <= z <= s * M]
    if not targets or M < 1:
        return 1.0
    p = probability_table(M, s, prob)[1:]
    total = 1 << M
    step = 1 << min(M, chunk_bits)
    bit_index = np.arange(M, dtype=np.uint64)
    partial = []
    for start in range(0, total, step):
        masks = np.arange(start, min(total, start + step), dtype=np.uint64)
        include = ((masks[:, None] >> bit_index[None, :]) & np.uint64(1)).astype(bool)
        weight = np.prod(np.where(include, p, 1.0 - p), axis=1)
        miss = ~_sumset_hits(include, s, targets)
        partial.append(math.fsum(weight[miss]))
    return math.fsum(partial)


def exact_family_probability(family: Sequence[OmegaSet], prob_of: dict) -> float:
    """P(no support of ``family`` is contained in A), enumerating subsets of their union.

    ``prob_of`` maps each element x to P(x in A). Limited to unions of at most
    EXACT_UNIVERSE_CAP elements.
    """
    elements = sorted({x for w in family for x in w.support})
    if not elements:
        return 1.0
    if len(elements) > EXACT_UNIVERSE_CAP:
        raise GuardError("union of supports too large for exhaustive enumeration")
    pos = {x: k for k, x in enumerate(elements)}
    p = np.array([prob_of[x] for x in elements])
    need = np.array([sum(1 << pos[x] for x in w.support) for w in family], dtype=np.uint64)
    m = len(elements)
    masks = np.arange(1 << m, dtype=np.uint64)
    include = ((masks[:, None] >> np.arange(m, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(bool)
    weight = np.prod(np.where(include, p, 1.0 - p), axis=1)
    covered = np.zeros(masks.size, dtype=bool)
    for req in need:
        covered |= (masks & req) == req
    return math.fsum(weight[~covered])


# --------------------------------------------------------------------------
# Monte Carlo


def montecarlo_gap_probability(s: int, i: Optional[int] = None, alpha: Optional[float] = None,
                               trials: int = 1000, seed: int = 0,
                               prob: Optional[ProbabilityFn] = None,
                               interval=None, universe_cap: Optional[int] = None,
                               stream: Optional[int] = None) -> Tuple[float, float]:
    """Fraction of sampled A whose s-fold sumset misses the interval, with its standard error.

    Default universe is [1, i + ceil(alpha ln i)]. Trial t uses uniforms
    [t*M, (t+1)*M) of the stream keyed by (seed, stream), where ``stream``
    defaults to the interval's left endpoint.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if interval is None:
        spec = IntervalSpec.from_alpha(i, alpha)
        M = universe_cap or i + math.ceil(alpha * math.log(i))
    else:
        spec = _as_interval(interval)
        M = universe_cap or (max(spec.members) if spec.members else 1)
    targets = [z for z in spec.members if s <= z <= s * M]
    if not targets:
        return 1.0, 0.0
    zmax = max(targets)
    target_mask = sum(1 << z for z in targets)
    p = probability_table(M, s, prob)[1:]
    bitgen = _philox(seed, spec.i if stream is None else stream)
    values = np.arange(1, M + 1)
    misses = 0
    batch = max(1, (1 << 22) // M)
    done = 0
    while done < trials:
        rows = min(batch, trials - done)
        u = _to_unit(bitgen.random_raw(rows * M)).reshape(rows, M)
        include = u < p
        for row in include:
            bits = sumset_bits(values[row].tolist(), s, zmax)
            if not bits & target_mask:
                misses += 1
        done += rows
    est = misses / trials
    return est, math.sqrt(est * (1.0 - est) / trials)


# --------------------------------------------------------------------------
# lemma sums


@dataclass(frozen=True)
class LemmaSumResult:
    value: float
    z: int
    envelope: float

    @property
    def bound_ratio(self) -> float:
        return self.value / self.envelope


def _check_coeffs(coeffs, t):
    coeffs = tuple(int(a) for a in coeffs)
    if len(coeffs) != t or t < 1 or any(a < 1 for a in coeffs):
        raise ValueError("need t >= 1 positive coefficients")
    return coeffs


def weighted_solution_profile(coeffs: Sequence[int], s: int, top: int) -> np.ndarray:
    """g[m] = sum over positive (x_1..x_t) with sum a_i x_i = m of prod x_i^(-1+1/s), m <= top.

    Built one variable at a time: g_k[m] = sum_x x^e g_{k-1}[m - a_k x].
    """
    e = -1.0 + 1.0 / s
    g = np.zeros(top + 1)
    g[0] = 1.0
    for a in coeffs:
        nxt = np.zeros(top + 1)
        for x in range(1, top // a + 1):
            shift = a * x
            nxt[shift:] += (x ** e) * g[: top + 1 - shift]
        g = nxt
    return g


def lemma_sum_i(t: int, s: int, coeffs: Sequence[int], z: int) -> LemmaSumResult:
    """Sum of prod x_i^(-1+1/s) over positive solutions of a_1 x_1 + ... + a_t x_t = z."""
    coeffs = _check_coeffs(coeffs, t)
    value = float(weighted_solution_profile(coeffs, s, z)[z])
    return LemmaSumResult(value=value, z=z, envelope=z ** (-1.0 + t / s))


def lemma_sum_ii(t: int, s: int, coeffs: Sequence[int], z: int) -> LemmaSumResult:
    """Sum of prod x_i^(-1+1/s) (z - sum a_i x_i)^(-2t/s) over sum a_i x_i < z."""
    coeffs = _check_coeffs(coeffs, t)
    envelope = z ** (-1.0 / s) * math.log(z) if z > 1 else 1.0
    lo = sum(coeffs)
    if z <= lo:
        return LemmaSumResult(value=0.0, z=z, envelope=envelope)
    g = weighted_solution_profile(coeffs, s, z - 1)
    m = np.arange(lo, z)
    terms = g[lo:z] * (z - m).astype(float) ** (-2.0 * t / s)
    return LemmaSumResult(value=math.fsum(np.sort(terms)), z=z, envelope=envelope)


def _increasing_tuple_terms(s: int, z: int):
    """Yield arrays of prod x_i^(-1+1/s) over 1 <= x_1 < ... < x_s with sum z."""
    e = -1.0 + 1.0 / s

    def rec(weight, lo, remaining, parts):
        if parts == 1:
            if remaining >= lo:
                yield np.array([weight * remaining ** e])
            return
        if parts == 2:
            x = np.arange(lo, (remaining - 1) // 2 + 1, dtype=np.float64)
            if x.size:
                yield weight * (x * (remaining - x)) ** e
            return
        # smallest admissible completion uses x, x+1, ..., x+parts-1
        x = lo
        while parts * x + parts * (parts - 1) // 2 <= remaining:
            yield from rec(weight * x ** e, x + 1, remaining - x, parts - 1)
            x += 1

    yield from rec(1.0, 1, z, s)


def lemma_sum_iii(s: int, z: int) -> LemmaSumResult:
    """Sum of prod x_i^(-1+1/s) over strictly increasing s-tuples of positive integers summing to z."""
    envelope = s ** s * lambda_s(s)
    if z < s * (s + 1) // 2:
        return LemmaSumResult(value=0.0, z=z, envelope=envelope)
    chunks = list(_increasing_tuple_terms(s, z))
    terms = np.sort(np.concatenate(chunks)) if chunks else np.zeros(0)
    return LemmaSumResult(value=math.fsum(terms), z=z, envelope=envelope)
