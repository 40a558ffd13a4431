"""Seed-reproducible sampling of pseudo s-th power sequences.

Each integer n in [1, N] gets exactly one uniform draw, consumed in
increasing n order, and n is kept iff the draw is below P(n in A).

The stream is Philox4x64-10 keyed by the 128-bit pair (seed, trial_index),
counter starting at zero. Raw 64-bit outputs are mapped to doubles as
``(raw >> 11) * 2**-53``. Both steps are fixed bit-level algorithms, so a
given (seed, trial_index) yields the same sequence on every platform and
regardless of how trials are scheduled across workers.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .modelmath import membership_probability

ProbabilityFn = Callable[[np.ndarray], np.ndarray]

_UINT64_MAX = 2**64 - 1
_CHUNK = 1 << 22


def _check_key(seed, trial_index):
    if not 0 <= int(seed) <= _UINT64_MAX:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    if not 0 <= int(trial_index) <= _UINT64_MAX:
        raise ValueError("trial_index must be a non-negative 64-bit integer")


def uniform_stream(seed: int, trial_index: int, size: int) -> np.ndarray:
    """First ``size`` uniforms in [0, 1) of the stream keyed by (seed, trial_index)."""
    _check_key(seed, trial_index)
    return _to_unit(_philox(seed, trial_index).random_raw(size))


def _philox(seed, trial_index):
    return np.random.Philox(key=np.array([seed, trial_index], dtype=np.uint64))


def _to_unit(raw):
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def draw_members(limit_n, seed, trial_index, prob: ProbabilityFn) -> np.ndarray:
    """Sorted integers n in [1, limit_n] whose uniform draw falls below ``prob(n)``."""
    _check_key(seed, trial_index)
    bitgen = _philox(seed, trial_index)
    parts = []
    start = 1
    while start <= limit_n:
        stop = min(limit_n, start + _CHUNK - 1)
        n = np.arange(start, stop + 1, dtype=np.int64)
        u = _to_unit(bitgen.random_raw(n.size))
        parts.append(n[u < np.asarray(prob(n), dtype=np.float64)])
        start = stop + 1
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts)


@dataclass(frozen=True)
class PseudoSequence:
    """One realization of A intersected with [1, limit_n]."""

    s: int
    limit_n: int
    elements: np.ndarray = field(repr=False)
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        elements = np.asarray(self.elements, dtype=np.int64)
        if elements.size:
            if elements[0] < 1 or elements[-1] > self.limit_n:
                raise ValueError("elements must lie in [1, limit_n]")
            if np.any(np.diff(elements) <= 0):
                raise ValueError("elements must be strictly increasing")
        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)

    def __len__(self):
        return int(self.elements.size)

    def __iter__(self):
        return iter(self.elements.tolist())

    def __eq__(self, other):
        if not isinstance(other, PseudoSequence):
            return NotImplemented
        return (
            (self.s, self.limit_n, self.seed, self.trial_index)
            == (other.s, other.limit_n, other.seed, other.trial_index)
            and np.array_equal(self.elements, other.elements)
        )

    def __hash__(self):
        return hash((self.s, self.limit_n, self.seed, self.trial_index, self.elements.tobytes()))

    def header(self) -> str:
        return f"# s={self.s} N={self.limit_n} seed={self.seed} trial={self.trial_index}"

    def to_text(self) -> str:
        lines = [self.header()]
        lines.extend(str(x) for x in self.elements.tolist())
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "PseudoSequence":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing '# s=.. N=.. seed=.. trial=..' header")
        meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        try:
            s, limit_n = int(meta["s"]), int(meta["N"])
            seed, trial = int(meta["seed"]), int(meta["trial"])
        except KeyError as exc:
            raise ValueError(f"header field {exc} missing") from None
        elements = np.array([int(x) for x in lines[1:] if x.strip()], dtype=np.int64)
        return cls(s=s, limit_n=limit_n, elements=elements, seed=seed, trial_index=trial)

    @classmethod
    def read(cls, path) -> "PseudoSequence":
        with open(path, encoding="ascii") as fh:
            return cls.from_text(fh.read())


def model_probability(s: int) -> ProbabilityFn:
    """The model's inclusion probability n -> n^(-1+1/s)/s as an array function."""
    return lambda n: membership_probability(n, s)


def sample_sequence(
    s: int,
    limit_n: int,
    seed: int,
    trial_index: int = 0,
    prob: Optional[ProbabilityFn] = None,
) -> PseudoSequence:
    """Sample A intersected with [1, limit_n].

    ``prob`` replaces the model probability n -> n^(-1+1/s)/s; it is meant for
    tests that need degenerate or hand-checkable inclusion rules.
    """
    if int(s) != s or s < 2:
        raise ValueError(f"s must be an integer >= 2, got {s!r}")
    if limit_n < 1:
        raise ValueError("limit_n must be >= 1")
    elements = draw_members(int(limit_n), seed, trial_index, prob or model_probability(s))
    return PseudoSequence(s=int(s), limit_n=int(limit_n), elements=elements,
                          seed=int(seed), trial_index=int(trial_index))


def expected_count(s: int, limit_n: int) -> float:
    """E|A intersected with [1, limit_n]|, summed exactly term by term."""
    if limit_n < 1:
        raise ValueError("limit_n must be >= 1")
    blocks = []
    for start in range(1, limit_n + 1, _CHUNK):
        n = np.arange(start, min(limit_n, start + _CHUNK - 1) + 1)
        blocks.append(float(np.sum(membership_probability(n, s))))
    return math.fsum(blocks)


def count_variance(s: int, limit_n: int) -> float:
    """Var|A intersected with [1, limit_n]| = sum of p(1 - p)."""
    total = 0.0
    for start in range(1, limit_n + 1, _CHUNK):
        p = membership_probability(np.arange(start, min(limit_n, start + _CHUNK - 1) + 1), s)
        total += float(np.sum(p * (1.0 - p)))
    return total
