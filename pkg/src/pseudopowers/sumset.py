"""s-fold sumsets, representation counts and gap statistics.

Sumset bitmaps are built by iterated shifted OR on arbitrary-precision
integers used as bit vectors: B_1 = bitmap(A) and
B_{k+1} = OR_{a in A} (B_k << a), truncated to [1, N] after each level.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .export import csv_text


class NoDataError(ValueError):
    """Raised when a statistic is requested over an empty selection."""


def _as_elements(A, limit_n) -> np.ndarray:
    A = getattr(A, "elements", A)
    if isinstance(A, (set, frozenset)):
        A = sorted(A)
    elements = np.asarray(A, dtype=np.int64).ravel()
    elements = np.unique(elements)
    if elements.size and (elements[0] < 1 or elements[-1] > limit_n):
        raise ValueError("A must be a subset of [1, limit_n]")
    return elements


def int_to_bitmap(value: int, limit_n: int) -> np.ndarray:
    nbytes = (limit_n + 1 + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: limit_n + 1].astype(bool)


def bitmap_to_int(bitmap: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bitmap.astype(bool), bitorder="little").tobytes(), "little")


def sumset_bits(elements: Iterable[int], s: int, limit_n: int) -> int:
    """Bit n of the result is set iff n is a sum of s elements (with repetition), n <= limit_n."""
    elements = sorted(int(a) for a in elements)
    if not elements:
        return 0
    mask = (1 << (limit_n + 1)) - 1
    base = 0
    for a in elements:
        base |= 1 << a
    level = base & mask
    smallest = elements[0]
    for k in range(1, s):
        if level == 0:
            break
        floor = k * smallest  # least member of the current level
        acc = 0
        for a in elements:
            if a + floor > limit_n:
                break
            acc |= level << a
        level = acc & mask
    return level


@dataclass(frozen=True)
class SumsetProfile:
    """Membership bitmap of sA within [1, limit_n]; index 0 is never set."""

    s: int
    limit_n: int
    membership: np.ndarray = field(repr=False)
    source: Optional[object] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.membership.setflags(write=False)

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.membership)

    def __len__(self):
        return int(np.count_nonzero(self.membership))

    def __contains__(self, n):
        return 1 <= n <= self.limit_n and bool(self.membership[n])

    def runs(self) -> np.ndarray:
        """Maximal runs of members as an (k, 2) array of inclusive (start, end)."""
        padded = np.concatenate(([False], self.membership[1:], [False])).astype(np.int8)
        edges = np.diff(padded)
        starts = np.flatnonzero(edges == 1) + 1
        ends = np.flatnonzero(edges == -1)
        return np.column_stack((starts, ends))

    def runs_csv(self) -> str:
        return csv_text(["start", "end"], self.runs().tolist())


def sumset(A, s: int, limit_n: int) -> SumsetProfile:
    """Exact s-fold sumset of A (repetition allowed) truncated to [1, limit_n]."""
    if int(s) != s or s < 1:
        raise ValueError("s must be a positive integer")
    elements = _as_elements(A, limit_n)
    bits = sumset_bits(elements.tolist(), int(s), limit_n)
    return SumsetProfile(s=int(s), limit_n=int(limit_n), membership=int_to_bitmap(bits, limit_n),
                         source=A)


@dataclass(frozen=True)
class RepCountTable:
    """counts[n] = number of non-decreasing s-tuples from A summing to n (counts[0] unused)."""

    s: int
    limit_n: int
    counts: np.ndarray = field(repr=False)

    def __getitem__(self, n):
        return int(self.counts[n])


def representation_counts(A, s: int, limit_n: int) -> RepCountTable:
    """Count a_1 <= ... <= a_s in A with a_1 + ... + a_s = n for every n <= limit_n.

    Depth-first over the first s - 1 parts with pruning on the partial sum;
    the last part is handled as one vectorized slice.
    """
    if int(s) != s or s < 1:
        raise ValueError("s must be a positive integer")
    elements = _as_elements(A, limit_n)
    counts = np.zeros(limit_n + 1, dtype=np.int64)
    if elements.size == 0:
        return RepCountTable(s=int(s), limit_n=limit_n, counts=counts)

    values = elements.tolist()
    size = len(values)

    def descend(start, partial, remaining):
        if remaining == 1:
            hi = int(np.searchsorted(elements, limit_n - partial, side="right"))
            if hi > start:
                # targets partial + a are distinct, so plain fancy += is safe
                counts[partial + elements[start:hi]] += 1
            return
        for j in range(start, size):
            if partial + remaining * values[j] > limit_n:
                break
            descend(j, partial + values[j], remaining - 1)

    descend(0, 0, int(s))
    return RepCountTable(s=int(s), limit_n=limit_n, counts=counts)


@dataclass(frozen=True)
class GapRecord:
    left: int
    right: int
    gap: int
    normalized: float


@dataclass(frozen=True)
class GapTable:
    """Consecutive sumset members (left, right) with gap and gap / ln(left).

    Column-oriented so that millions of gaps stay cheap; iterating yields
    GapRecord rows.
    """

    left: np.ndarray
    right: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.right - self.left

    @property
    def normalized(self) -> np.ndarray:
        return self.gap / np.log(self.left)

    def __len__(self):
        return int(self.left.size)

    def __iter__(self) -> Iterator[GapRecord]:
        for lo, hi, g, x in zip(self.left.tolist(), self.right.tolist(),
                                self.gap.tolist(), self.normalized.tolist()):
            yield GapRecord(lo, hi, g, x)

    def __getitem__(self, k) -> GapRecord:
        return GapRecord(int(self.left[k]), int(self.right[k]), int(self.gap[k]),
                         float(self.normalized[k]))

    def to_csv(self) -> str:
        return csv_text(["left", "right", "gap", "normalized"],
                        zip(self.left.tolist(), self.right.tolist(), self.gap.tolist(),
                            self.normalized))


def gaps(profile: SumsetProfile, min_b: int = 2, max_b: Optional[int] = None) -> GapTable:
    """Gaps between consecutive members b_n < b_{n+1} with min_b <= b_n (<= max_b).

    The open gap after the last member below limit_n is dropped.
    """
    if min_b < 2:
        raise ValueError("min_b must be >= 2 so that ln(b_n) > 0")
    members = profile.members()
    members = members[members >= min_b]
    left, right = members[:-1], members[1:]
    if max_b is not None:
        keep = left <= max_b
        left, right = left[keep], right[keep]
    return GapTable(left=left.astype(np.int64), right=right.astype(np.int64))


def max_normalized_gap(records) -> float:
    if isinstance(records, GapTable):
        if len(records) == 0:
            raise NoDataError("no gaps to maximize over")
        return float(np.max(records.normalized))
    values = [r.normalized for r in records]
    if not values:
        raise NoDataError("no gaps to maximize over")
    return max(values)

