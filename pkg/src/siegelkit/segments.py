"""Leading entries, segment partitions and witnessing sequences of leading entries.

Indices in this module are 1-based, matching the usual matrix notation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import NotSameSegment, SingularMatrix


class LeadingEntry(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class SegmentPartition:
    """Interval partition of {1..n}, stored as sorted segment start indices."""

    n: int
    starts: tuple[int, ...]

    def __post_init__(self):
        if not self.starts or self.starts[0] != 1 or list(self.starts) != sorted(set(self.starts)):
            raise ValueError(f"bad segment starts {self.starts}")
        if self.starts[-1] > self.n:
            raise ValueError(f"segment start {self.starts[-1]} exceeds n={self.n}")

    @classmethod
    def from_blocks(cls, blocks) -> SegmentPartition:
        blocks = [list(b) for b in blocks]
        n = sum(len(b) for b in blocks)
        return cls(n, tuple(b[0] for b in blocks))

    @property
    def blocks(self) -> list[list[int]]:
        ends = list(self.starts[1:]) + [self.n + 1]
        return [list(range(s, e)) for s, e in zip(self.starts, ends)]

    def segment_of(self, k: int) -> int:
        """0-based index of the segment containing ``k``."""
        if not 1 <= k <= self.n:
            raise IndexError(k)
        return sum(1 for s in self.starts if s <= k) - 1

    def same_segment(self, i: int, j: int) -> bool:
        return self.segment_of(i) == self.segment_of(j)

    def __str__(self):
        return ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)


def _rows(m):
    if hasattr(m, "rows"):
        return m.rows
    return np.asarray(m, dtype=object).tolist()


def leading_entries(gamma) -> list[LeadingEntry]:
    """The leftmost non-zero entry of every row (exact zero test)."""
    out = []
    for i, row in enumerate(_rows(gamma), start=1):
        j = next((j for j, x in enumerate(row, start=1) if x != 0), None)
        if j is None:
            raise SingularMatrix(f"row {i} is zero")
        out.append(LeadingEntry(i, j))
    return out


def segment_partition(gamma) -> SegmentPartition:
    """Finest interval partition for which ``gamma`` is block upper triangular.

    A cut is placed after column k exactly when rows k+1..n vanish in columns 1..k.
    """
    rows = _rows(gamma)
    leading_entries(gamma)
    n = len(rows)
    starts = [1]
    for k in range(1, n):
        if all(rows[r][c] == 0 for r in range(k, n) for c in range(k)):
            starts.append(k + 1)
    return SegmentPartition(n, tuple(starts))


def satisfies_condition(seq, i: int, j: int) -> bool:
    """``i <= i_1``, ``j_p <= i_{p+1}`` and ``j_s <= j``."""
    if not seq:
        return False
    if seq[0].row < i or seq[-1].col > j:
        return False
    return all(a.col <= b.row for a, b in zip(seq, seq[1:]))


def _prune(seq: list[LeadingEntry], i: int, j: int) -> list[LeadingEntry]:
    # every step deletes a contiguous block and keeps the chain condition intact
    cut = next(p for p, e in enumerate(seq) if e.col <= j)
    seq = seq[:cut + 1]
    p = 0
    while p < len(seq):
        later = [q for q in range(p + 1, len(seq)) if seq[q].row == seq[p].row]
        if later:
            seq = seq[:p] + seq[later[-1]:]
        p += 1
    start = max(q for q, e in enumerate(seq) if e.row >= i)
    seq = seq[start:]
    out = [seq[0]]
    p = 0
    while seq[p].col > j:
        p = max(q for q in range(p + 1, len(seq)) if seq[p].col <= seq[q].row)
        out.append(seq[p])
    return out


def witnessing_sequence(gamma, i: int, j: int) -> list[LeadingEntry]:
    """A chain of leading entries linking ``i > j`` inside one segment.

    For each k = i, i-1, ..., j+1 a leading entry (i', j') with j' < k <= i' is
    found; the raw chain is then shortened by deleting repeated rows and
    redundant links. All rows in the result are distinct and differ from j.
    """
    part = segment_partition(gamma)
    n = part.n
    if not (1 <= j < i <= n) or not part.same_segment(i, j):
        raise NotSameSegment(f"({i}, {j}) must satisfy i > j within one segment of {part}")
    lead = leading_entries(gamma)
    raw = []
    for k in range(i, j, -1):
        entry = next((e for e in lead[k - 1:] if e.col < k), None)
        if entry is None:
            raise NotSameSegment(f"no leading entry crosses column boundary {k}")
        raw.append(entry)
    return _prune(raw, i, j)


def find_condition_sequence(gamma, i: int, j: int) -> list[LeadingEntry] | None:
    """Shortest chain satisfying the condition, by breadth-first search (or None)."""
    lead = leading_entries(gamma)
    frontier = [[e] for e in lead if e.row >= i]
    seen = {e for e in lead if e.row >= i}
    while frontier:
        nxt = []
        for path in frontier:
            if path[-1].col <= j:
                return path
            for e in lead:
                if e not in seen and e.row >= path[-1].col:
                    seen.add(e)
                    nxt.append(path + [e])
        frontier = nxt
    return None


def in_block_upper(m, part: SegmentPartition, tol=0) -> bool:
    rows = _rows(m)
    seg = [part.segment_of(k) for k in range(1, part.n + 1)]
    return all(abs(rows[r][c]) <= tol
               for r in range(part.n) for c in range(part.n) if seg[r] > seg[c])


def in_block_diagonal(m, part: SegmentPartition, tol=0) -> bool:
    rows = _rows(m)
    seg = [part.segment_of(k) for k in range(1, part.n + 1)]
    return all(abs(rows[r][c]) <= tol
               for r in range(part.n) for c in range(part.n) if seg[r] != seg[c])


def interval_partitions(n: int):
    """All 2^(n-1) interval partitions of {1..n}."""
    for k in range(n):
        for cuts in combinations(range(2, n + 1), k):
            yield SegmentPartition(n, (1,) + cuts)
