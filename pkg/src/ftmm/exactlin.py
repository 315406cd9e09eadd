"""Exact integer/rational linear algebra (no floating point anywhere).

Fraction-free Gaussian elimination over the integers, with per-row gcd
reduction to keep entries small.  Rational coefficients appear only when a
caller asks for an explicit combination expressing a target vector.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence


def _gcd_reduce(row: List[int]) -> List[int]:
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return row
    if g > 1:
        return [x // g for x in row]
    return row


class SpanSolver:
    """Echelon basis of the row span of integer vectors, with provenance.

    Each echelon row carries a tracking vector expressing it as an integer
    combination of the original input rows, so targets can be decoded back
    to exact rational coefficients over the inputs.
    """

    def __init__(self, vectors: Sequence[Sequence[int]]):
        self.n = len(vectors)
        self.width = len(vectors[0]) if self.n else 0
        # each entry: (pivot_col, row, track) with row = sum(track[i]*vectors[i])
        self._ech: List[tuple] = []
        for i, v in enumerate(vectors):
            row = list(v)
            track = [0] * self.n
            track[i] = 1
            self._insert(row, track)

    def _insert(self, row: List[int], track: List[int]) -> None:
        for col, prow, ptrack in self._ech:
            if row[col] != 0:
                p, c = prow[col], row[col]
                row = [p * x - c * y for x, y in zip(row, prow)]
                track = [p * x - c * y for x, y in zip(track, ptrack)]
        pivot = next((j for j, x in enumerate(row) if x != 0), None)
        if pivot is None:
            return
        merged = _gcd_reduce(row + track)
        row, track = merged[: self.width], merged[self.width:]
        self._ech.append((pivot, row, track))
        self._ech.sort(key=lambda e: e[0])

    @property
    def rank(self) -> int:
        return len(self._ech)

    def contains(self, target: Sequence[int]) -> bool:
        """True iff target is in the rational span of the input vectors."""
        v = list(target)
        for col, prow, _ in self._ech:
            if v[col] != 0:
                p, c = prow[col], v[col]
                v = [p * x - c * y for x, y in zip(v, prow)]
        return not any(v)

    def express(self, target: Sequence[int]) -> Optional[List[Fraction]]:
        """Rational coefficients c with sum(c[i]*vectors[i]) == target, or None."""
        v = [Fraction(x) for x in target]
        coef = [Fraction(0)] * self.n
        for col, prow, ptrack in self._ech:
            if v[col] != 0:
                q = v[col] / prow[col]
                v = [x - q * y for x, y in zip(v, prow)]
                for i, t in enumerate(ptrack):
                    if t:
                        coef[i] += q * t
        if any(v):
            return None
        return coef


def rank(vectors: Sequence[Sequence[int]]) -> int:
    return SpanSolver(vectors).rank


def in_span(vectors: Sequence[Sequence[int]], target: Sequence[int]) -> bool:
    return SpanSolver(vectors).contains(target)
