"""Truncated transfer matrix acting on density coefficients.

A density on (0, 2] is written

    f(t) = ell * log t + sum_{k>=0} a_k (t - 1)^k

and stored as the vector (ell, a_0, a_1, ...).  Index 0 is the logarithmic
coefficient and index k+1 is a_k.  One renormalised stage of the jamming
process acts on this vector linearly (up to normalisation); the matrix
below is that action truncated to m+1 unknowns.

Closed forms (r, K >= 1 unless noted):

    A[0,0] = 1/2              A[0,1] = -1           A[0,k] = 0  (k >= 2)
    A[1,0] = pi^2/12 + Li2(-1/2) - (log 2)/2
    A[1,1] = 1/2 + log 2
    A[1,K+1] = 1/K + (-1)^K / 2^(K+1) - 1/(K 2^K)
    A[r+1,0] = ((-1)^r / r) * sum_{j>=r} 1/(j 3^j)
    A[r+1,1] = 0
    A[r+1,K+1] = C(K,r) ((-1)^(K-r) / 2^(K+1) - 1/(K 2^K))   for K >= r
    A[r+1,K+1] = 0                                          for K < r

All entries except A[1,0], A[1,1] and column 0 are rational and are
enclosed exactly from Fractions.  A diagonal similarity with weights
rho^i gives the matrix in the weighted norm sum |c_i| rho^i.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .interval import ZERO, Interval, const_bounds, const_enclosure, isum


class InvalidRho(ValueError):
    pass


# extra terms beyond j = r in the column-0 series; the remaining tail is
# below 3^-40 relative to the leading term
_COL0_EXTRA_TERMS = 40


@lru_cache(maxsize=None)
def _rational_entry(i: int, j: int) -> Optional[Fraction]:
    """Exact value of A[i, j] when it is rational, None otherwise."""
    if i == 0:
        return Fraction(1, 2) if j == 0 else Fraction(-1) if j == 1 else Fraction(0)
    if j == 0 or (i == 1 and j == 1):
        return None
    if j == 1:
        return Fraction(0)
    r, K = i - 1, j - 1
    if r == 0:
        return Fraction(1, K) + Fraction((-1) ** K, 2 ** (K + 1)) - Fraction(1, K * 2**K)
    if K < r:
        return Fraction(0)
    return math.comb(K, r) * (Fraction((-1) ** (K - r), 2 ** (K + 1)) - Fraction(1, K * 2**K))


def _column0_bounds(r: int) -> tuple[Fraction, Fraction]:
    """Rational bounds for A[r+1, 0], r >= 1."""
    J = r + _COL0_EXTRA_TERMS
    s = sum(Fraction(1, j * 3**j) for j in range(r, J + 1))
    tail = Fraction(3, 2 * J * 3**J)
    lo, hi = s, s + tail
    c = Fraction((-1) ** r, r)
    return (c * lo, c * hi) if c > 0 else (c * hi, c * lo)


@lru_cache(maxsize=None)
def entry(i: int, j: int) -> Interval:
    """Enclosure of the unscaled entry A[i, j]."""
    if i < 0 or j < 0:
        raise IndexError((i, j))
    q = _rational_entry(i, j)
    if q is not None:
        return Interval.from_fraction(q)
    if i == 1 and j == 0:
        return (
            const_enclosure("pi_sq_over_12")
            + const_enclosure("dilog_neg_half")
            - const_enclosure("log2") * Interval(0.5, 0.5)
        )
    if i == 1 and j == 1:
        return Interval(0.5, 0.5) + const_enclosure("log2")
    lo, hi = _column0_bounds(i - 1)
    return Interval.from_bounds(lo, hi)


@dataclass(frozen=True)
class TruncatedMatrix:
    m: int
    rho: Fraction
    entries: tuple  # tuple of row tuples of Interval, shape (m+1, m+1)
    _mid: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.m + 1

    def __getitem__(self, ij) -> Interval:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def column(self, j: int) -> list:
        return [row[j] for row in self.entries]

    def mid(self) -> np.ndarray:
        if self._mid is None:
            a = np.array([[x.mid for x in row] for row in self.entries], dtype=float)
            object.__setattr__(self, "_mid", a)
        return self._mid.copy()

    def lower(self) -> np.ndarray:
        return np.array([[x.lo for x in row] for row in self.entries], dtype=float)

    def upper(self) -> np.ndarray:
        return np.array([[x.hi for x in row] for row in self.entries], dtype=float)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "rho": str(self.rho),
            "entries": [[x.to_json() for x in row] for row in self.entries],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.entries:
                w.writerow([repr(x.mid) for x in row])


def _as_rho(rho: Union[int, float, Fraction, str]) -> Fraction:
    q = Fraction(rho)
    if not (1 <= q <= 3):
        raise InvalidRho(f"rho must lie in [1, 3], got {rho}")
    return q


@lru_cache(maxsize=32)
def _build_cached(m: int, rho: Fraction) -> TruncatedMatrix:
    rows = []
    for i in range(m + 1):
        row = []
        for j in range(m + 1):
            e = entry(i, j)
            if rho != 1 and i != j and not e.is_zero():
                q = _rational_entry(i, j)
                if q is not None:
                    e = Interval.from_fraction(q * rho ** (i - j))
                else:
                    e = e * Interval.from_fraction(rho ** (i - j))
            row.append(e)
        rows.append(tuple(row))
    return TruncatedMatrix(m, rho, tuple(rows))


def build(m: int, rho: Union[int, float, Fraction, str] = 1) -> TruncatedMatrix:
    """Interval enclosure of the (m+1) x (m+1) truncation, scaled by rho^(i-j)."""
    if int(m) != m or m < 1:
        raise ValueError(f"truncation order must be a positive integer, got {m}")
    return _build_cached(int(m), _as_rho(rho))


def column_abs_sum(
    M: TruncatedMatrix, j: int, exclude_row: Optional[int] = None, first_row: int = 0
) -> Interval:
    """Enclosure of sum_i |M[i, j]| over rows first_row..m, optionally
    skipping one row."""
    return isum(
        abs(M[i, j]) for i in range(first_row, M.size) if i != exclude_row
    )


def col0_tail_bound(m: int) -> Interval:
    """Upper bound for sum_{r >= m} |A[r+1, 0]|, i.e. column 0 below row m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    q = Fraction(9, 4 * m * m * 3**m)
    return Interval.from_bounds(0, q)


def column_sum_bound(K: int) -> Fraction:
    """Upper bound for the full column sum sum_i |A[i, K+1]| of the infinite
    matrix, K >= 2.

    Row 0 vanishes for K >= 1 and the rows r >= 0 contribute
    C(K, r) |(-1)^(K-r) 2^-(K+1) - 2^-K / K| plus 1/K in row 1.  Half of the
    binomial mass carries each sign, giving 1/K + 1/2.
    """
    if K < 2:
        raise ValueError("bound stated for K >= 2")
    return Fraction(1, K) + Fraction(1, 2)


def matrix_norm1(M: TruncatedMatrix) -> float:
    """Upper bound on the induced l1 norm (max column abs sum)."""
    return max(column_abs_sum(M, j).hi for j in range(M.size))


def matvec(M: TruncatedMatrix, x: Sequence[Interval]) -> list:
    return [isum(a * b for a, b in zip(row, x) if not a.is_zero()) for row in M.entries]


def vecmat(x: Sequence[Interval], M: TruncatedMatrix) -> list:
    n = M.size
    return [isum(x[i] * M[i, k] for i in range(n) if not M[i, k].is_zero()) for k in range(n)]


def float_matrix(m: int) -> np.ndarray:
    """Midpoint (double) matrix of the unscaled truncation."""
    return build(m).mid()


__all__ = [
    "TruncatedMatrix",
    "InvalidRho",
    "ZERO",
    "build",
    "entry",
    "column_abs_sum",
    "col0_tail_bound",
    "column_sum_bound",
    "matrix_norm1",
    "matvec",
    "vecmat",
    "float_matrix",
    "const_bounds",
]
