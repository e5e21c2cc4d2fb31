"""Closed-interval arithmetic with outward rounding.

Every interval is a pair of finite doubles ``lo <= hi``.  Results of the
four basic operations are guaranteed to contain the exact real result for
every choice of exact operands inside the inputs.

Two rounding modes are available:

``one-ulp-outward``
    Compute the round-to-nearest result and step one representable value
    outward.  Cheap, at most one ulp wider than necessary per endpoint.
    Operations with an exact zero operand (and multiplication or division
    by an exact one) are returned without widening so that structural
    zeros in sparse matrices stay exact.

``hardware-directed``
    Tightest possible enclosure: each endpoint is the exact rational
    result rounded toward -inf / +inf.  CPython gives no portable access
    to the FPU rounding mode, so directed rounding is emulated exactly
    with :class:`fractions.Fraction`.  Slower, used mainly as a reference.

Constants needed by the transfer matrix are enclosed from exact rational
partial sums with rigorous rational tail bounds, then rounded outward once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

ONE_ULP = "one-ulp-outward"
DIRECTED = "hardware-directed"
MODES = (ONE_ULP, DIRECTED)

Number = Union[int, float, Fraction]


class DivisionByIntervalContainingZero(ZeroDivisionError):
    pass


class IntervalOverflow(OverflowError):
    pass


class UnknownConstant(KeyError):
    pass


class NegativeBound(ValueError):
    pass


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def round_down(q: Fraction) -> float:
    """Largest double <= q."""
    try:
        f = float(q)
    except OverflowError as exc:
        raise IntervalOverflow(str(exc)) from None
    if math.isinf(f):
        raise IntervalOverflow("value exceeds double range")
    if Fraction(f) > q:
        f = _down(f)
    return f


def round_up(q: Fraction) -> float:
    """Smallest double >= q."""
    try:
        f = float(q)
    except OverflowError as exc:
        raise IntervalOverflow(str(exc)) from None
    if math.isinf(f):
        raise IntervalOverflow("value exceeds double range")
    if Fraction(f) < q:
        f = _up(f)
    return f


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("NaN endpoint")
        if math.isinf(lo) or math.isinf(hi):
            raise IntervalOverflow(f"non-finite endpoint [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")

    # construction -----------------------------------------------------

    @classmethod
    def point(cls, x: float) -> "Interval":
        x = float(x)
        return cls(x, x)

    @classmethod
    def from_fraction(cls, q: Number) -> "Interval":
        """Tightest enclosure of an exact rational."""
        q = Fraction(q)
        return cls(round_down(q), round_up(q))

    @classmethod
    def from_bounds(cls, lo: Number, hi: Number) -> "Interval":
        """Enclosure of the exact rational range [lo, hi]."""
        return cls(round_down(Fraction(lo)), round_up(Fraction(hi)))

    @classmethod
    def hull_of(cls, xs: Iterable[float]) -> "Interval":
        xs = list(xs)
        return cls(min(xs), max(xs))

    # queries ----------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self) -> float:
        """Upper bound on hi - lo."""
        return round_up(Fraction(self.hi) - Fraction(self.lo))

    @property
    def rad(self) -> float:
        return round_up((Fraction(self.hi) - Fraction(self.lo)) / 2)

    @property
    def mag(self) -> float:
        """max |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """min |x| over the interval."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, x: Union[Number, "Interval"]) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        # float/int/Fraction comparisons are exact in Python
        return self.lo <= x <= self.hi

    __contains__ = contains

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other: "Interval") -> "Interval":
        if not self.intersects(other):
            raise ValueError(f"disjoint intervals {self} and {other}")
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def is_zero(self) -> bool:
        return self.lo == 0.0 and self.hi == 0.0

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_negative(self) -> bool:
        return self.hi < 0.0

    # arithmetic -------------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def __add__(self, other):
        return op(self, _coerce(other), "add")

    def __radd__(self, other):
        return op(_coerce(other), self, "add")

    def __sub__(self, other):
        return op(self, _coerce(other), "sub")

    def __rsub__(self, other):
        return op(_coerce(other), self, "sub")

    def __mul__(self, other):
        return op(self, _coerce(other), "mul")

    def __rmul__(self, other):
        return op(_coerce(other), self, "mul")

    def __truediv__(self, other):
        return op(self, _coerce(other), "div")

    def __rtruediv__(self, other):
        return op(_coerce(other), self, "div")

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        if n == 0:
            return Interval(1.0, 1.0)
        base = self
        if n % 2 == 0:
            base = abs(self)
        out = base
        for _ in range(n - 1):
            out = out * base
        if n % 2 == 0 and out.lo < 0.0:
            out = Interval(0.0, out.hi)
        return out

    def to_json(self) -> dict:
        return {"lo": repr(self.lo), "hi": repr(self.hi)}

    @classmethod
    def from_json(cls, d: dict) -> "Interval":
        return cls(float(d["lo"]), float(d["hi"]))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, Fraction):
        return Interval.from_fraction(x)
    if isinstance(x, int) and abs(x) > 2**53:
        return Interval.from_fraction(Fraction(x))
    return Interval.point(x)


def _check_finite(*xs: float) -> None:
    for x in xs:
        if math.isinf(x) or math.isnan(x):
            raise IntervalOverflow("result outside double range")


def _one_ulp(a: Interval, b: Interval, kind: str) -> Interval:
    if kind == "add":
        if b.is_zero():
            return a
        if a.is_zero():
            return b
        lo, hi = a.lo + b.lo, a.hi + b.hi
    elif kind == "sub":
        if b.is_zero():
            return a
        if a.is_zero():
            return -b
        lo, hi = a.lo - b.hi, a.hi - b.lo
    elif kind == "mul":
        if a.is_zero() or b.is_zero():
            return ZERO
        if b == ONE:
            return a
        if a == ONE:
            return b
        ps = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
        lo, hi = min(ps), max(ps)
    elif kind == "div":
        if b.lo <= 0.0 <= b.hi:
            raise DivisionByIntervalContainingZero(f"{a} / {b}")
        if a.is_zero():
            return ZERO
        if b == ONE:
            return a
        qs = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
        lo, hi = min(qs), max(qs)
    else:
        raise ValueError(f"unknown operation {kind!r}")
    _check_finite(lo, hi)
    lo, hi = _down(lo), _up(hi)
    _check_finite(lo, hi)
    return Interval(lo, hi)


def _directed(a: Interval, b: Interval, kind: str) -> Interval:
    alo, ahi, blo, bhi = (Fraction(x) for x in (a.lo, a.hi, b.lo, b.hi))
    if kind == "add":
        lo, hi = alo + blo, ahi + bhi
    elif kind == "sub":
        lo, hi = alo - bhi, ahi - blo
    elif kind == "mul":
        ps = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        lo, hi = min(ps), max(ps)
    elif kind == "div":
        if b.lo <= 0.0 <= b.hi:
            raise DivisionByIntervalContainingZero(f"{a} / {b}")
        qs = (alo / blo, alo / bhi, ahi / blo, ahi / bhi)
        lo, hi = min(qs), max(qs)
    else:
        raise ValueError(f"unknown operation {kind!r}")
    return Interval(round_down(lo), round_up(hi))


def op(a: Interval, b: Interval, kind: str, mode: str = ONE_ULP) -> Interval:
    """Apply ``kind`` in {"add", "sub", "mul", "div"} with outward rounding."""
    if mode == ONE_ULP:
        return _one_ulp(a, b, kind)
    if mode == DIRECTED:
        return _directed(a, b, kind)
    raise ValueError(f"unknown rounding mode {mode!r}")


# vector helpers -------------------------------------------------------


def isum(xs: Iterable[Interval]) -> Interval:
    out = ZERO
    for x in xs:
        out = out + x
    return out


def dot(u: Sequence[Interval], v: Sequence[Interval]) -> Interval:
    if len(u) != len(v):
        raise ValueError("length mismatch")
    return isum(a * b for a, b in zip(u, v))


def abs_sum(xs: Iterable[Interval]) -> Interval:
    """Enclosure of sum |x_i| (upper end is the useful bound)."""
    return isum(abs(x) for x in xs)


def upper_sum(values: Iterable[float]) -> float:
    """Rigorous upper bound of a sum of doubles."""
    total = Fraction(0)
    for x in values:
        total += Fraction(x)
    return round_up(total)


# constants ------------------------------------------------------------

_TERMS = 64


def _log2_bounds(K: int = _TERMS) -> tuple[Fraction, Fraction]:
    # log 2 = sum 1/(k 2^k); tail after K terms <= 1/((K+1) 2^K)
    s = sum(Fraction(1, k * 2**k) for k in range(1, K + 1))
    return s, s + Fraction(1, (K + 1) * 2**K)


def _log_three_halves_bounds(K: int = 44) -> tuple[Fraction, Fraction]:
    # log(3/2) = -log(1 - 1/3) = sum 1/(k 3^k); tail <= 3^-K / (2 (K+1))
    s = sum(Fraction(1, k * 3**k) for k in range(1, K + 1))
    return s, s + Fraction(1, 2 * (K + 1) * 3**K)


def _dilog_neg_half_bounds(K: int = _TERMS) -> tuple[Fraction, Fraction]:
    # Li2(-1/2) = sum (-1)^k / (k^2 2^k), alternating with decreasing terms
    s = sum(Fraction((-1) ** k, k * k * 2**k) for k in range(1, K + 1))
    tail = enclose_alternating_tail_exact(Fraction(1, K * K * 2**K))
    return s + tail[0], s + tail[1]


def _dilog_half_bounds(K: int = _TERMS) -> tuple[Fraction, Fraction]:
    s = sum(Fraction(1, k * k * 2**k) for k in range(1, K + 1))
    return s, s + Fraction(1, (K + 1) ** 2 * 2**K)


def _pi_sq_over_12_bounds() -> tuple[Fraction, Fraction]:
    # pi^2/12 = Li2(1/2) + (log 2)^2 / 2
    d_lo, d_hi = _dilog_half_bounds()
    l_lo, l_hi = _log2_bounds()
    return d_lo + l_lo**2 / 2, d_hi + l_hi**2 / 2


def enclose_alternating_tail_exact(bound: Fraction) -> tuple[Fraction, Fraction]:
    if bound < 0:
        raise NegativeBound(str(bound))
    return -bound, bound


def enclose_alternating_tail(first_omitted_term_bound: Interval) -> Interval:
    """Symmetric enclosure of the tail of an alternating series whose terms
    decrease in magnitude, given a bound on the first omitted term."""
    if first_omitted_term_bound.lo < 0.0:
        raise NegativeBound(repr(first_omitted_term_bound))
    h = first_omitted_term_bound.hi
    return Interval(-h, h)


def _constant_bounds(name: str) -> tuple[Fraction, Fraction]:
    if name == "log2":
        return _log2_bounds()
    if name == "log_three_halves":
        return _log_three_halves_bounds()
    if name == "pi_sq_over_12":
        return _pi_sq_over_12_bounds()
    if name == "dilog_neg_half":
        return _dilog_neg_half_bounds()
    if name == "dilog_half":
        return _dilog_half_bounds()
    if name == "two_log2_minus_1":
        lo, hi = _log2_bounds()
        return 2 * lo - 1, 2 * hi - 1
    if name == "two_log2_minus_2":
        lo, hi = _log2_bounds()
        return 2 * lo - 2, 2 * hi - 2
    raise UnknownConstant(name)


CONSTANTS = (
    "log2",
    "log_three_halves",
    "pi_sq_over_12",
    "dilog_neg_half",
    "dilog_half",
    "two_log2_minus_1",
    "two_log2_minus_2",
)


@lru_cache(maxsize=None)
def const_enclosure(name: str) -> Interval:
    """Rigorous enclosure of a named constant, a few ulp wide."""
    lo, hi = _constant_bounds(name)
    return Interval.from_bounds(lo, hi)


@lru_cache(maxsize=None)
def const_bounds(name: str) -> tuple[Fraction, Fraction]:
    """Exact rational lower and upper bounds for a named constant."""
    return _constant_bounds(name)
