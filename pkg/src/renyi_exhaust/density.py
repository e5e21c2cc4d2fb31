"""Gap densities in the log-plus-polynomial basis and their fixed point.

A density on (0, 2] is f(t) = ell log t + sum_k a_k (t-1)^k.  One stage of
the process maps the coefficient vector c = (ell, a_0, ..., a_m) to
A c / (1 + C), where C = int_1^2 f is the probability that a gap still
holds a car of the next size.  Iterating from any admissible start
converges to the stationary gap density f*.

Everything here is plain double arithmetic on the midpoint matrix; the
rigorous side lives in :mod:`renyi_exhaust.spectral`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, special

from .interval import Interval, dot
from .matrix import build, float_matrix

LOG2 = math.log(2.0)
PI_SQ_OVER_12 = math.pi**2 / 12.0

GRID_LOWER = 0.05
GRID_POINTS = 512
GRID_ANCHORS = (0.05, 0.5, 1.0, 1.5, 2.0)


class DomainError(ValueError):
    pass


class NonPositiveNormalization(ArithmeticError):
    pass


class MaxIterExceeded(RuntimeError):
    pass


class OrthogonalStart(ValueError):
    pass


@dataclass(frozen=True)
class DensityCoeffs:
    ell: float
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))

    @property
    def m(self) -> int:
        """Truncation order: the vector (ell, a_0..a_{m-1}) has m+1 entries."""
        return len(self.a)

    def vector(self) -> np.ndarray:
        return np.concatenate(([self.ell], self.a))

    @classmethod
    def from_vector(cls, c) -> "DensityCoeffs":
        c = np.asarray(c, dtype=float)
        return cls(float(c[0]), c[1:].copy())

    def padded(self, m: int) -> "DensityCoeffs":
        if m < self.m:
            raise ValueError(f"cannot truncate degree {self.m} to {m}")
        a = np.zeros(m)
        a[: len(self.a)] = self.a
        return DensityCoeffs(self.ell, a)

    def to_json(self) -> dict:
        return {"ell": repr(self.ell), "a": [repr(float(x)) for x in self.a]}

    @classmethod
    def from_json(cls, d: dict) -> "DensityCoeffs":
        return cls(float(d["ell"]), np.array([float(x) for x in d["a"]]))


def constant(value: float = 0.5, m: int = 1) -> DensityCoeffs:
    a = np.zeros(max(m, 1))
    a[0] = value
    return DensityCoeffs(0.0, a)


def _check_domain(t: np.ndarray, allow_zero: bool = False) -> None:
    lo_ok = (t >= 0.0) if allow_zero else (t > 0.0)
    if not np.all(lo_ok & (t <= 2.0)):
        raise DomainError("evaluation point outside (0, 2]")


def evaluate(f: DensityCoeffs, t):
    t_arr = np.asarray(t, dtype=float)
    _check_domain(t_arr)
    out = f.ell * np.log(t_arr) + P.polyval(t_arr - 1.0, f.a)
    return out if np.ndim(t) else float(out)


def derivative(f: DensityCoeffs, t):
    t_arr = np.asarray(t, dtype=float)
    _check_domain(t_arr)
    out = f.ell / t_arr + P.polyval(t_arr - 1.0, P.polyder(f.a))
    return out if np.ndim(t) else float(out)


def second_derivative(f: DensityCoeffs, t):
    t_arr = np.asarray(t, dtype=float)
    _check_domain(t_arr)
    out = -f.ell / t_arr**2 + P.polyval(t_arr - 1.0, P.polyder(f.a, 2))
    return out if np.ndim(t) else float(out)


def cdf(f: DensityCoeffs, t):
    """F(t) = int_0^t f, valid on [0, 2]."""
    t_arr = np.asarray(t, dtype=float)
    _check_domain(t_arr, allow_zero=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(t_arr > 0.0, t_arr * np.log(np.where(t_arr > 0, t_arr, 1.0)), 0.0)
    anti = P.polyint(f.a)  # antiderivative in s = t - 1, zero at s = 0
    out = f.ell * (xlogx - t_arr) + P.polyval(t_arr - 1.0, anti) - P.polyval(-1.0, anti)
    return out if np.ndim(t) else float(out)


def _k(f: DensityCoeffs) -> np.ndarray:
    return np.arange(len(f.a), dtype=float)


def integral_total(f: DensityCoeffs) -> float:
    """int_0^2 f."""
    k = _k(f)
    even = (np.arange(len(f.a)) % 2) == 0
    return f.ell * (2 * LOG2 - 2) + float(np.sum(2 * f.a[even] / (k[even] + 1)))


def integral_upper(f: DensityCoeffs) -> float:
    """int_1^2 f, the survival mass C."""
    k = _k(f)
    return f.ell * (2 * LOG2 - 1) + float(np.sum(f.a / (k + 1)))


def expected_value(f: DensityCoeffs) -> float:
    """int_0^2 t f(t) dt."""
    k = np.arange(len(f.a))
    # int_0^2 t (t-1)^k dt = int_{-1}^{1} (s+1) s^k ds
    w = np.where(k % 2 == 0, 2.0 / (k + 1), 2.0 / (k + 2))
    return f.ell * (2 * LOG2 - 1) + float(np.sum(f.a * w))


def expected_value_quad(f: DensityCoeffs) -> float:
    val, _ = integrate.quad(lambda t: t * evaluate(f, t), 0.0, 2.0, limit=200)
    return val


@dataclass
class DensityIterate:
    coeffs: DensityCoeffs
    stage: int
    C: float
    R_half: float


def initial(f: DensityCoeffs, m: int) -> DensityIterate:
    g = f.padded(m)
    total = integral_total(g)
    if not total > 0.0:
        raise NonPositiveNormalization(f"initial density has mass {total}")
    g = DensityCoeffs.from_vector(g.vector() / total)
    c = integral_upper(g)
    return DensityIterate(g, 0, c, (1 + c) / 2)


def step(it: DensityIterate, A: Optional[np.ndarray] = None) -> DensityIterate:
    """One stage: c -> A c / (1 + C), renormalised to unit mass."""
    f = it.coeffs
    if A is None:
        A = float_matrix(f.m)
    c_s = integral_upper(f)
    new = A @ f.vector() / (1.0 + c_s)
    g = DensityCoeffs.from_vector(new)
    total = integral_total(g)
    if not total > 0.0:
        raise NonPositiveNormalization(f"iterate has mass {total}")
    if total != 1.0:
        g = DensityCoeffs.from_vector(new / total)
    c = integral_upper(g)
    return DensityIterate(g, it.stage + 1, c, (1 + c) / 2)


def default_grid(lower: float = GRID_LOWER, n: int = GRID_POINTS) -> np.ndarray:
    """Chebyshev points on [lower, 2] together with fixed anchor points."""
    k = np.arange(n)
    x = np.cos(np.pi * (k + 0.5) / n)
    pts = 0.5 * (lower + 2.0) + 0.5 * (2.0 - lower) * x
    anchors = [a for a in GRID_ANCHORS if a >= lower]
    return np.unique(np.concatenate((pts, anchors)))


@dataclass
class FixedPointResult:
    fstar: DensityCoeffs
    C: float
    R_half: float
    iterations: int
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = self.fstar.to_json()
        d["C"] = repr(self.C)
        d["R_half"] = repr(self.R_half)
        return d


def iterate_to_fixed(
    f0: DensityCoeffs,
    tol: float = 1e-10,
    max_iter: int = 200,
    *,
    m: int = 64,
    grid: Optional[np.ndarray] = None,
    left: Optional[Sequence[Interval]] = None,
) -> FixedPointResult:
    """Iterate until successive iterates differ by less than ``tol`` in sup
    norm on the grid.

    If ``left`` (an enclosure of the left eigenvector of A_m) is given, a
    start whose component along the dominant direction is not provably
    nonzero is rejected.
    """
    if grid is None:
        grid = default_grid()
    it = initial(f0, m)
    if left is not None:
        wu = dot(left, [Interval.point(x) for x in it.coeffs.vector()])
        if wu.lo <= 0.0 <= wu.hi:
            raise OrthogonalStart(f"w . f0 = {wu} encloses zero")
    A = float_matrix(m)
    prev = evaluate(it.coeffs, grid)
    history = []
    for n in range(1, max_iter + 1):
        c_prev = it.C
        it = step(it, A)
        cur = evaluate(it.coeffs, grid)
        diff = float(np.max(np.abs(cur - prev)))
        history.append({"stage": n, "C_s": c_prev, "C": it.C, "R_half": it.R_half, "sup_diff": diff})
        prev = cur
        if diff < tol:
            return FixedPointResult(it.coeffs, it.C, it.R_half, n, history)
    raise MaxIterExceeded(f"no convergence to {tol} within {max_iter} steps (last diff {diff:.3e})")


def left_vector(m: int) -> list:
    """Interval enclosure of the left eigenvector of A_m (w_0 = 1)."""
    from .spectral import find_lambda, solve_left

    M = build(m)
    return solve_left(M, find_lambda(m, matrix=M))


# steady-state residual -------------------------------------------------


def _dilog_neg(s):
    # Li2(-s) = spence(1 + s) in scipy's convention
    return special.spence(1.0 + np.asarray(s, dtype=float))


def apply_V(f: DensityCoeffs, x):
    """(V f)(x) = int_{1+x/2}^2 f(u) / (u - 1) du in closed form, x in (0, 2]."""
    x = np.asarray(x, dtype=float)
    _check_domain(x)
    half = x / 2.0
    out = f.ell * (PI_SQ_OVER_12 + _dilog_neg(half)) + f.a[0] * np.log(2.0 / x)
    for k in range(1, len(f.a)):
        out = out + f.a[k] * (1.0 - half**k) / k
    return out


def apply_V_quad(f: DensityCoeffs, x: float) -> float:
    """Reference value of (V f)(x) by adaptive quadrature."""
    val, _ = integrate.quad(lambda u: evaluate(f, u) / (u - 1.0), 1.0 + x / 2.0, 2.0, limit=200)
    return val


def apply_U(f: DensityCoeffs, x):
    """(U f)(x) = f(x/2) / 2."""
    x = np.asarray(x, dtype=float)
    return 0.5 * evaluate(f, x / 2.0)


def steady_residual(f: DensityCoeffs, C: float, grid: Optional[np.ndarray] = None) -> float:
    """max over the grid of |U f + V f - (1 + C) f|."""
    if grid is None:
        grid = default_grid()
    r = apply_U(f, grid) + apply_V(f, grid) - (1.0 + C) * evaluate(f, grid)
    return float(np.max(np.abs(r)))


# shape checks -----------------------------------------------------------


@dataclass
class ShapeReport:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def failures(self) -> list:
        return [k for k, (ok, _) in self.checks.items() if not ok]


def shape_report(f: DensityCoeffs, C: float, grid: Optional[np.ndarray] = None, tol: float = 1e-8) -> ShapeReport:
    if grid is None:
        grid = default_grid()
    fv = evaluate(f, grid)
    d1 = derivative(f, grid)
    d2 = second_derivative(f, grid)
    f1, f2 = evaluate(f, 1.0), evaluate(f, 2.0)
    E = expected_value(f)
    E_pred = 2 * C / (1 - C)
    ell_pred = -4 * f1 / (4 * C + 2)
    checks = {
        "positive": (bool(np.all(fv > 0)), f"min f = {fv.min():.6g}"),
        "decreasing": (bool(np.all(d1 < 0)), f"max f' = {d1.max():.6g}"),
        "convex": (bool(np.all(d2 > 0)), f"min f'' = {d2.min():.6g}"),
        "f(1) <= 4 f(2) <= 2 f(1)": (f1 <= 4 * f2 <= 2 * f1, f"f(1) = {f1:.8f}, f(2) = {f2:.8f}"),
        "mean gap 2C/(1-C)": (abs(E - E_pred) <= tol, f"E = {E:.12f}, 2C/(1-C) = {E_pred:.12f}"),
        "ell in (-8/5, 0)": (-1.6 < f.ell < 0.0, f"ell = {f.ell:.10f}"),
        "f(1) <= 4/5": (f1 <= 0.8, f"f(1) = {f1:.10f}"),
        "ell = -4 f(1) / (4C + 2)": (abs(f.ell - ell_pred) <= tol, f"ell = {f.ell:.12f}, predicted {ell_pred:.12f}"),
    }
    return ShapeReport(checks)
