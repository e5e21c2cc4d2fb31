"""Certified dominant eigenvalue of the transfer matrix.

The certificate works in two steps.

1. Approximate right/left eigenvectors ``v`` and ``w`` of a truncation A_h
   are turned into a similarity ``W A V`` with ``W V = I``.  The pivot
   column of ``W A V`` is (nearly) ``lambda e_0``, so a Gershgorin disc of
   tiny radius isolates the dominant eigenvalue.
2. ``W`` and ``V`` are extended to all larger truncations by the diagonal
   blocks ``8 I`` and ``I / 8``.  The rows and columns beyond h then only
   add a provable amount to the column discs, so the same isolating disc is
   valid for every A_n with n > h and for the limit n -> infinity.

Nothing here requires ``v`` and ``w`` to be exact.  The entries of the
transformed matrix are computed from the identity

    (W A V)[i, k] = A[i, k] - v_i A[j, k] - w_k r_i,   r = A v - v (A v)_j,

which holds for any v with v_j = 1; similarity only needs w . v = 1, which
:func:`renormalize_pair` certifies up to an enclosed perturbation of w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .interval import ONE, ZERO, Interval, abs_sum, dot, isum, round_up
from .matrix import (
    TruncatedMatrix,
    build,
    col0_tail_bound,
    column_sum_bound,
    matrix_norm1,
    matvec,
    vecmat,
)

DEFAULT_BRACKET = Interval(1.20, 1.26)
# weight of the identity block appended to W beyond the truncation (1/8 on V)
EXTENSION_WEIGHT = 8


class NoSignChange(ValueError):
    pass


class TolUnreachable(ArithmeticError):
    pass


class LambdaTooSmall(ValueError):
    pass


class AlphaTooLarge(ArithmeticError):
    pass


class PivotNotUnit(ValueError):
    pass


class OrthogonalStart(ValueError):
    pass


class CertificationFailed(RuntimeError):
    def __init__(self, check: str, detail: str = ""):
        super().__init__(f"check {check!r} failed: {detail}")
        self.check = check
        self.detail = detail


# eigenvector solves ---------------------------------------------------


def _guard(M: TruncatedMatrix, lam: Interval) -> None:
    if lam.lo <= M[1, 1].hi:
        raise LambdaTooSmall(f"lambda {lam} does not exceed A[1,1] = {M[1, 1]}")
    for i in range(2, M.size):
        if (lam - M[i, i]).lo <= 0.0:
            raise LambdaTooSmall(f"lambda {lam} meets diagonal entry {i}")


def solve_right(M: TruncatedMatrix, lam: Interval) -> list:
    """Right eigenvector with v_0 = 1 by back substitution on rows m..1.

    With an interval ``lam`` the result encloses v(lam') for every lam' in
    it, in particular the eigenvector of any eigenvalue inside ``lam``.
    """
    _guard(M, lam)
    n = M.size
    v = [ZERO] * n
    v[0] = ONE
    for i in range(n - 1, 0, -1):
        acc = M[i, 0]
        row = M.row(i)
        for k in range(i + 1, n):
            if not row[k].is_zero():
                acc = acc + row[k] * v[k]
        v[i] = acc / (lam - row[i])
    return v


def solve_left(M: TruncatedMatrix, lam: Interval) -> list:
    """Left eigenvector with w_0 = 1 by forward substitution on columns 1..m."""
    _guard(M, lam)
    n = M.size
    w = [ZERO] * n
    w[0] = ONE
    for k in range(1, n):
        acc = M[0, k]
        for i in range(1, k):
            if not M[i, k].is_zero():
                acc = acc + w[i] * M[i, k]
        w[k] = acc / (lam - M[k, k])
    return w


def _residual(M: TruncatedMatrix, lam: Interval) -> Interval:
    # row 0 of (A - lam) v = 0 after eliminating rows 1..m
    v = solve_right(M, lam)
    return lam - M[0, 0] - M[0, 1] * v[1]


def _sign(g: Interval) -> int:
    if g.lo > 0.0:
        return 1
    if g.hi < 0.0:
        return -1
    return 0


def find_lambda(
    m: int,
    bracket: Interval = DEFAULT_BRACKET,
    tol: float = 1e-10,
    *,
    matrix: Optional[TruncatedMatrix] = None,
) -> Interval:
    """Rigorous enclosure of the eigenvalue of A_m inside ``bracket``.

    The scalar function lam - 1/2 + v_1(lam) vanishes exactly at
    eigenvalues; it is evaluated in interval arithmetic and bracketed by
    bisection, falling back to trisection points when the midpoint sign is
    not decided.
    """
    M = matrix if matrix is not None else build(m)
    a, b = bracket.lo, bracket.hi
    sa = _sign(_residual(M, Interval.point(a)))
    sb = _sign(_residual(M, Interval.point(b)))
    if sa == 0 or sb == 0 or sa == sb:
        raise NoSignChange(f"residual signs at bracket ends: {sa}, {sb}")
    while b - a > tol:
        for frac in (0.5, 1 / 3, 2 / 3):
            c = a + (b - a) * frac
            if not (a < c < b):
                continue
            sc = _sign(_residual(M, Interval.point(c)))
            if sc != 0:
                break
        else:
            raise TolUnreachable(f"residual sign undecided inside [{a!r}, {b!r}]")
        if sc == sa:
            a = c
        else:
            b = c
    return Interval(a, b)


# similarity -----------------------------------------------------------


def renormalize_pair(v: Sequence[Interval], w: Sequence[Interval]):
    """Rescale ``w`` so that some exact w* inside the result has w* . v = 1.

    Returns ``(w_hat, bound)`` where ``bound`` encloses the relative
    perturbation lam = alpha / (1 - alpha) needed, alpha = |w . v - 1|.
    A sum w.v = 1 +- alpha can always be corrected by scaling each w_i by a
    factor within 1 +- lam, and the returned enclosure includes that range.
    """
    lo, hi = exact_dot_bounds(w, v)
    c = float((lo + hi) / 2)
    if c == 0.0:
        raise AlphaTooLarge("w . v encloses zero")
    if c != 1.0:
        w = [x / Interval.point(c) for x in w]
        lo, hi = exact_dot_bounds(w, v)
    alpha = max(1 - lo, hi - 1, Fraction(0))
    if alpha >= Fraction(1, 2):
        raise AlphaTooLarge(f"|w.v - 1| <= {float(alpha)} is not below 1/2")
    if alpha == 0:
        return list(w), ZERO
    lam = alpha / (1 - alpha)
    lam_hi = round_up(lam)
    factor = Interval(1.0, 1.0) + Interval(-lam_hi, lam_hi)
    return [x * factor for x in w], Interval.from_fraction(lam)


def exact_dot_bounds(u: Sequence[Interval], v: Sequence[Interval]) -> tuple:
    """Exact rational range of sum u_i v_i over the boxes (no rounding)."""
    lo = hi = Fraction(0)
    for a, b in zip(u, v):
        ps = [Fraction(x) * Fraction(y) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
        lo += min(ps)
        hi += max(ps)
    return lo, hi


@dataclass
class SimilarityPair:
    W: list
    V: list
    j: int
    norm_W: float
    norm_V: float


def _col_norm(Mx: list) -> float:
    n = len(Mx)
    return max(abs_sum(Mx[i][k] for i in range(n)).hi for k in range(n))


def similarity(v: Sequence[Interval], w_hat: Sequence[Interval], j: int = 0) -> SimilarityPair:
    """Matrices W (row j = w_hat, column j = -v off the pivot) and V
    (column j = v, other columns e_k - v w_hat_k)."""
    n = len(v)
    if not (v[j].lo == 1.0 and v[j].hi == 1.0):
        raise PivotNotUnit(f"v[{j}] = {v[j]} is not exactly 1")
    W = [[ZERO] * n for _ in range(n)]
    V = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if i == j:
                W[i][k] = w_hat[k]
            elif k == j:
                W[i][k] = -v[i]
            elif i == k:
                W[i][k] = ONE
            if k == j:
                V[i][k] = v[i]
            else:
                t = -(v[i] * w_hat[k])
                V[i][k] = t + ONE if i == k else t
    return SimilarityPair(W, V, j, _col_norm(W), _col_norm(V))


def deflate(M: TruncatedMatrix, v: Sequence[Interval], w_hat: Sequence[Interval], j: int = 0) -> list:
    """Enclosure of W A V, computed entrywise without a triple product."""
    n = M.size
    if len(v) != n or len(w_hat) != n:
        raise ValueError("vector length does not match matrix")
    if not (v[j].lo == 1.0 and v[j].hi == 1.0):
        raise PivotNotUnit(f"v[{j}] = {v[j]} is not exactly 1")
    Av = matvec(M, v)
    wA = vecmat(w_hat, M)
    lam = dot(w_hat, Av)
    r = [Av[i] - v[i] * Av[j] for i in range(n)]
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if i == j and k == j:
                out[i][k] = lam
            elif k == j:
                out[i][k] = r[i]
            elif i == j:
                out[i][k] = wA[k] - w_hat[k] * lam
            else:
                out[i][k] = M[i, k] - v[i] * M[j, k] - w_hat[k] * r[i]
    return out


@dataclass
class DiscReport:
    centers: list
    radii: list  # upper bounds (floats)

    def disc(self, k: int) -> Interval:
        """Real interval covered by disc k on the real line."""
        c, r = self.centers[k], self.radii[k]
        return Interval(c.lo, c.hi) + Interval(-r, r)

    def extent(self, k: int) -> float:
        """Upper bound of |z| over disc k."""
        return (Interval.point(self.centers[k].mag) + Interval.point(self.radii[k])).hi

    def separated(self, j: int, k: int) -> bool:
        cj, ck = self.centers[j], self.centers[k]
        gap = max((cj - ck).lo, (ck - cj).lo)
        reach = (Interval.point(self.radii[j]) + Interval.point(self.radii[k])).hi
        return gap > reach

    def isolated(self, j: int) -> bool:
        return all(self.separated(j, k) for k in range(len(self.centers)) if k != j)


def gershgorin(D: list, extra_radius: Optional[Sequence[float]] = None) -> DiscReport:
    """Column Gershgorin discs of an interval matrix (list of rows)."""
    n = len(D)
    centers, radii = [], []
    for k in range(n):
        rad = abs_sum(D[i][k] for i in range(n) if i != k)
        if extra_radius is not None:
            rad = rad + Interval.point(extra_radius[k])
        centers.append(D[k][k])
        radii.append(rad.hi)
    return DiscReport(centers, radii)


# certification --------------------------------------------------------


@dataclass
class StageResult:
    h: int
    lambda_estimate: Interval
    alpha_bound: Interval
    norm_W: float
    norm_V: float
    w_hat_sup: float
    discs: DiscReport
    tail_radius: float
    outer_bound: float  # every other eigenvalue has modulus <= this
    disc0: Interval
    isolated: bool
    pairwise: list


def _point_vector(xs: Sequence[Interval]) -> list:
    out = [Interval.point(x.mid) for x in xs]
    out[0] = ONE
    return out


def _stage(M: TruncatedMatrix, bracket: Interval, tol: float) -> StageResult:
    h = M.m
    lam = find_lambda(h, bracket, tol, matrix=M)
    lam_pt = Interval.point(lam.mid)
    v = _point_vector(solve_right(M, lam_pt))
    w = _point_vector(solve_left(M, lam_pt))
    w_hat, alpha = renormalize_pair(v, w)
    sim = similarity(v, w_hat, 0)
    D = deflate(M, v, w_hat, 0)

    # rows beyond h only meet column 0 among columns <= h
    ext = EXTENSION_WEIGHT
    tail = (Interval.point(ext * sim.norm_V) * col0_tail_bound(h)).hi
    extra = [tail] * (h + 1)
    discs = gershgorin(D, extra)

    beyond = Fraction(max(Fraction(round_up(Fraction(sim.norm_W) / ext)), Fraction(1)))
    beyond_bound = round_up(beyond * column_sum_bound(max(h, 2)))
    outer = max([discs.extent(k) for k in range(1, h + 1)] + [beyond_bound])
    disc0 = discs.disc(0)
    pairwise = [(k, discs.separated(0, k)) for k in range(1, h + 1)]
    isolated = disc0.lo > outer and all(ok for _, ok in pairwise)
    return StageResult(
        h=h,
        lambda_estimate=lam,
        alpha_bound=alpha,
        norm_W=sim.norm_W,
        norm_V=sim.norm_V,
        w_hat_sup=max(x.mag for x in w_hat),
        discs=discs,
        tail_radius=tail,
        outer_bound=outer,
        disc0=disc0,
        isolated=isolated,
        pairwise=pairwise,
    )


@dataclass
class EigenCertificate:
    m: int
    h: int
    lam: Interval
    v: list
    w: list
    zeta: Interval
    gap_bound: float
    checks: list
    stages: list = field(default_factory=list, repr=False)

    @property
    def r_half(self) -> Interval:
        return exhaustion_ratio(self.lam)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "h": self.h,
            "lambda": self.lam.to_json(),
            "R_half": self.r_half.to_json(),
            "gap_bound": repr(self.gap_bound),
            "zeta": self.zeta.to_json(),
            "v": [x.to_json() for x in self.v],
            "w": [x.to_json() for x in self.w],
            "stages": [
                {
                    "h": s.h,
                    "disc0": s.disc0.to_json(),
                    "disc0_radius": repr(s.discs.radii[0]),
                    "tail_radius": repr(s.tail_radius),
                    "outer_bound": repr(s.outer_bound),
                    "norm_W": repr(s.norm_W),
                    "norm_V": repr(s.norm_V),
                }
                for s in self.stages
            ],
            "checks": self.checks,
        }


def exhaustion_ratio(lam: Interval) -> Interval:
    """R_1/2 = lambda / 2 (halving is exact in binary)."""
    return Interval(lam.lo * 0.5, lam.hi * 0.5)


def _check(checks: list, name: str, ok: bool, detail: str) -> None:
    checks.append({"name": name, "pass": bool(ok), "detail": detail})


def certify(m: int, h: int = 7, *, bracket: Interval = DEFAULT_BRACKET, tol: float = 1e-12) -> EigenCertificate:
    """Certify the dominant eigenvalue shared by all truncations A_n, n >= m.

    Stage A deflates A_h and extends to every larger truncation, proving
    the dominant eigenvalue is simple and isolated.  Stage B repeats the
    construction on A_m itself, which narrows the enclosure to what the
    column-0 tail below row m allows.  The reported enclosure is the
    intersection of both discs.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    h = min(h, m)
    checks: list = []

    stage_a = _stage(build(h), bracket, tol)
    stages = [stage_a]
    if m > h:
        stage_b = _stage(build(m), bracket, tol)
        stages.append(stage_b)
    else:
        stage_b = stage_a

    for s in stages:
        tag = f"h={s.h}"
        _check(checks, f"{tag}: |w.v - 1| correction", s.alpha_bound.hi < 1.0,
               f"relative perturbation <= {s.alpha_bound.hi:.3e}")
        for k, ok in s.pairwise:
            _check(checks, f"{tag}: disc 0 disjoint from disc {k}", ok,
                   f"disc0 {s.disc0}, center {k} {s.discs.centers[k]}, radius {s.discs.radii[k]:.6g}")
        _check(checks, f"{tag}: disc 0 outside |z| <= {s.outer_bound:.6f}",
               s.disc0.lo > s.outer_bound, f"disc0 = {s.disc0}")

    lam = stage_a.disc0
    if stage_b is not stage_a:
        ok = stage_b.disc0.intersects(stage_a.disc0)
        _check(checks, "stage discs intersect", ok, f"{stage_a.disc0} vs {stage_b.disc0}")
        _check(checks, f"h={stage_b.h} disc beyond h={stage_a.h} bound",
               stage_b.disc0.lo > stage_a.outer_bound, f"{stage_b.disc0.lo} > {stage_a.outer_bound}")
        if ok:
            lam = stage_a.disc0.intersection(stage_b.disc0)

    for c in checks:
        if not c["pass"]:
            raise CertificationFailed(c["name"], c["detail"])

    gap = min(s.outer_bound for s in stages)
    M = build(m)
    v = solve_right(M, lam)
    w = solve_left(M, lam)
    zeta = dot(w, v)
    _check(checks, "w.v positive", zeta.lo > 0.0, f"zeta = {zeta}")
    if not checks[-1]["pass"]:
        raise CertificationFailed(checks[-1]["name"], checks[-1]["detail"])
    return EigenCertificate(m=m, h=h, lam=lam, v=v, w=w, zeta=zeta, gap_bound=gap,
                            checks=checks, stages=stages)


# power iteration -------------------------------------------------------


class PowerResult(NamedTuple):
    direction: np.ndarray
    residual: float
    ratio: Interval
    theorem_bound: float


def power_converge(u, n: int, M: TruncatedMatrix, cert: EigenCertificate) -> PowerResult:
    """n steps of power iteration on M from u.

    ``residual`` is the l1 distance of the normalised iterate to the signed
    normalised eigenvector.  ``ratio`` encloses the dominant eigenvalue of
    M via | ||M x|| - lambda | <= ||M|| ||x - v_hat||.  ``theorem_bound``
    bounds ||lambda^-n M^n u - (w_hat . u) v|| using the similarity norms.
    """
    if M.m != cert.m:
        raise ValueError("certificate was computed for a different truncation")
    u = np.asarray(u, dtype=float)
    if u.shape != (M.size,):
        raise ValueError("start vector has wrong length")
    ui = [Interval.point(x) for x in u]
    wu = dot(cert.w, ui)
    if wu.lo <= 0.0 <= wu.hi:
        raise OrthogonalStart(f"w . u = {wu} encloses zero")
    A = M.mid()
    x = u / np.abs(u).sum()
    for _ in range(n):
        x = A @ x
        x = x / np.abs(x).sum()

    sign = 1.0 if wu.lo > 0.0 else -1.0
    vnorm = abs_sum(cert.v)
    xi = [Interval.point(t) for t in x]
    dist = isum(abs(xi[i] - Interval.point(sign) * cert.v[i] / vnorm) for i in range(M.size))
    Ax = matvec(M, xi)
    nAx = abs_sum(Ax)
    err = Interval.point(matrix_norm1(M)) * Interval.point(dist.hi)
    ratio = Interval(nAx.lo, nAx.hi) + Interval(-err.hi, err.hi)

    stage = cert.stages[-1]
    g = stage.outer_bound / cert.lam.lo
    bound = g**n * stage.norm_V * (stage.norm_W + stage.w_hat_sup) * float(np.abs(u).sum())
    return PowerResult(direction=x, residual=dist.hi, ratio=ratio, theorem_bound=bound)
