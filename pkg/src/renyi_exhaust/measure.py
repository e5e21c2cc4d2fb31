"""The stage operator on measures, discretised on a uniform grid of [0, 2].

A measure is stored as cell masses on ``B`` equal cells (piecewise
constant density inside each cell) plus a finite list of atoms.  The
operator T = U + V pushes mass forward:

* U: a gap x <= 1 cannot hold another car; after rescaling it becomes a
  gap of length 2x.  Cells [ih, (i+1)h] with i < B/2 map onto the two cells
  2i and 2i+1, atoms move from x to 2x.
* V: a gap u > 1 receives one car of length 1 placed uniformly and
  splits into two gaps.  After rescaling each is uniform on [0, 2(u-1)],
  so an atom of mass p at u becomes density p / (u - 1) on that range.

T does not preserve mass: mass(T mu) = mass(mu on [0,1]) + 2 mass(mu on (1,2]).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .density import DensityCoeffs, cdf, evaluate


class ZeroImageMass(ArithmeticError):
    pass


class AtomsPresent(ValueError):
    pass


@dataclass
class GridMeasure:
    bins: np.ndarray
    atoms: list = field(default_factory=list)  # (position, mass) pairs

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=float)
        if self.bins.ndim != 1 or len(self.bins) % 2:
            raise ValueError("bin count must be even")

    @property
    def B(self) -> int:
        return len(self.bins)

    @property
    def h(self) -> float:
        return 2.0 / self.B

    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 2.0, self.B + 1)

    def mass(self) -> float:
        return float(self.bins.sum()) + sum(p for _, p in self.atoms)

    def upper_mass(self) -> float:
        """Mass on (1, 2]."""
        return float(self.bins[self.B // 2:].sum()) + sum(p for x, p in self.atoms if x > 1.0)

    def scaled(self, c: float) -> "GridMeasure":
        return GridMeasure(self.bins * c, [(x, p * c) for x, p in self.atoms])

    def density(self) -> np.ndarray:
        return self.bins / self.h


def delta(x: float, bins: int) -> GridMeasure:
    if not 0.0 <= x <= 2.0:
        raise ValueError("atom position outside [0, 2]")
    return GridMeasure(np.zeros(bins), [(float(x), 1.0)])


def discretize(f: DensityCoeffs, bins: int) -> GridMeasure:
    """Cell masses of a density, integrated exactly through its CDF."""
    F = cdf(f, np.linspace(0.0, 2.0, bins + 1))
    return GridMeasure(np.diff(F))


def apply_U(mu: GridMeasure) -> GridMeasure:
    B = mu.B
    out = np.zeros(B)
    half = mu.bins[: B // 2] / 2.0
    out[0::2] = half
    out[1::2] = half
    atoms = [(2.0 * x, p) for x, p in mu.atoms if x <= 1.0]
    return GridMeasure(out, atoms)


def _uniform_on(length: float, mass: float, B: int) -> np.ndarray:
    """Cell masses of `mass` spread uniformly on [0, length], length <= 2."""
    h = 2.0 / B
    edges = np.arange(B + 1) * h
    overlap = np.clip(np.minimum(edges[1:], length) - edges[:-1], 0.0, None)
    return overlap * (mass / length)


def apply_V(mu: GridMeasure) -> GridMeasure:
    B = mu.B
    h = mu.h
    half = B // 2
    out = np.zeros(B)

    # cells on (1, 2] as s = u - 1 in cells [q h, (q+1) h], q = 0..B/2-1
    rho = mu.bins[half:] / h
    q = np.arange(half)
    beta = (q + 1) * h
    with np.errstate(divide="ignore"):
        step = rho * np.log((q + 1) / np.where(q > 0, q, 1))
    step[0] = 0.0  # unused: H is never needed at s = 0
    # H at the top edge of cell q: sum over cells above q
    H_top = np.concatenate((np.cumsum(step[::-1])[::-1][1:], [0.0]))

    # output cell i covers sigma = y / 2 in [i h / 2, (i+1) h / 2], inside cell q = i // 2
    i = np.arange(B)
    qi = i // 2
    sa = i * h / 2.0
    sb = (i + 1) * h / 2.0
    b = beta[qi]
    r = rho[qi]
    G = np.where(r > 0, r * (_xlog_vec(b, sb) - _xlog_vec(b, sa)), 0.0)
    out += np.clip(2.0 * (G + H_top[qi] * (sb - sa)), 0.0, None)

    for x, p in mu.atoms:
        if x > 1.0 and p != 0.0:
            out += _uniform_on(2.0 * (x - 1.0), 2.0 * p, B)
    return GridMeasure(out, [])


def _xlog_vec(beta: np.ndarray, s: np.ndarray) -> np.ndarray:
    # G(s) = s (log(beta / s) + 1), G(0) = 0; antiderivative of log(beta / s)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = s * (np.log(beta / np.where(s > 0, s, 1.0)) + 1.0)
    return np.where(s > 0, g, 0.0)


def apply_T(mu: GridMeasure) -> GridMeasure:
    u, v = apply_U(mu), apply_V(mu)
    return GridMeasure(u.bins + v.bins, u.atoms + v.atoms)


def apply_That(mu: GridMeasure) -> GridMeasure:
    """T normalised to a probability measure."""
    t = apply_T(mu)
    total = t.mass()
    if not total > 0.0:
        raise ZeroImageMass(f"image mass {total}")
    return t.scaled(1.0 / total)


def apply_Ttilde(mu: GridMeasure, C_star: float) -> GridMeasure:
    """T divided by 1 + C*, the normalisation that fixes f*."""
    return apply_T(mu).scaled(1.0 / (1.0 + C_star))


def delta_orbit(x: float, n: int, bins: int = 2**14) -> List[GridMeasure]:
    """[delta_x, That delta_x, ..., That^n delta_x]."""
    mu = delta(x, bins)
    out = [mu]
    for _ in range(n):
        mu = apply_That(mu)
        out.append(mu)
    return out


def distance_to_fstar(mu: GridMeasure, fstar: DensityCoeffs, lower: float = 0.05) -> float:
    """Sup over cells meeting [lower, 2] of |cell density - cell average of f*|."""
    if any(p != 0.0 for _, p in mu.atoms):
        raise AtomsPresent("distance is defined for absolutely continuous measures")
    edges = mu.edges()
    keep = edges[1:] > lower
    ref = np.diff(cdf(fstar, edges)) / mu.h
    return float(np.max(np.abs(mu.density()[keep] - ref[keep])))


def discretization_error(fstar: DensityCoeffs, bins: int, lower: float = 0.05) -> float:
    """Largest oscillation of f* over a single cell meeting [lower, 2]."""
    edges = np.linspace(0.0, 2.0, bins + 1)
    a = np.maximum(edges[:-1], lower * 0.5)
    keep = edges[1:] > lower
    fa = evaluate(fstar, a[keep])
    fb = evaluate(fstar, edges[1:][keep])
    return float(np.max(np.abs(fa - fb)))
