"""Monte Carlo simulation of random sequential adsorption with shrinking cars.

Stage 1 parks cars of length 2 on [0, L] until no gap of length >= 2
remains (Renyi's parking problem).  Stage s >= 2 then parks cars of length
2^(2-s) in the gaps left over, again until jammed.  Because every gap
left by stage s is shorter than twice the next car, later stages place at
most one car per gap, and that single placement is vectorised.

Random numbers come from numpy's counter-based Philox generator.  Each
(stage, round) pair gets its own stream derived from the run seed through
``SeedSequence``, so results do not depend on how work is scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import DensityCoeffs, cdf

RENYI_CONSTANT = 0.7475979202534114  # literature value of Renyi's parking constant


class InsufficientSamples(ValueError):
    pass


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def _jam_array(lengths: np.ndarray, c: float, seed: int, stage: int):
    """Jam every segment in ``lengths`` with cars of length c.

    Breadth-first over an explicit work list: each round places one car in
    every segment that can still hold one and splits it in two.  Returns
    (gaps, cars placed).
    """
    pending = np.asarray(lengths, dtype=float)
    done = []
    cars = 0
    rnd = 0
    while pending.size:
        fits = pending >= c
        done.append(pending[~fits])
        seg = pending[fits]
        if not seg.size:
            break
        free = seg - c
        left = stream(seed, stage, rnd).random(seg.size) * free
        right = free - left
        cars += seg.size
        pending = np.concatenate((left, right))
        rnd += 1
    gaps = np.concatenate(done) if done else np.empty(0)
    return gaps[gaps > 0.0], cars


def jam(length: float, car: float, seed: int = 0, stage: int = 1):
    """Gaps left after jamming [0, length] with cars of length ``car``."""
    if car <= 0 or length < 0:
        raise ValueError("car length must be positive and the interval non-negative")
    return _jam_array(np.array([float(length)]), float(car), seed, stage)


def renyi_fraction(length: float, seed: int = 0) -> float:
    """Covered fraction after jamming [0, length] with unit cars."""
    _, cars = jam(length, 1.0, seed)
    return cars / length


def renyi_trials(length: float, trials: int, seed: int = 0, threads: Optional[int] = None) -> np.ndarray:
    if threads is None:
        threads = int(os.environ.get("RENYI_THREADS", "1"))
    seeds = [seed + k for k in range(trials)]
    if threads <= 1:
        return np.array([renyi_fraction(length, s) for s in seeds])
    with ThreadPoolExecutor(threads) as ex:
        return np.array(list(ex.map(lambda s: renyi_fraction(length, s), seeds)))


@dataclass
class StageStats:
    stage: int
    car_length: float
    uncovered: float
    gap_count: int
    ratio: float  # uncovered / uncovered at the previous stage (nan at stage 1)
    gaps: Optional[np.ndarray] = None

    def row(self) -> dict:
        return {
            "stage": self.stage,
            "car_length": self.car_length,
            "gap_count": self.gap_count,
            "uncovered": self.uncovered,
            "ratio": self.ratio,
        }


def run_stages(length: float, n_stages: int, seed: int = 0, keep_gaps: bool = False) -> list:
    if n_stages < 1:
        raise ValueError("need at least one stage")
    gaps = np.array([float(length)])
    prev = float(length)
    out = []
    for s in range(1, n_stages + 1):
        car = 2.0 ** (2 - s)
        gaps, _ = _jam_array(gaps, car, seed, s)
        unc = float(gaps.sum())
        ratio = unc / prev if s > 1 else float("nan")
        out.append(StageStats(s, car, unc, int(gaps.size), ratio, gaps.copy() if keep_gaps else None))
        prev = unc
    return out


def empirical_gap_density(stats: StageStats, bins: int = 200, fstar: Optional[DensityCoeffs] = None,
                          lower: float = 0.1, min_samples: int = 100_000):
    """Histogram of gap lengths rescaled to (0, 2] by 2^(s-1).

    Returns (density, edges, sup distance to f* on cells above ``lower``);
    the distance is None when no f* is given.
    """
    if stats.gaps is None or stats.gaps.size < min_samples:
        n = 0 if stats.gaps is None else stats.gaps.size
        raise InsufficientSamples(f"{n} gaps, need {min_samples}")
    x = stats.gaps * 2.0 ** (stats.stage - 1)
    hist, edges = np.histogram(x, bins=bins, range=(0.0, 2.0), density=True)
    dist = None
    if fstar is not None:
        ref = np.diff(cdf(fstar, edges)) / np.diff(edges)
        keep = edges[:-1] >= lower
        dist = float(np.max(np.abs(hist[keep] - ref[keep])))
    return hist, edges, dist
