"""Finite-size crossing estimates for the vacant set of random interlacements.

For each sample the cloud is drawn once at the top level ``u_max`` and
summarised by its *label field*: the smallest label of a trajectory visiting
each site of the window. The vacant set at any ``u <= u_max`` is then
``{label > u}``, so all levels share one sample (coupling by labels) and
crossing events are monotone in ``u`` sample by sample.

The critical-level estimates built here (``u_**`` from crossing decay
exponents, ``u_*`` from a one-arm proxy) are heuristic brackets at the
simulated scales, not consistent estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import ndimage, stats

from .interlace import CloudSampler, InterlacementSample, equilibrium_box
from .lattice import BoxSpec
from .rng import stream

CAVEAT = ("finite-size heuristic: brackets the level where crossing decay becomes "
          "detectable at the simulated scales; not a consistent estimate of the critical level")

_SIX = ndimage.generate_binary_structure(3, 1)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class CrossingEstimate:
    """Proportion of samples in which an event occurred, with a 95% Wilson interval."""

    u: float
    L: int
    hits: int
    samples: int

    @property
    def p(self) -> float:
        return self.hits / self.samples if self.samples else float("nan")

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.samples)


@lru_cache(maxsize=8)
def _box_sampler(radius: int, guard: int | None, dim: int = 3) -> CloudSampler:
    K = list(BoxSpec((0,) * dim, radius).points())
    return CloudSampler(K, guard_radius=guard, eq=equilibrium_box(radius, dim))


def label_field(sample: InterlacementSample) -> np.ndarray:
    """Smallest trajectory label visiting each site of the record box (``inf`` if none)."""
    box = BoxSpec((0,) * sample.dim, sample.record_radius)
    fieldv = np.full(box.size, np.inf)
    for t in sample.trajectories:
        idx = box.index(t.rec_pos)
        fieldv[idx] = np.minimum(fieldv[idx], t.label)
    return fieldv.reshape(box.shape)


def _crosses(vacant: np.ndarray, inner: int) -> bool:
    """Does a vacant cluster join the inner box ``B(0, inner)`` to the outer face?"""
    lab, n = ndimage.label(vacant, structure=_SIX)
    if n == 0:
        return False
    R = (vacant.shape[0] - 1) // 2
    lo, hi = R - inner, R + inner + 1
    core = np.unique(lab[lo:hi, lo:hi, lo:hi])
    faces = np.unique(np.concatenate([lab[0].ravel(), lab[-1].ravel(), lab[:, 0].ravel(),
                                      lab[:, -1].ravel(), lab[:, :, 0].ravel(), lab[:, :, -1].ravel()]))
    common = np.intersect1d(core, faces)
    return bool(np.any(common > 0))


def _arm_length(vacant: np.ndarray) -> int:
    """Sup-norm reach of the vacant cluster of the origin (-1 if occupied)."""
    R = (vacant.shape[0] - 1) // 2
    if not vacant[R, R, R]:
        return -1
    lab, _ = ndimage.label(vacant, structure=_SIX)
    idx = np.argwhere(lab == lab[R, R, R]) - R
    return int(np.abs(idx).max())


@dataclass
class CrossingSamples:
    """Frozen label fields for the crossing event ``B(0, L) <-> S(0, 2L)``."""

    L: int
    u_max: float
    fields: list[np.ndarray]
    seed: int
    seeds: list[int] = field(default_factory=list)

    def estimate(self, u: float) -> CrossingEstimate:
        if u > self.u_max + 1e-12:
            raise ValueError("u exceeds the sampled level")
        hits = sum(_crosses(f > u, self.L) for f in self.fields)
        return CrossingEstimate(float(u), self.L, int(hits), len(self.fields))


def crossing_samples(L: int, u_max: float, samples: int, seed: int = 0,
                     guard: int | None = None) -> CrossingSamples:
    """Draw ``samples`` clouds on ``B(0, 2L)`` in ``Z^3`` at level ``u_max``."""
    sampler = _box_sampler(2 * L, guard)
    fields = []
    for i in range(samples):
        s = sampler.sample(u_max, stream(seed, f"crossing-L{L}", i))
        fields.append(label_field(s))
    return CrossingSamples(L, float(u_max), fields, seed, list(range(samples)))


def crossing_probability(u: float, L: int, samples: int, seed: int = 0) -> CrossingEstimate:
    """``P[B(0, L) <-> S(0, 2L) in V^u]`` with a Wilson interval."""
    return crossing_samples(L, u, samples, seed).estimate(u)


@dataclass(frozen=True)
class AlphaFit:
    """Fit of ``-log p(L) = alpha log L + c`` across scales.

    ``degenerate`` marks fits where some scale had no crossing (a
    continuity correction of ``1/(2n)`` is used there). ``nonlinear`` marks a
    goodness-of-fit p-value below 0.01.
    """

    u: float
    alpha: float
    std_error: float
    intercept: float
    gof_pvalue: float
    degenerate: bool
    nonlinear: bool
    points: tuple[CrossingEstimate, ...]


def alpha_fit(points: Sequence[CrossingEstimate]) -> AlphaFit:
    """Weighted least squares of ``-log p`` on ``log L``."""
    if len(points) < 2:
        raise ValueError("need at least two scales")
    u = points[0].u
    Ls = np.array([p.L for p in points], dtype=float)
    n = np.array([p.samples for p in points], dtype=float)
    k = np.array([p.hits for p in points], dtype=float)
    degenerate = bool(np.any(k == 0) or np.any(k == n))
    phat = np.clip(k, 0.5, n - 0.5) / n
    y = -np.log(phat)
    var = (1 - phat) / (n * phat)
    w = 1.0 / var
    X = np.stack([np.log(Ls), np.ones_like(Ls)], axis=1)
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    resid = y - X @ beta
    chi2 = float((w * resid ** 2).sum())
    dof = len(points) - 2
    pval = float(stats.chi2.sf(chi2, dof)) if dof > 0 else 1.0
    return AlphaFit(float(u), float(beta[0]), float(math.sqrt(cov[0, 0])), float(beta[1]), pval,
                    degenerate, pval < 0.01, tuple(points))


@dataclass
class UStarStarEstimate:
    """Bracket ``[lo, hi]`` for the level where crossing decay becomes significant."""

    interval: tuple[float, float]
    z: float
    fits: list[AlphaFit]
    caveat: str = CAVEAT

    @property
    def upper(self) -> float:
        return self.interval[1]


def ustarstar_estimate(u_grid: Sequence[float], scales: Sequence[int] = (2, 4, 8),
                       samples: int = 200, seed: int = 0, z: float = 2.0,
                       bisection_steps: int = 6, guard: int | None = None) -> UStarStarEstimate:
    """Locate the smallest ``u`` with ``alpha_hat(u) - z * se > 0``.

    One frozen set of coupled samples per scale serves every level, so the
    bisection between grid points costs only re-thresholding.
    """
    grid = sorted(float(u) for u in u_grid)
    frozen = [crossing_samples(L, grid[-1], samples, seed, guard) for L in scales]

    def fit_at(u: float) -> AlphaFit:
        return alpha_fit([f.estimate(u) for f in frozen])

    def ok(f: AlphaFit) -> bool:
        return f.alpha - z * f.std_error > 0

    fits = [fit_at(u) for u in grid]
    flags = [ok(f) for f in fits]
    if not any(flags):
        return UStarStarEstimate((grid[-1], math.inf), z, fits)
    j = flags.index(True)
    if j == 0:
        return UStarStarEstimate((0.0, grid[0]), z, fits)
    lo, hi = grid[j - 1], grid[j]
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        f = fit_at(mid)
        fits.append(f)
        if ok(f):
            hi = mid
        else:
            lo = mid
    fits.sort(key=lambda f: f.u)
    return UStarStarEstimate((lo, hi), z, fits)


@dataclass
class EtaSamples:
    """Frozen one-arm reaches of the origin's vacant cluster in ``B(0, L_max)``."""

    L_max: int
    u_max: float
    fields: list[np.ndarray]

    def estimate(self, u: float, L: int) -> CrossingEstimate:
        if L > self.L_max:
            raise ValueError("L exceeds the sampled window")
        hits = sum(_arm_length(f > u) >= L for f in self.fields)
        return CrossingEstimate(float(u), int(L), int(hits), len(self.fields))


def eta_samples(L_max: int, u_max: float, samples: int, seed: int = 0,
                guard: int | None = None) -> EtaSamples:
    sampler = _box_sampler(L_max, guard)
    fields = [label_field(sampler.sample(u_max, stream(seed, f"eta-L{L_max}", i)))
              for i in range(samples)]
    return EtaSamples(L_max, float(u_max), fields)


def eta_proxy(u: float, L: int, samples: int, seed: int = 0) -> CrossingEstimate:
    """``P[0 <-> S(0, L) in V^u]``; nonincreasing in ``L`` sample by sample."""
    return eta_samples(L, u, samples, seed).estimate(u, L)


def ustar_proxy(u_grid: Sequence[float], scales: Sequence[int] = (2, 4, 8), samples: int = 200,
                seed: int = 0, floor: float = 0.01) -> tuple[float | None, list[CrossingEstimate]]:
    """Largest grid level whose one-arm proxy stays above ``floor`` at every scale.

    "Above" means the lower Wilson bound exceeds ``floor``.
    """
    grid = sorted(float(u) for u in u_grid)
    frozen = eta_samples(max(scales), grid[-1], samples, seed)
    table = [frozen.estimate(u, L) for u in grid for L in scales]
    best = None
    for u in grid:
        if all(e.ci[0] > floor for e in table if e.u == u):
            best = u
    return best, table
