"""Simple random walk on the cylinder: paths, skeleton, local times, excursions.

A :class:`WalkRun` materialises the walk lazily in growing chunks drawn from
one generator, so every derived quantity (stopping times, skeleton, local
times, excursion schedule) is read off the same path.

Conventions
-----------
* ``rho_k`` are the times of vertical displacement, ``rho_0 = 0``, and
  ``Zhat_k = Z_{rho_k}``.
* ``Lhat_k^z = #{m < k : Zhat_m = z}`` counts strictly earlier skeleton visits.
* ``gamma_v^z = inf{rho_k : Lhat_k^z >= v}``, so ``gamma_0^z = 0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .lattice import Geometry, Point, encode_torus
from .rng import as_generator

INITIAL_CHUNK = 4096
MAX_CHUNK = 1 << 22

# status tags shared by all stopping-time routines
STOPPED = "stopped"
BUDGET = "budget"


def height_scales(N: int) -> tuple[int, int]:
    """Radii ``(r_N, h_N) = (N, floor(N (2 + (log N)^2)))``.

    >>> height_scales(3), height_scales(5)
    ((3, 9), (5, 22))
    """
    if N < 1:
        raise ValueError("N must be positive")
    return N, int(math.floor(N * (2.0 + math.log(N) ** 2)))


def default_budget(g: Geometry, multiplier: float = 64.0) -> int:
    """Step budget ``multiplier * N^{2d}``."""
    return int(multiplier * g.N ** (2 * g.d))


class WalkRun:
    """Lazily extended simple random walk path.

    Parameters
    ----------
    g : Geometry
    start : point
    rng : numpy.random.Generator or int, optional
    chunk : int
        Size of the first block of moves; later blocks double up to
        ``MAX_CHUNK``.

    Attributes
    ----------
    coords : numpy.ndarray
        Positions ``X_0, ..., X_n`` as an ``(n + 1, d + 1)`` integer array.
    """

    def __init__(self, g: Geometry, start: Point, rng=None, chunk: int = INITIAL_CHUNK):
        self.g = g
        self.rng = as_generator(rng)
        self._steps = g.step_table()
        self._buf = np.empty((max(chunk, 16) + 1, g.dim), dtype=np.int64)
        self._buf[0] = g.normalize(start)
        self._n = 1
        self._chunk = int(chunk)

    def __len__(self) -> int:
        return self._n

    @property
    def n_steps(self) -> int:
        return self._n - 1

    @property
    def coords(self) -> np.ndarray:
        return self._buf[: self._n]

    @property
    def z(self) -> np.ndarray:
        return self._buf[: self._n, -1]

    def y_flat(self) -> np.ndarray:
        """Flat torus index of each position (cylinder only)."""
        return encode_torus(self._buf[: self._n, :-1], self.g.N)

    def position(self, t: int) -> Point:
        self.extend_to(t)
        return tuple(int(c) for c in self._buf[t])

    def extend(self, k: int | None = None) -> None:
        """Append ``k`` steps (default: the next chunk size)."""
        if k is None:
            k = self._chunk
            self._chunk = min(2 * self._chunk, MAX_CHUNK)
        k = int(k)
        if k <= 0:
            return
        need = self._n + k
        if need > self._buf.shape[0]:
            cap = max(need, 2 * self._buf.shape[0])
            buf = np.empty((cap, self.g.dim), dtype=np.int64)
            buf[: self._n] = self._buf[: self._n]
            self._buf = buf
        moves = self.rng.integers(0, self.g.n_moves, size=k, dtype=np.uint8)
        block = self._buf[self._n: need]
        np.cumsum(self._steps[moves], axis=0, out=block)
        block += self._buf[self._n - 1]
        if self.g.is_cylinder:
            np.mod(block[:, :-1], self.g.N, out=block[:, :-1])
        self._n = need

    def extend_to(self, t: int) -> None:
        """Make sure positions up to time ``t`` exist."""
        while self._n <= t:
            self.extend(max(self._chunk, t + 1 - self._n))


@dataclass(frozen=True)
class StopOutcome:
    """Result of a stopping-time search; ``time`` is None on budget exhaustion."""

    time: int | None
    status: str

    @property
    def stopped(self) -> bool:
        return self.status == STOPPED


def run_until(run: WalkRun, stop: Callable[[np.ndarray, np.ndarray], np.ndarray],
              budget: int, t0: int = 0) -> StopOutcome:
    """First time ``t >= t0`` where ``stop(times, coords)`` is True.

    ``stop`` receives a block of times and the matching ``(m, d + 1)``
    coordinates and returns a boolean mask. The search gives up, with status
    ``"budget"``, once no stop is found up to time ``budget``.
    """
    t = int(t0)
    while True:
        if t > budget:
            return StopOutcome(None, BUDGET)
        run.extend_to(t)
        hi = min(len(run), budget + 1)
        if hi > t:
            mask = np.asarray(stop(np.arange(t, hi), run.coords[t:hi]), dtype=bool)
            if mask.any():
                return StopOutcome(t + int(np.argmax(mask)), STOPPED)
            t = hi
        if t > budget:
            return StopOutcome(None, BUDGET)
        run.extend()


def first_level_time(run: WalkRun, cond: Callable[[np.ndarray], np.ndarray],
                     budget: int, t0: int = 0) -> StopOutcome:
    """First time ``t >= t0`` at which ``cond(Z_t)`` holds."""
    return run_until(run, lambda _t, c: cond(c[:, -1]), budget, t0)


def hitting_time(run: WalkRun, U: Iterable[Point], budget: int, t0: int = 0,
                 strict: bool = False) -> StopOutcome:
    """Entrance time ``H_U`` (or the return time when ``strict``) after ``t0``."""
    codes = _codes(run.g, np.array(list(U), dtype=np.int64))
    start = t0 + 1 if strict else t0
    return run_until(run, lambda _t, c: np.isin(_codes(run.g, c), codes), budget, start)


def exit_time(run: WalkRun, U: Iterable[Point], budget: int, t0: int = 0) -> StopOutcome:
    """Exit time ``T_U`` after ``t0``."""
    codes = _codes(run.g, np.array(list(U), dtype=np.int64))
    return run_until(run, lambda _t, c: ~np.isin(_codes(run.g, c), codes), budget, t0)


def _codes(g: Geometry, pts: np.ndarray) -> np.ndarray:
    """Injective integer codes for points (used for set membership)."""
    pts = np.asarray(pts, dtype=np.int64).reshape(-1, g.dim)
    if g.is_cylinder:
        return pts[:, -1] * g.torus_size + encode_torus(pts[:, :-1], g.N)
    code = np.zeros(len(pts), dtype=np.int64)
    for j in range(g.dim):
        code = code * (1 << 21) + (pts[:, j] + (1 << 20))
    return code


# ---------------------------------------------------------------------------
# skeleton and local times


@dataclass(frozen=True)
class SkeletonRecord:
    """Vertical skeleton of a finite path.

    ``rho[k]`` and ``zhat[k]`` are known for the displacements that occurred
    within the materialised path.
    """

    rho: np.ndarray
    zhat: np.ndarray

    def __len__(self) -> int:
        return len(self.rho)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.rho)

    def local_time(self, k: int, z: int) -> int:
        """``Lhat_k^z``: skeleton visits to ``z`` with index below ``k``."""
        if k > len(self.zhat):
            raise ValueError("skeleton too short for this k")
        return int(np.count_nonzero(self.zhat[:k] == z))

    def local_times(self, k: int) -> dict[int, int]:
        levels, counts = np.unique(self.zhat[:k], return_counts=True)
        return {int(a): int(b) for a, b in zip(levels, counts)}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "rho", "zhat"])
            for k, (r, z) in enumerate(zip(self.rho, self.zhat)):
                w.writerow([k, int(r), int(z)])


def skeleton(run: WalkRun, upto: int | None = None) -> SkeletonRecord:
    """Skeleton of the path ``X_0, ..., X_upto`` (whole run by default)."""
    z = run.z if upto is None else run.z[: upto + 1]
    moves = np.flatnonzero(z[1:] != z[:-1]) + 1
    rho = np.concatenate(([0], moves)).astype(np.int64)
    return SkeletonRecord(rho, z[rho].copy())


def _ceil_threshold(v: float) -> int:
    return int(math.ceil(v - 1e-12)) if v > 0 else 0


def gamma(run: WalkRun, v: float, z: int, budget: int) -> StopOutcome:
    """``gamma_v^z``: first skeleton time when level ``z`` has local time ``>= v``."""
    need = _ceil_threshold(v)
    if need == 0:
        return StopOutcome(0, STOPPED)
    while True:
        sk = skeleton(run)
        occ = np.flatnonzero(sk.zhat == z)
        if len(occ) >= need:
            k = int(occ[need - 1]) + 1
            if k < len(sk.rho):
                t = int(sk.rho[k])
                return StopOutcome(t, STOPPED) if t <= budget else StopOutcome(None, BUDGET)
        if run.n_steps >= budget:
            return StopOutcome(None, BUDGET)
        run.extend()


def gamma_level(run: WalkRun, v: float, z: int, budget: int | None = None) -> StopOutcome:
    """:func:`gamma` with the default budget of the run's geometry."""
    return gamma(run, v, z, default_budget(run.g) if budget is None else int(budget))


def first_rank_hit(levels: np.ndarray, need: int) -> int | None:
    """Smallest index ``m`` such that ``levels[m]`` occurs ``need`` times in ``levels[:m+1]``."""
    if need <= 0:
        return None
    if len(levels) == 0:
        return None
    order = np.argsort(levels, kind="stable")
    s = levels[order]
    ar = np.arange(len(s))
    starts = np.empty(len(s), dtype=bool)
    starts[0] = True
    starts[1:] = s[1:] != s[:-1]
    rank = ar - np.maximum.accumulate(np.where(starts, ar, 0)) + 1
    hits = order[rank == need]
    return int(hits.min()) if hits.size else None


def inf_gamma(run: WalkRun, v: float, budget: int) -> StopOutcome:
    """``inf_z gamma_v^z``: first skeleton time some level has local time ``>= v``.

    Levels never visited have ``gamma = inf`` and do not affect the infimum,
    so the search is exact over all of ``Z``.
    """
    need = _ceil_threshold(v)
    if need == 0:
        return StopOutcome(0, STOPPED)
    while True:
        sk = skeleton(run)
        m = first_rank_hit(sk.zhat, need)
        if m is not None and m + 1 < len(sk.rho):
            t = int(sk.rho[m + 1])
            return StopOutcome(t, STOPPED) if t <= budget else StopOutcome(None, BUDGET)
        if run.n_steps >= budget:
            return StopOutcome(None, BUDGET)
        run.extend()


# ---------------------------------------------------------------------------
# excursions between level z and the boundary of the big box


@dataclass
class ExcursionSchedule:
    """Successive returns ``sigma_k`` and departures ``tau_k`` around level ``z``.

    ``sigma_0`` is the first visit of ``T x {z +- r}`` after reaching level
    ``z``; ``tau_k`` is the first exit of ``T x (z - h, z + h)`` after
    ``sigma_k``; ``sigma_{k+1}`` repeats the construction after ``tau_k``.
    ``H[k]`` is the first visit of level ``z`` after ``tau_{k-1}`` (after
    time 0 for ``k = 0``).
    """

    z: int
    r: int
    h: int
    sigma: list[int] = field(default_factory=list)
    tau: list[int] = field(default_factory=list)
    H: list[int] = field(default_factory=list)
    status: str = STOPPED

    @property
    def complete(self) -> bool:
        return self.status == STOPPED


def excursion_schedule(run: WalkRun, z: int, k_max: int, budget: int,
                       r: int | None = None, h: int | None = None) -> ExcursionSchedule:
    """Compute ``H_k, sigma_k, tau_k`` for ``k = 0..k_max`` on one path.

    Budget exhaustion returns a partial schedule with ``status == "budget"``.
    """
    r0, h0 = height_scales(run.g.N)
    r = r0 if r is None else int(r)
    h = h0 if h is None else int(h)
    if not 0 < r < h:
        raise ValueError("need 0 < r < h")
    sched = ExcursionSchedule(z, r, h)
    t = 0
    for _ in range(k_max + 1):
        hit = first_level_time(run, lambda zz: zz == z, budget, t)
        if not hit.stopped:
            sched.status = BUDGET
            return sched
        sig = first_level_time(run, lambda zz: np.abs(zz - z) == r, budget, hit.time)
        if not sig.stopped:
            sched.status = BUDGET
            return sched
        tau = first_level_time(run, lambda zz: np.abs(zz - z) >= h, budget, sig.time)
        if not tau.stopped:
            sched.status = BUDGET
            return sched
        sched.H.append(hit.time)
        sched.sigma.append(sig.time)
        sched.tau.append(tau.time)
        t = tau.time
    return sched


def visits_before(run: WalkRun, z: int, t: int) -> int:
    """``sum_l 1{Zhat_l = z, rho_l < t}``."""
    sk = skeleton(run, upto=min(t, run.n_steps))
    return int(np.count_nonzero((sk.zhat == z) & (sk.rho < t)))


def negative_binomial_pmf(count: np.ndarray, n: int, p: float) -> np.ndarray:
    """Law of a sum of ``n`` independent geometric variables on ``{1, 2, ...}``."""
    from scipy.stats import nbinom

    return nbinom.pmf(np.asarray(count) - n, n, p)


# ---------------------------------------------------------------------------
# single excursions and the entrance law


@dataclass(frozen=True)
class ExcursionPath:
    coords: np.ndarray
    status: str


def iid_excursion(z: int, g: Geometry, rng=None, budget: int | None = None,
                  r: int | None = None, h: int | None = None) -> ExcursionPath:
    """Walk from ``q_z`` (uniform on ``T x {z - r, z + r}``) until it leaves ``T x (z - h, z + h)``."""
    rng = as_generator(rng)
    r0, h0 = height_scales(g.N)
    r = r0 if r is None else r
    h = h0 if h is None else h
    budget = default_budget(g) if budget is None else budget
    y = rng.integers(0, g.N, size=g.d)
    zs = z + (r if rng.integers(0, 2) else -r)
    run = WalkRun(g, tuple(int(c) for c in y) + (int(zs),), rng, chunk=max(64, 4 * h * h))
    out = first_level_time(run, lambda zz: np.abs(zz - z) >= h, budget)
    if not out.stopped:
        return ExcursionPath(run.coords.copy(), BUDGET)
    return ExcursionPath(run.coords[: out.time + 1].copy(), STOPPED)


def entrance_law_mc(K: Sequence[Point], g: Geometry, n: int, rng=None) -> dict[Point, float]:
    """Empirical ``P_q[X_{H_K} = x, H_K < T]`` from ``n`` excursions around level 0."""
    rng = as_generator(rng)
    K = [g.normalize(p) for p in K]
    codes = _codes(g, np.array(K))
    hits = np.zeros(len(K))
    for _ in range(n):
        ex = iid_excursion(0, g, rng)
        c = _codes(g, ex.coords)
        where = np.flatnonzero(np.isin(c, codes))
        if where.size:
            hits[int(np.flatnonzero(codes == c[where[0]])[0])] += 1
    return {p: hits[i] / n for i, p in enumerate(K)}


# ---------------------------------------------------------------------------
# homogenisation of the horizontal component


@dataclass(frozen=True)
class HomogenizationResult:
    """Total variation between the law of ``X_sigma`` and ``q``.

    ``log_tv`` is the natural log of ``tv`` computed without underflow.
    For the Monte Carlo method ``noise_floor`` is the expected distance of an
    empirical measure drawn from ``q`` itself with the same sample size.
    """

    method: str
    tv: float
    log_tv: float
    std_error: float = 0.0
    noise_floor: float = 0.0
    samples: int = 0
    censored: int = 0


def _sigma_law_generating(s: np.ndarray, z0: int, r: int) -> np.ndarray:
    """Log of ``E[s^V]`` for ``V`` = vertical steps until ``sigma`` from height ``z0``.

    ``V`` is the hitting time of 0 from ``|z0|`` followed by the exit time of
    ``(-r, r)`` from 0 for simple random walk on ``Z``.
    """
    s = np.asarray(s, dtype=float)
    log_hit = abs(z0) * np.log((1.0 - np.sqrt(1.0 - s * s)) / s)
    a = np.arccosh(1.0 / s)
    log_exit = -(r * a + np.log1p(np.exp(-2 * r * a)) - np.log(2.0))
    return log_hit + log_exit


def homogenization_tv(x0: Point, g: Geometry, method: str = "torus-kernel",
                      samples: int = 10000, rng=None, budget: int | None = None,
                      r: int | None = None, h: int | None = None) -> HomogenizationResult:
    """Distance between the law of ``X_{sigma^0}`` under ``P_{x0}`` and ``q``.

    Parameters
    ----------
    x0 : point
        Start, with height outside ``(-h_N, h_N)``.
    method : {"torus-kernel", "mc"}
        ``"torus-kernel"`` is exact: given the number ``V`` of vertical steps,
        the horizontal step count is negative binomial, so Fourier mode ``k``
        of the torus walk is damped by ``E[psi_k^V]`` with
        ``psi_k = p / (1 - (1 - p) phi_k)``, ``p = 1/(d+1)``; this expectation
        has a closed form through the hitting-time generating functions.
        ``"mc"`` simulates the walk and compares the histogram with ``q``.
    """
    if not g.is_cylinder:
        raise ValueError("homogenisation is defined on the cylinder")
    r0, h0 = height_scales(g.N)
    r = r0 if r is None else r
    h = h0 if h is None else h
    x0 = g.normalize(x0)
    if abs(x0[-1]) < h:
        raise ValueError("start must lie outside the box of half-height h_N")
    N, d = g.N, g.d
    M = N ** d
    if method == "torus-kernel":
        p = 1.0 / (d + 1)
        ks = np.stack(np.meshgrid(*[np.arange(N)] * d, indexing="ij"), axis=-1).reshape(-1, d)
        phi = np.cos(2 * np.pi * ks / N).mean(axis=1)
        nonzero = (ks != 0).any(axis=1)
        psi = p / (1.0 - (1.0 - p) * phi[nonzero])
        logc = np.full(M, -np.inf)
        logc[nonzero] = _sigma_law_generating(psi, x0[-1], r)
        top = logc.max()
        if not np.isfinite(top):
            return HomogenizationResult(method, 0.0, -np.inf)
        coef = np.exp(logc - top).reshape((N,) * d)
        # deviation of the law of Y_sigma from uniform, up to the factor e^top
        dev = np.real(np.fft.ifftn(coef))
        shift = tuple(int(c) for c in x0[:-1])
        dev = np.roll(dev, shift, axis=tuple(range(d)))
        scaled = 0.5 * np.abs(dev).sum()
        log_tv = top + math.log(scaled) if scaled > 0 else -np.inf
        return HomogenizationResult(method, math.exp(log_tv) if log_tv > -700 else 0.0, log_tv)
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    rng = as_generator(rng)
    budget = default_budget(g) if budget is None else budget
    y0 = int(encode_torus(np.array(x0[:-1]), N))
    counts = np.zeros(2 * M)
    censored = 0
    big = np.iinfo(np.int64).max
    for _ in range(samples):
        state = np.array([y0, x0[-1]], dtype=np.int64)
        used_total = 0
        ok = True
        for lo, hi in ((0, big) if x0[-1] > 0 else (-big, 0), (-r, r)):
            while True:
                if used_total >= budget:
                    ok = False
                    break
                block = rng.integers(0, 2 * d + 2, size=min(65536, budget - used_total), dtype=np.uint8)
                used, status = kernels.cylinder_slab_exit(state, block, N, d, lo, hi)
                used_total += used
                if status == 1:
                    break
            if not ok:
                break
        if not ok:
            censored += 1
            continue
        counts[int(state[0]) + (M if state[1] > 0 else 0)] += 1
    n = samples - censored
    phat = counts / max(n, 1)
    tv = 0.5 * np.abs(phat - 1.0 / (2 * M)).sum()
    floor_draws = rng.multinomial(max(n, 1), np.full(2 * M, 1.0 / (2 * M)), size=200) / max(n, 1)
    floors = 0.5 * np.abs(floor_draws - 1.0 / (2 * M)).sum(axis=1)
    return HomogenizationResult("mc", float(tv), math.log(tv) if tv > 0 else -np.inf,
                                std_error=float(floors.std()), noise_floor=float(floors.mean()),
                                samples=n, censored=censored)
