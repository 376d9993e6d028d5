"""Disconnection time of the cylinder by the trace of the walk.

``T_N = inf{n : X[0, n] disconnects T x Z}``: the two ends of the cylinder
lie in different components of the complement of the trace. Every vertex of
the trace lies in the slab ``T x [z_min, z_max]`` spanned by the heights
visited, so it is enough to search the slab ``T x [z_min - 1, z_max + 1]``
from its top layer to its bottom layer (both are trace-free).

The fast path builds a first-visit-time grid once per horizon and then
decides "does ``X[0, n]`` disconnect?" for any ``n`` by a breadth-first
search through cells first visited after ``n``. Horizons double until the
trace disconnects, then a binary search pins down ``T_N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .lattice import Geometry, Point, encode_torus
from .rng import as_generator
from .walk import WalkRun, default_budget

NEVER = np.iinfo(np.int64).max


@dataclass(frozen=True)
class DisconnectionResult:
    """Disconnection time of one path, or a censored lower bound.

    ``time`` equals ``T_N`` when ``censored`` is False; otherwise the trace
    did not disconnect within ``budget`` steps and ``time`` is None.
    """

    N: int
    d: int
    time: int | None
    censored: bool
    budget: int
    probes: int = 0

    @property
    def scaled(self) -> float | None:
        """``T_N / N^{2d}``."""
        return None if self.time is None else self.time / self.N ** (2 * self.d)


def _grid_from_cells(g: Geometry, z: np.ndarray, y: np.ndarray, times: np.ndarray):
    """First-visit grid over ``T x [min z - 1, max z + 1]``."""
    M = g.torus_size
    base = int(z.min()) - 1
    rows = int(z.max()) - base + 2
    codes = (z - base) * M + y
    fv = np.full(rows * M, NEVER, dtype=np.int64)
    uniq, first = np.unique(codes, return_index=True)
    fv[uniq] = times[first]
    return fv.reshape(rows, M), base


def disconnects(S: Iterable[Point], g: Geometry) -> bool:
    """Whether removing the finite set ``S`` separates the two ends of the cylinder."""
    if not g.is_cylinder:
        raise ValueError("disconnection is defined on the cylinder")
    pts = np.array([g.normalize(p) for p in S], dtype=np.int64).reshape(-1, g.dim)
    if len(pts) == 0:
        return False
    fv, _ = _grid_from_cells(g, pts[:, -1], encode_torus(pts[:, :-1], g.N),
                             np.zeros(len(pts), dtype=np.int64))
    return not kernels.slab_crossing(fv, 0, g.N, g.d)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def disconnects_unionfind(S: Iterable[Point], g: Geometry) -> bool:
    """Reference implementation of :func:`disconnects` with a union-find over the slab."""
    S = {g.normalize(p) for p in S}
    if not S:
        return False
    zs = [p[-1] for p in S]
    lo, hi = min(zs) - 1, max(zs) + 1
    cells = [p for p in g.slab(lo, hi) if p not in S]
    index = {p: i for i, p in enumerate(cells)}
    uf = _UnionFind(len(cells))
    for p, i in index.items():
        for q in g.neighbors(p):
            j = index.get(q)
            if j is not None:
                uf.union(i, j)
    top = uf.find(index[g.layer(hi)[0]])
    bottom = uf.find(index[g.layer(lo)[0]])
    return top != bottom


class _Prober:
    """Answers "does X[0, n] disconnect?" for ``n`` up to a fixed horizon."""

    def __init__(self, run: WalkRun, horizon: int):
        g = run.g
        self.g = g
        z = run.z[: horizon + 1]
        y = run.y_flat()[: horizon + 1]
        self.fv, self.base = _grid_from_cells(g, z, y, np.arange(horizon + 1, dtype=np.int64))
        self.zmin = np.minimum.accumulate(z)
        self.zmax = np.maximum.accumulate(z)
        self.calls = 0

    def __call__(self, n: int) -> bool:
        self.calls += 1
        a = int(self.zmin[n]) - 1 - self.base
        b = int(self.zmax[n]) + 1 - self.base
        sub = self.fv[a: b + 1]
        return not kernels.slab_crossing(sub, n, self.g.N, self.g.d)


def disconnection_time(g: Geometry, rng=None, budget: int | None = None,
                       start: Point | None = None, run: WalkRun | None = None) -> DisconnectionResult:
    """``T_N`` of one path by horizon doubling and binary search.

    Parameters
    ----------
    g : Geometry
        Cylinder.
    rng : Generator or int, optional
    budget : int, optional
        Step budget; defaults to ``64 N^{2d}``. Exhaustion is reported as a
        censored result, not raised.
    start : point, optional
        Defaults to the origin.
    run : WalkRun, optional
        Reuse an existing path (it is extended as needed).
    """
    if not g.is_cylinder:
        raise ValueError("disconnection is defined on the cylinder")
    budget = default_budget(g) if budget is None else int(budget)
    if run is None:
        start = (0,) * g.dim if start is None else start
        run = WalkRun(g, start, as_generator(rng))
    if g.torus_size == 1:
        return DisconnectionResult(g.N, g.d, 0, False, budget)
    lo = -1
    H = min(max(g.N ** (2 * g.d), 1), budget)
    probes = 0
    while True:
        run.extend_to(H)
        probe = _Prober(run, H)
        if probe(H):
            hi = H
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if probe(mid):
                    hi = mid
                else:
                    lo = mid
            return DisconnectionResult(g.N, g.d, hi, False, budget, probes + probe.calls)
        probes += probe.calls
        lo = H
        if H >= budget:
            return DisconnectionResult(g.N, g.d, None, True, budget, probes)
        H = min(2 * H, budget)


def disconnection_time_scan(run: WalkRun, budget: int) -> int | None:
    """Reference ``T_N`` by checking every prefix of ``run`` in turn.

    Only prefixes that add a new vertex can change the answer, so only those
    are tested. Returns None when the budget is exhausted.
    """
    g = run.g
    if g.torus_size == 1:
        return 0
    seen: set[Point] = set()
    for n in range(budget + 1):
        run.extend_to(n)
        p = tuple(int(c) for c in run.coords[n])
        if p in seen:
            continue
        seen.add(p)
        if disconnects(seen, g):
            return n
    return None


@dataclass
class TNDistribution:
    """Empirical law of ``T_N / N^{2d}`` over independent replicates.

    Censored replicates are kept and count as ``+inf`` in quantiles and
    tails, so both are conservative lower bounds.
    """

    N: int
    d: int
    results: list[DisconnectionResult]
    seeds: list[int]

    @property
    def scaled(self) -> np.ndarray:
        return np.array([np.inf if r.censored else r.scaled for r in self.results])

    @property
    def censored(self) -> int:
        return sum(r.censored for r in self.results)

    def quantile(self, q) -> np.ndarray:
        return np.quantile(self.scaled, q, method="inverted_cdf")

    def tail(self, s) -> tuple[np.ndarray, np.ndarray]:
        """``P[T_N >= s N^{2d}]`` and its binomial standard error."""
        x = self.scaled
        s = np.atleast_1d(np.asarray(s, dtype=float))
        p = (x[None, :] >= s[:, None]).mean(axis=1)
        return p, np.sqrt(p * (1 - p) / len(x))

    def rows(self) -> list[dict]:
        """CSV rows ``seed, N, d, T_N, T_N/N^{2d}, censored`` sorted by the scaled time."""
        out = [{"seed": sd, "N": self.N, "d": self.d, "T_N": r.time if r.time is not None else "",
                "T_N/N^{2d}": r.scaled if r.scaled is not None else "", "censored": int(r.censored)}
               for sd, r in zip(self.seeds, self.results)]
        return sorted(out, key=lambda row: (row["censored"], row["T_N/N^{2d}"] or 0.0))


def tn_distribution(g: Geometry, replicates: int, seed: int = 0,
                    budget_multiplier: float = 64.0) -> TNDistribution:
    """``T_N`` on ``replicates`` independent paths from the origin.

    Replicate ``i`` uses the stream ``(seed, "disconnect-N{N}-d{d}", i)`` so
    adding replicates never changes earlier ones.
    """
    from .rng import replicate_seed, stream

    if g.d < 2:
        raise ValueError("the disconnection-time law is studied for d >= 2")
    budget = default_budget(g, budget_multiplier)
    name = f"disconnect-N{g.N}-d{g.d}"
    results, seeds = [], []
    for i in range(replicates):
        results.append(disconnection_time(g, stream(seed, name, i), budget))
        seeds.append(replicate_seed(seed, name, i))
    return TNDistribution(g.N, g.d, results, seeds)
