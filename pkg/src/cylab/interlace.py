"""Random interlacements on ``Z^D`` seen from a finite set ``K``.

The trajectories of the interlacement at levels ``<= u_max`` that meet ``K``
form a Poisson cloud: their number is Poisson with mean ``u_max cap(K)``,
each starts from the normalised equilibrium measure ``e_K / cap(K)`` and
carries a label uniform on ``[0, u_max]``. Occupancy at level ``u`` keeps
the trajectories with label ``<= u``, which couples all levels monotonically.

Each forward path is simulated until it leaves a guard box. At the exit
point ``y`` the walk would return to ``K`` with probability
``p(y) = sum_x g(y - x) e_K(x)``. With ``reinject=True`` the sampler flips
that coin and, on success, restarts the path at ``x`` drawn with weight
``e_K(x) g(y - x)``. The return probability is exact up to the asymptotic
Green function. The entrance point is exact to first order in
``radius(K) / guard``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .lattice import BoxSpec, Point
from .potential import (CapacityResult, DiscreteMeasure, equilibrium_lattice,
                        lattice_green, lattice_green_asymptotic, return_bound)
from .rng import as_generator

CHUNK = 4096


# ---------------------------------------------------------------------------
# equilibrium measures of boxes (symmetry reduced)


def _orbit_key(p: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(p), axis=-1)


def equilibrium_box(radius: int, dim: int = 3) -> CapacityResult:
    """Exact equilibrium measure of the box ``B(0, radius)`` in ``Z^dim``.

    ``e`` vanishes off the outer face layer and is constant on orbits of the
    cube symmetry group, which reduces the Green-matrix system to one
    equation per orbit.
    """
    if radius == 0:
        return equilibrium_lattice([(0,) * dim])
    box = BoxSpec((0,) * dim, radius)
    pts = box.points_array()
    face = pts[np.abs(pts).max(axis=1) == radius]
    keys = _orbit_key(face)
    reps, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    # A[i, o] = sum over face points y in orbit o of g(rep_i - y)
    diff = _orbit_key(reps[:, None, :] - face[None, :, :]).reshape(-1, dim)
    uniq, dinv = np.unique(diff, axis=0, return_inverse=True)
    gvals = lattice_green(uniq, dim)[dinv.ravel()].reshape(len(reps), len(face))
    A = np.zeros((len(reps), len(reps)))
    for o in range(len(reps)):
        A[:, o] = gvals[:, inv == o].sum(axis=1)
    e_orbit = np.linalg.solve(A, np.ones(len(reps)))
    support = tuple(tuple(int(c) for c in p) for p in face)
    return CapacityResult(DiscreteMeasure(support, e_orbit[inv]), "exact-solve")


def _support(eq: CapacityResult) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(eq.measure.weights, dtype=float)
    keep = w > 0
    pts = np.array(eq.measure.support, dtype=np.int64)[keep]
    return pts, w[keep]


# ---------------------------------------------------------------------------
# sampling


@dataclass
class Trajectory:
    """One interlacement trajectory that meets ``K``.

    ``rec_t``/``rec_pos`` list the visits inside the record box; ``seg_start``
    gives the index in those arrays where each segment begins. Times are
    step counts along the simulated segments. After a reinjection they are
    ordinal only, because the skipped excursion outside the guard is not
    simulated.
    """

    label: float
    start: Point
    rec_t: np.ndarray
    rec_pos: np.ndarray
    seg_start: np.ndarray
    segment_starts: list[Point] = field(default_factory=list)
    segment_moves: list[np.ndarray] = field(default_factory=list)
    reinjections: int = 0
    truncated: bool = True

    def first_segment(self) -> slice:
        end = int(self.seg_start[1]) if len(self.seg_start) > 1 else len(self.rec_t)
        return slice(0, end)


@dataclass
class InterlacementSample:
    """Poisson cloud of labelled trajectories meeting ``K``."""

    K: tuple[Point, ...]
    u_max: float
    cap: float
    guard: int
    record_radius: int
    return_bound: float
    reinject: bool
    trajectories: list[Trajectory]
    seed: int | None = None

    @property
    def dim(self) -> int:
        return len(self.K[0])

    def labels(self) -> np.ndarray:
        return np.array([t.label for t in self.trajectories])

    def to_json(self) -> str:
        """Serialise window, labels, starts and paths (moves as digit strings)."""
        return json.dumps({
            "window": [list(p) for p in self.K],
            "u_max": self.u_max,
            "cap": self.cap,
            "guard": self.guard,
            "record_radius": self.record_radius,
            "seed": self.seed,
            "trajectories": [
                {
                    "label": t.label,
                    "start": list(t.start),
                    "segments": [
                        {"start": list(s), "moves": "".join(map(str, m.tolist()))}
                        for s, m in zip(t.segment_starts, t.segment_moves)
                    ],
                }
                for t in self.trajectories
            ],
        })


class CloudSampler:
    """Reusable sampler for clouds on a fixed ``K``.

    Parameters
    ----------
    K : sequence of points
        Finite set in ``Z^D``, ``D >= 3``.
    guard_radius : int, optional
        Sup-norm radius of the guard box. Defaults to
        ``max(2 * radius(K) + 6, record_radius + 2)``.
    record_radius : int, optional
        Visits inside ``B(0, record_radius)`` are recorded; defaults to the
        radius of ``K``.
    eq : CapacityResult, optional
        Equilibrium measure of ``K``; computed exactly when omitted.
    reinject : bool
        Resample returns to ``K`` after a guard exit (see module notes).
    keep_moves : bool
        Store move strings for serialisation.
    """

    def __init__(self, K: Iterable[Point], guard_radius: int | None = None,
                 record_radius: int | None = None, eq: CapacityResult | None = None,
                 reinject: bool = True, keep_moves: bool = False):
        self.K = tuple(tuple(int(c) for c in p) for p in K)
        pts = np.array(self.K, dtype=np.int64)
        self.dim = pts.shape[1]
        if self.dim < 3:
            raise ValueError("interlacements need a transient lattice (D >= 3)")
        self.rK = int(np.abs(pts).max())
        self.record_radius = self.rK if record_radius is None else int(record_radius)
        if self.record_radius < self.rK:
            raise ValueError("record box must contain K")
        if guard_radius is None:
            guard_radius = max(2 * self.rK + 6, self.record_radius + 2)
        self.guard = int(guard_radius)
        if self.guard < self.record_radius:
            raise ValueError("guard box must contain the record box")
        self.eq = equilibrium_lattice(self.K) if eq is None else eq
        self.cap = float(self.eq.value)
        self.e_pts, self.e_w = _support(self.eq)
        self.e_prob = self.e_w / self.e_w.sum()
        self.reinject = reinject
        self.keep_moves = keep_moves
        self.return_bound = return_bound(self.K, self.guard)
        self._mask = np.zeros(1, dtype=np.uint8)

    def _walk(self, start: np.ndarray, rng: np.random.Generator):
        D = self.dim
        pos = start.astype(np.int64).copy()
        cap = CHUNK + 1
        rec_t = np.empty(cap, dtype=np.int64)
        rec_pos = np.empty((cap, D), dtype=np.int64)
        rec_t[0] = 0
        rec_pos[0] = pos
        n_rec = 1
        seg_start = [0]
        seg_points = [tuple(int(c) for c in pos)]
        seg_moves: list[np.ndarray] = []
        cur_moves: list[np.ndarray] = []
        t = 0
        reinj = 0
        while True:
            moves = rng.integers(0, 2 * D, size=CHUNK, dtype=np.uint8)
            if n_rec + CHUNK + 1 > rec_t.shape[0]:
                cap = 2 * rec_t.shape[0] + CHUNK
                rec_t = np.resize(rec_t, cap)
                rec_pos = np.resize(rec_pos, (cap, D))
            used, status, n_rec = kernels.lattice_walk(
                pos, moves, self.guard, self.record_radius, self._mask, False, t,
                rec_t, rec_pos, n_rec)
            t += used
            if self.keep_moves:
                cur_moves.append(moves[:used].copy())
            if status != 1:
                continue
            if self.keep_moves:
                seg_moves.append(np.concatenate(cur_moves))
                cur_moves = []
            if not self.reinject:
                break
            gy = lattice_green_asymptotic(pos[None, :] - self.e_pts, D)
            wts = self.e_w * gy
            if rng.random() >= wts.sum():
                break
            x = self.e_pts[rng.choice(len(wts), p=wts / wts.sum())]
            reinj += 1
            pos = x.astype(np.int64).copy()
            t += 1
            rec_t[n_rec] = t
            rec_pos[n_rec] = pos
            seg_start.append(n_rec)
            seg_points.append(tuple(int(c) for c in pos))
            n_rec += 1
        return (rec_t[:n_rec].copy(), rec_pos[:n_rec].copy(), np.array(seg_start),
                seg_points, seg_moves, reinj)

    def sample(self, u_max: float, rng=None, n: int | None = None) -> InterlacementSample:
        """Draw one cloud of trajectories with labels in ``[0, u_max]``."""
        rng = as_generator(rng)
        if n is None:
            n = int(rng.poisson(u_max * self.cap))
        labels = rng.uniform(0.0, u_max, size=n)
        starts = self.e_pts[rng.choice(len(self.e_prob), size=n, p=self.e_prob)] if n else []
        trajs = []
        for lab, st in zip(labels, starts):
            rt, rp, ss, sp_, sm, rj = self._walk(st, rng)
            trajs.append(Trajectory(float(lab), tuple(int(c) for c in st), rt, rp, ss,
                                    sp_, sm, rj))
        return InterlacementSample(self.K, float(u_max), self.cap, self.guard,
                                   self.record_radius, self.return_bound, self.reinject, trajs)


def sample_cloud(K: Iterable[Point], u_max: float, guard_radius: int | None = None,
                 rng=None, **kwargs) -> InterlacementSample:
    """One-shot convenience wrapper around :class:`CloudSampler`."""
    return CloudSampler(K, guard_radius, **kwargs).sample(u_max, rng)


# ---------------------------------------------------------------------------
# occupancy fields


@dataclass(frozen=True)
class OccupancyField:
    """Occupied sites of a window at level ``u`` (dense grid over ``box``)."""

    box: BoxSpec
    occupied: np.ndarray
    window: np.ndarray
    u: float

    def vacant(self) -> np.ndarray:
        return self.window & ~self.occupied

    def is_vacant(self, points: Iterable[Point]) -> bool:
        """Whether every point of ``points`` (inside the window) is vacant."""
        idx = self.box.index(np.array(list(points), dtype=np.int64))
        flat_w = self.window.ravel()
        if not flat_w[idx].all():
            raise ValueError("points must lie in the window")
        return not self.occupied.ravel()[idx].any()

    def save(self, path, seed: int | None = None) -> None:
        """Write a one-line JSON header followed by the bit-packed occupied and window grids."""
        header = {"window": {"center": list(self.box.center), "radius": self.box.radius},
                  "u": self.u, "seed": seed, "shape": list(self.box.shape)}
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            fh.write(np.packbits(self.occupied.ravel()).tobytes())
            fh.write(np.packbits(self.window.ravel()).tobytes())


def load_occupancy(path) -> tuple[OccupancyField, dict]:
    """Read a field written by :meth:`OccupancyField.save`; returns ``(field, header)``."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = np.frombuffer(fh.read(), dtype=np.uint8)
    box = BoxSpec(tuple(header["window"]["center"]), int(header["window"]["radius"]))
    n = box.size
    nbytes = (n + 7) // 8
    occ = np.unpackbits(raw[:nbytes])[:n].astype(bool).reshape(box.shape)
    win = np.unpackbits(raw[nbytes:2 * nbytes])[:n].astype(bool).reshape(box.shape)
    return OccupancyField(box, occ, win, float(header["u"])), header


def _window_mask(sample: InterlacementSample, W) -> tuple[BoxSpec, np.ndarray]:
    box = BoxSpec((0,) * sample.dim, sample.record_radius)
    mask = np.zeros(box.size, dtype=bool)
    if W is None:
        pts = np.array(sample.K, dtype=np.int64)
    elif isinstance(W, BoxSpec):
        pts = W.points_array()
    else:
        pts = np.array(list(W), dtype=np.int64)
    kset = {tuple(p) for p in sample.K}
    if any(tuple(int(c) for c in p) not in kset for p in pts):
        raise ValueError("window must be contained in the sampled set K")
    mask[box.index(pts)] = True
    return box, mask.reshape(box.shape)


def occupancy(sample: InterlacementSample, u: float, W=None) -> OccupancyField:
    """``I^u`` restricted to the window ``W`` (default: all of ``K``).

    Only trajectories meeting ``K`` are in the sample, so ``W`` must be a
    subset of ``K``.
    """
    if u > sample.u_max + 1e-12:
        raise ValueError("u exceeds the sampled level")
    box, mask = _window_mask(sample, W)
    occ = np.zeros(box.size, dtype=bool)
    for t in sample.trajectories:
        if t.label <= u:
            occ[box.index(t.rec_pos)] = True
    return OccupancyField(box, occ.reshape(box.shape) & mask, mask, u)


def truncated_occupancy(sample: InterlacementSample, u: float, C_radius: int, W=None) -> OccupancyField:
    """Occupancy by the paths ``w[0, T_C]`` with ``C = B(0, C_radius)``.

    Each trajectory is cut when it first leaves ``C``; the record box must
    reach at least one layer beyond ``C``. With ``C_radius >= guard`` the cut
    is the guard exit itself, so only reinjected segments are dropped.
    """
    no_cut = C_radius >= sample.guard
    if not no_cut and sample.record_radius < C_radius + 1:
        raise ValueError("record box must extend one layer beyond C")
    box, mask = _window_mask(sample, W)
    occ = np.zeros(box.size, dtype=bool)
    for t in sample.trajectories:
        if t.label > u:
            continue
        seg = t.rec_pos[t.first_segment()]
        outside = np.abs(seg).max(axis=1) > C_radius
        stop = int(np.argmax(outside)) if outside.any() and not no_cut else len(seg)
        occ[box.index(seg[:stop])] = True
    return OccupancyField(box, occ.reshape(box.shape) & mask, mask, u)


def returns_departures(traj: Trajectory, A_radius: int, C_radius: int) -> tuple[list[int], list[int]]:
    """Successive returns to ``A = B(0, A_radius)`` and departures from ``C = B(0, C_radius)``.

    ``R_1 = H_A``, ``D_k`` is the first exit of ``C`` after ``R_k`` and
    ``R_{k+1}`` the first visit of ``A`` after ``D_k``. A reinjection counts
    as a departure followed by a return.
    """
    if not A_radius < C_radius:
        raise ValueError("need A strictly inside C")
    sup = np.abs(traj.rec_pos).max(axis=1)
    in_A = sup <= A_radius
    out_C = sup > C_radius
    seg_of = np.zeros(len(sup), dtype=np.int64)
    seg_of[traj.seg_start[1:]] = 1
    seg_of = np.cumsum(seg_of)
    R: list[int] = []
    Dp: list[int] = []
    i = 0
    n = len(sup)
    while i < n:
        nxt = np.flatnonzero(in_A[i:])
        if not nxt.size:
            break
        i += int(nxt[0])
        R.append(int(traj.rec_t[i]))
        seg = seg_of[i]
        rest = np.flatnonzero(out_C[i:] & (seg_of[i:] == seg))
        if rest.size:
            i += int(rest[0])
            Dp.append(int(traj.rec_t[i]))
        else:
            # the segment ended at the guard without a recorded exit of C
            ends = np.flatnonzero(seg_of[i:] != seg)
            if not ends.size:
                break
            Dp.append(int(traj.rec_t[i + int(ends[0]) - 1]))
            i += int(ends[0])
    return R, Dp


def vacancy_probability(K_prime: Iterable[Point], u: float, cap: float) -> float:
    """``P[V^u contains K'] = exp(-u cap(K'))``."""
    return math.exp(-u * cap)
