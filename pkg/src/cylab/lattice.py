"""Vertex sets on the discrete cylinder (Z/NZ)^d x Z and on Z^D.

Points are integer tuples of length ``d + 1``. On the cylinder the first
``d`` coordinates live on the torus ``{0, ..., N-1}`` and the last one is the
height. On the lattice ``Z^D`` all coordinates are unrestricted.

Neighbours are produced move by move, so for ``N in {1, 2}`` the cylinder
neighbourhood is a multiset: ``N = 1`` gives self-loops and ``N = 2`` double
edges. The walk then keeps transition weight ``1 / (2(d+1))`` per move.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Mapping

import numpy as np

Point = tuple[int, ...]

CYLINDER = "cylinder"
LATTICE = "lattice"


@dataclass(frozen=True)
class Geometry:
    """Ambient graph: a discrete cylinder or a full lattice.

    Parameters
    ----------
    kind : {"cylinder", "lattice"}
        Graph family.
    d : int
        Torus dimension for the cylinder. For the lattice ``Z^D`` this is
        ``D - 1`` so that points always have ``d + 1`` coordinates.
    N : int
        Torus side length (ignored for the lattice).
    """

    kind: str
    d: int
    N: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (CYLINDER, LATTICE):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == CYLINDER:
            if self.d < 1:
                raise ValueError("cylinder needs d >= 1")
            if self.N < 1:
                raise ValueError("cylinder needs N >= 1")
        elif self.d < 0:
            raise ValueError("lattice dimension must be at least 1")

    @classmethod
    def cylinder(cls, d: int, N: int) -> "Geometry":
        return cls(CYLINDER, int(d), int(N))

    @classmethod
    def lattice(cls, dim: int) -> "Geometry":
        """Full lattice ``Z^dim``."""
        return cls(LATTICE, int(dim) - 1, 1)

    @property
    def dim(self) -> int:
        """Number of coordinates of a point."""
        return self.d + 1

    @property
    def is_cylinder(self) -> bool:
        return self.kind == CYLINDER

    @property
    def n_moves(self) -> int:
        return 2 * self.dim

    @property
    def torus_size(self) -> int:
        """Number of points in one horizontal layer (1 for the lattice)."""
        return self.N ** self.d if self.is_cylinder else 1

    def step_table(self) -> np.ndarray:
        """Move vectors, shape ``(2D, D)``; move ``2i`` is ``+e_i``, ``2i+1`` is ``-e_i``."""
        D = self.dim
        table = np.zeros((2 * D, D), dtype=np.int64)
        for axis in range(D):
            table[2 * axis, axis] = 1
            table[2 * axis + 1, axis] = -1
        return table

    def normalize(self, p: Iterable[int]) -> Point:
        """Reduce torus coordinates mod ``N`` and return a tuple."""
        p = tuple(int(c) for c in p)
        if len(p) != self.dim:
            raise ValueError(f"point {p} does not have {self.dim} coordinates")
        if self.is_cylinder:
            return tuple(c % self.N for c in p[:-1]) + (p[-1],)
        return p

    def step(self, p: Point, move: int) -> Point:
        axis, sign = move >> 1, -1 if move & 1 else 1
        q = list(p)
        q[axis] += sign
        if self.is_cylinder and axis < self.d:
            q[axis] %= self.N
        return tuple(q)

    def neighbors(self, p: Point) -> list[Point]:
        """All ``2(d+1)`` move targets of ``p``, with multiplicity."""
        return [self.step(p, m) for m in range(self.n_moves)]

    def axis_distance(self, a: int, b: int, axis: int) -> int:
        diff = abs(a - b)
        if self.is_cylinder and axis < self.d:
            diff %= self.N
            return min(diff, self.N - diff)
        return diff

    def sup_distance(self, p: Point, q: Point) -> int:
        """Sup-norm graph distance, wrapping on torus coordinates."""
        return max(self.axis_distance(a, b, i) for i, (a, b) in enumerate(zip(p, q)))

    def ball(self, center: Point, radius: int) -> frozenset[Point]:
        """Closed sup-norm ball ``B(center, radius)``."""
        if radius < 0:
            return frozenset()
        center = self.normalize(center)
        offsets = range(-radius, radius + 1)
        return frozenset(self.normalize(tuple(c + o for c, o in zip(center, off)))
                         for off in product(offsets, repeat=self.dim))

    def sphere(self, center: Point, radius: int) -> frozenset[Point]:
        """Points at sup-norm distance exactly ``radius``."""
        center = self.normalize(center)
        return frozenset(p for p in self.ball(center, radius)
                         if self.sup_distance(p, center) == radius)

    def layer(self, z: int) -> list[Point]:
        """Horizontal layer ``T x {z}`` (a single point on the lattice with d = 0)."""
        if not self.is_cylinder:
            raise ValueError("layers are defined on the cylinder")
        return [tuple(y) + (int(z),) for y in product(range(self.N), repeat=self.d)]

    def slab(self, z_lo: int, z_hi: int) -> list[Point]:
        """Points of ``T x [z_lo, z_hi]`` ordered by height, then torus index."""
        pts: list[Point] = []
        for z in range(int(z_lo), int(z_hi) + 1):
            pts.extend(self.layer(z))
        return pts

    def to_config(self) -> dict[str, str]:
        return {"kind": self.kind, "d": str(self.d), "N": str(self.N)}

    @classmethod
    def from_config(cls, cfg: Mapping[str, object]) -> "Geometry":
        kind = str(cfg.get("kind", CYLINDER))
        if kind == LATTICE and "dim" in cfg:
            return cls.lattice(int(cfg["dim"]))
        return cls(kind, int(cfg["d"]), int(cfg.get("N", 1)))


def boundary(U: Iterable[Point], g: Geometry) -> frozenset[Point]:
    """Outer boundary: points outside ``U`` adjacent to ``U``."""
    U = frozenset(g.normalize(p) for p in U)
    return frozenset(q for p in U for q in g.neighbors(p) if q not in U)


def interior_boundary(U: Iterable[Point], g: Geometry) -> frozenset[Point]:
    """Interior boundary: points of ``U`` adjacent to the complement."""
    U = frozenset(g.normalize(p) for p in U)
    return frozenset(p for p in U if any(q not in U for q in g.neighbors(p)))


def encode_torus(y: np.ndarray, N: int) -> np.ndarray:
    """Flat index ``sum_i y_i N^i`` of torus coordinates (last axis of ``y``)."""
    y = np.asarray(y, dtype=np.int64)
    weights = N ** np.arange(y.shape[-1], dtype=np.int64)
    return (np.mod(y, N) * weights).sum(axis=-1)


def decode_torus(flat: np.ndarray, N: int, d: int) -> np.ndarray:
    """Inverse of :func:`encode_torus`; returns shape ``flat.shape + (d,)``."""
    flat = np.asarray(flat, dtype=np.int64)
    out = np.empty(flat.shape + (d,), dtype=np.int64)
    rem = flat.copy()
    for i in range(d):
        out[..., i] = rem % N
        rem //= N
    return out


@dataclass(frozen=True)
class BoxSpec:
    """Lattice box ``center + [-radius, radius]^D`` with a dense grid indexing.

    Grid indices are C-ordered over the box with the first coordinate slowest.
    """

    center: Point
    radius: int

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    @property
    def size(self) -> int:
        return self.side ** self.dim

    def contains(self, p: Point) -> bool:
        return all(abs(a - c) <= self.radius for a, c in zip(p, self.center))

    def contains_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64)
        return (np.abs(pts - np.asarray(self.center)) <= self.radius).all(axis=-1)

    def points(self) -> Iterator[Point]:
        offs = range(-self.radius, self.radius + 1)
        for off in product(offs, repeat=self.dim):
            yield tuple(c + o for c, o in zip(self.center, off))

    def points_array(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(c - self.radius, c + self.radius + 1) for c in self.center],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def index(self, pts: np.ndarray) -> np.ndarray:
        """Flat grid index of points assumed to lie in the box."""
        pts = np.asarray(pts, dtype=np.int64) - np.asarray(self.center) + self.radius
        return np.ravel_multi_index(tuple(np.moveaxis(pts, -1, 0)), self.shape)

    def sphere_mask(self) -> np.ndarray:
        """Boolean grid of the outer face layer (sup distance equal to ``radius``)."""
        pts = self.points_array() - np.asarray(self.center)
        return (np.abs(pts).max(axis=1) == self.radius).reshape(self.shape)


@dataclass(frozen=True)
class SlabEmbedding:
    """Isomorphism between a small cylinder box and a lattice box.

    The cylinder box is ``B((0, ..., 0, center_z), radius)`` and the lattice
    box is ``B(0, radius)``. Valid whenever ``2 * radius + 1 <= N`` so that the
    torus coordinates do not wrap onto themselves.
    """

    geometry: Geometry
    center_z: int
    radius: int

    def to_lattice(self, p: Point) -> Point:
        p = self.geometry.normalize(p)
        N = self.geometry.N
        out = []
        for c in p[:-1]:
            c = c % N
            if c > N // 2:
                c -= N
            out.append(c)
        out.append(p[-1] - self.center_z)
        q = tuple(out)
        if max(abs(c) for c in q) > self.radius:
            raise ValueError(f"{p} is outside the embedded box")
        return q

    def to_cylinder(self, q: Point) -> Point:
        if max(abs(c) for c in q) > self.radius:
            raise ValueError(f"{q} is outside the embedded box")
        return self.geometry.normalize(tuple(q[:-1]) + (q[-1] + self.center_z,))

    def cylinder_points(self) -> frozenset[Point]:
        return self.geometry.ball((0,) * self.geometry.d + (self.center_z,), self.radius)

    def lattice_points(self) -> list[Point]:
        return list(BoxSpec((0,) * self.geometry.dim, self.radius).points())


def embed_slab(center_z: int, radius: int, g: Geometry) -> SlabEmbedding:
    """Embed ``B((0, center_z), radius)`` of the cylinder isometrically into ``Z^{d+1}``.

    Raises
    ------
    ValueError
        If the box wraps around the torus (``2 * radius + 1 > N``).
    """
    if not g.is_cylinder:
        raise ValueError("embed_slab needs a cylinder geometry")
    if 2 * radius + 1 > g.N:
        raise ValueError(f"box of radius {radius} wraps around a torus of side {g.N}")
    return SlabEmbedding(g, int(center_z), int(radius))
