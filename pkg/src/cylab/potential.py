"""Exact potential theory for the killed simple random walk.

For a finite set ``U`` the walk killed on leaving ``U`` has substochastic
transition matrix ``P_U``. Everything here is obtained by solving linear
systems with ``I - P_U``:

* Green function ``g_U = (I - P_U)^{-1}`` (symmetric),
* hitting probabilities ``P_x[H_K < T_U]``,
* equilibrium measure ``e_{K,U}(x) = P_x[H~_K > T_U]`` and capacity,
* entrance laws ``P_mu[X_{H_K} = x, H_K < T_U]``.

Small systems are solved densely and larger ones with a sparse LU
factorisation. A conjugate-gradient path is kept as an independent second
solver for cross-checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import BoxSpec, Geometry, Point

DENSE_LIMIT = 3000
GREEN_SIZE_LIMIT = 20000


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite measure on vertices, stored as aligned support and weights."""

    support: tuple[Point, ...]
    weights: np.ndarray

    @classmethod
    def from_dict(cls, mass: Mapping[Point, float]) -> "DiscreteMeasure":
        pts = tuple(mass)
        return cls(pts, np.array([float(mass[p]) for p in pts]))

    @classmethod
    def uniform(cls, points: Iterable[Point]) -> "DiscreteMeasure":
        pts = tuple(points)
        return cls(pts, np.full(len(pts), 1.0 / len(pts)))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def as_dict(self) -> dict[Point, float]:
        return {p: float(w) for p, w in zip(self.support, self.weights)}

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.support, self.weights / self.total_mass)

    def __getitem__(self, p: Point) -> float:
        return self.as_dict().get(p, 0.0)


@dataclass(frozen=True)
class CapacityResult:
    """Equilibrium measure and capacity with provenance of the computation.

    ``method`` is one of ``"exact-solve"``, ``"big-box-extrapolation"`` or
    ``"mc-escape"``. ``truncation_bound`` bounds the bias from cutting the
    lattice down to a finite region (zero for exact solves on finite ``U``).
    """

    measure: DiscreteMeasure
    method: str
    std_error: float = 0.0
    truncation_bound: float = 0.0
    seed: int | None = None
    value_override: float | None = None

    @property
    def value(self) -> float:
        if self.value_override is not None:
            return float(self.value_override)
        return self.measure.total_mass

    def to_json(self) -> str:
        return json.dumps({
            "method": self.method,
            "value": self.value,
            "std_error": self.std_error,
            "truncation_bound": self.truncation_bound,
            "seed": self.seed,
        })


@dataclass(frozen=True)
class GreenTable:
    """Green function of the walk killed outside ``domain``."""

    domain: tuple[Point, ...]
    values: np.ndarray
    index: dict[Point, int] = field(repr=False)

    def __call__(self, x: Point, y: Point) -> float:
        i = self.index.get(tuple(x))
        j = self.index.get(tuple(y))
        if i is None or j is None:
            return 0.0
        return float(self.values[i, j])


# ---------------------------------------------------------------------------
# linear algebra helpers


def _indexed(U: Iterable[Point], g: Geometry) -> tuple[list[Point], dict[Point, int]]:
    pts = sorted({g.normalize(p) for p in U})
    return pts, {p: i for i, p in enumerate(pts)}


def transition_matrix(U: Iterable[Point], g: Geometry) -> tuple[sp.csr_matrix, list[Point], dict[Point, int]]:
    """Killed transition matrix on ``U`` (moves counted with multiplicity).

    Returns
    -------
    P : scipy.sparse.csr_matrix
        ``P[i, j]`` is the one-step probability from ``pts[i]`` to ``pts[j]``.
    pts, index
        Ordered domain and its inverse map.
    """
    pts, index = _indexed(U, g)
    w = 1.0 / g.n_moves
    rows, cols = [], []
    for i, p in enumerate(pts):
        for q in g.neighbors(p):
            j = index.get(q)
            if j is not None:
                rows.append(i)
                cols.append(j)
    n = len(pts)
    P = sp.csr_matrix((np.full(len(rows), w), (rows, cols)), shape=(n, n))
    P.sum_duplicates()
    return P, pts, index


def _operator(P: sp.csr_matrix) -> sp.csc_matrix:
    return (sp.identity(P.shape[0], format="csc") - P.tocsc()).tocsc()


def _solve(A: sp.spmatrix, B: np.ndarray, method: str = "direct") -> np.ndarray:
    """Solve ``A X = B`` for an M-matrix ``A``."""
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros_like(B)
    if method == "iterative":
        cols = B.reshape(n, -1)
        out = np.empty_like(cols)
        for k in range(cols.shape[1]):
            x, info = spla.cg(A, cols[:, k], rtol=1e-14, atol=0.0, maxiter=50 * n)
            if info != 0:
                raise RuntimeError(f"conjugate gradient did not converge (info={info})")
            out[:, k] = x
        return out.reshape(B.shape)
    if n <= DENSE_LIMIT:
        return np.linalg.solve(A.toarray(), B)
    return spla.splu(A.tocsc()).solve(B)


# ---------------------------------------------------------------------------
# Green function and hitting quantities on finite sets


def green_exact(U: Iterable[Point], g: Geometry, method: str = "direct",
                max_size: int = GREEN_SIZE_LIMIT) -> GreenTable:
    """Full Green matrix of the walk killed on leaving ``U``.

    Parameters
    ----------
    U : iterable of points
        Finite domain.
    g : Geometry
    method : {"direct", "iterative"}
        Linear solver; the iterative path is conjugate gradients.
    max_size : int
        Largest ``|U|`` accepted; the table is dense.

    Returns
    -------
    GreenTable

    Raises
    ------
    ValueError
        If ``|U|`` exceeds ``max_size``.
    """
    U = list(U)
    if len(set(U)) > max_size:
        raise ValueError(f"|U| = {len(set(U))} exceeds the dense Green table limit {max_size}")
    P, pts, index = transition_matrix(U, g)
    A = _operator(P)
    G = _solve(A, np.eye(len(pts)), method=method)
    return GreenTable(tuple(pts), G, index)


def green_apply(U: Iterable[Point], g: Geometry, vec: Mapping[Point, float],
                method: str = "direct") -> dict[Point, float]:
    """``x -> sum_y g_U(x, y) vec(y)`` for all ``x`` in ``U`` via one solve."""
    P, pts, index = transition_matrix(U, g)
    b = np.zeros(len(pts))
    for p, v in vec.items():
        i = index.get(g.normalize(p))
        if i is not None:
            b[i] += v
    x = _solve(_operator(P), b, method=method)
    return {p: float(x[i]) for i, p in enumerate(pts)}


def _split(U, K, g):
    P, pts, index = transition_matrix(U, g)
    Kn = {g.normalize(p) for p in K}
    missing = Kn - set(index)
    if missing:
        raise ValueError(f"K must be a subset of U; {sorted(missing)[:3]} are not")
    in_K = np.array([p in Kn for p in pts])
    return P, pts, index, in_K


def hitting_probability(U: Iterable[Point], K: Iterable[Point], g: Geometry,
                        method: str = "direct") -> dict[Point, float]:
    """``x -> P_x[H_K < T_U]`` for ``x`` in ``U`` (equal to 1 on ``K``)."""
    P, pts, _, in_K = _split(U, K, g)
    h = _hitting_vector(P, in_K, method)
    return {p: float(h[i]) for i, p in enumerate(pts)}


def _hitting_vector(P: sp.csr_matrix, in_K: np.ndarray, method: str = "direct") -> np.ndarray:
    free = np.flatnonzero(~in_K)
    hit = np.flatnonzero(in_K)
    h = np.zeros(P.shape[0])
    h[hit] = 1.0
    if free.size:
        Pff = P[free][:, free]
        rhs = np.asarray(P[free][:, hit].sum(axis=1)).ravel()
        h[free] = _solve(_operator(Pff), rhs, method)
    return h


def equilibrium_exact(K: Iterable[Point], U: Iterable[Point], g: Geometry,
                      method: str = "direct") -> CapacityResult:
    """Equilibrium measure ``e_{K,U}(x) = P_x[H~_K > T_U]`` on ``K``.

    Examples
    --------
    On ``Z`` with ``U = (-5, 5)`` and ``K = {2}`` the escape probability is
    ``1/2 * (1/3 + 1/7)``.

    >>> from cylab.lattice import Geometry
    >>> g = Geometry.lattice(1)
    >>> res = equilibrium_exact([(2,)], [(i,) for i in range(-4, 5)], g)
    >>> round(res.value, 12) == round(0.5 * (1 / 3 + 1 / 7), 12)
    True
    """
    P, pts, _, in_K = _split(U, K, g)
    h = _hitting_vector(P, in_K, method)
    ret = np.asarray(P @ h).ravel()
    kidx = np.flatnonzero(in_K)
    e = 1.0 - ret[kidx]
    support = tuple(pts[i] for i in kidx)
    return CapacityResult(DiscreteMeasure(support, e), "exact-solve")


def entrance_law(mu: Mapping[Point, float], K: Iterable[Point], U: Iterable[Point],
                 g: Geometry, method: str = "direct") -> dict[Point, float]:
    """``x -> P_mu[X_{H_K} = x, H_K < T_U]`` for ``x`` in ``K``.

    Starting points of ``mu`` outside ``U`` contribute nothing. Points of
    ``mu`` inside ``K`` enter at themselves.
    """
    P, pts, index, in_K = _split(U, K, g)
    free = np.flatnonzero(~in_K)
    hit = np.flatnonzero(in_K)
    law = np.zeros(P.shape[0])
    mu_vec = np.zeros(P.shape[0])
    for p, w in mu.items():
        i = index.get(g.normalize(p))
        if i is not None:
            mu_vec[i] += w
    law[hit] = mu_vec[hit]
    if free.size:
        # adjoint solve: the row vector mu_free (I - P_ff)^{-1} P_fK
        A = _operator(P[free][:, free])
        y = _solve(A.T.tocsc(), mu_vec[free], method)
        law[hit] += np.asarray(P[free][:, hit].T @ y).ravel()
    return {pts[i]: float(law[i]) for i in hit}


def hitting_identity_check(x: Point, K: Iterable[Point], U: Iterable[Point],
                           g: Geometry) -> tuple[float, float, float]:
    """Last-exit decomposition ``P_x[H_K < T_U] = sum_{x'} g_U(x, x') e_{K,U}(x')``.

    Returns
    -------
    tuple
        ``(lhs, rhs, |lhs - rhs|)``.
    """
    x = g.normalize(x)
    K = list(K)
    h = hitting_probability(U, K, g)
    e = equilibrium_exact(K, U, g).measure.as_dict()
    G = green_apply(U, g, e)
    lhs = h.get(x, 0.0)
    rhs = G.get(x, 0.0)
    return lhs, rhs, abs(lhs - rhs)


def sandwich_check(x: Point, K: Iterable[Point], U: Iterable[Point],
                   g: Geometry) -> tuple[float, float, float, bool]:
    """Green-ratio bounds on the hitting probability.

    ``S(y) = sum_{x' in K} g_U(y, x')``; then
    ``S(x) / max_K S <= P_x[H_K < T_U] <= S(x) / min_K S``.

    Returns
    -------
    tuple
        ``(lower, probability, upper, holds)`` with a ``1e-12`` slack.
    """
    x = g.normalize(x)
    K = [g.normalize(p) for p in K]
    S = green_apply(U, g, {p: 1.0 for p in K})
    SK = np.array([S[p] for p in K])
    p = hitting_probability(U, K, g).get(x, 0.0)
    lower = S.get(x, 0.0) / SK.max()
    upper = S.get(x, 0.0) / SK.min()
    holds = lower - 1e-12 <= p <= upper + 1e-12
    return lower, p, upper, bool(holds)


# ---------------------------------------------------------------------------
# cylinder identities for excursions between two pairs of levels


def _layout(a: int, b: int, a_t: int, b_t: int) -> tuple[float, float]:
    """Half-widths ``(h, r)`` of nested level pairs with a common midpoint."""
    if not (a_t > a > b > b_t):
        raise ValueError("levels must satisfy a_t > a > b > b_t")
    if a + b != a_t + b_t:
        raise ValueError("inner and outer level pairs must share their midpoint")
    return 0.5 * (a_t - b_t), 0.5 * (a - b)


def _band(g: Geometry, lo: int, hi: int) -> list[Point]:
    """``T x (lo, hi)`` on the cylinder or ``(lo, hi)`` on ``Z``."""
    if g.is_cylinder:
        return g.slab(lo + 1, hi - 1)
    if g.dim != 1:
        raise ValueError("level identities need a cylinder or Z")
    return [(z,) for z in range(lo + 1, hi)]


def _levels(g: Geometry, *zs: int) -> list[Point]:
    if g.is_cylinder:
        out: list[Point] = []
        for z in zs:
            out.extend(g.layer(z))
        return out
    return [(z,) for z in zs]


def green_sum_identity(g: Geometry, a: int, b: int, a_t: int, b_t: int) -> dict[str, object]:
    """Green function against the uniform law on the inner levels.

    For ``U = T x (b_t, a_t)`` and ``q`` uniform on ``T x {a, b}``,
    ``sum_{x'} q(x') g_U(x', x)`` equals ``(d+1)(h - r) / N^d`` on
    ``T x [b, a]`` where ``2h = a_t - b_t`` and ``2r = a - b``.

    Returns
    -------
    dict
        ``values`` (per point of ``T x [b, a]``), ``expected`` and
        ``residual`` (max absolute deviation).
    """
    h, r = _layout(a, b, a_t, b_t)
    U = _band(g, b_t, a_t)
    inner = _levels(g, a, b)
    q = {p: 1.0 / len(inner) for p in inner}
    # g_U is symmetric, so the row sum against q is one forward solve
    G = green_apply(U, g, q)
    expected = g.n_moves / 2 * (h - r) / g.torus_size
    band = _band(g, b - 1, a + 1)
    values = {p: G[p] for p in band}
    residual = max(abs(v - expected) for v in values.values())
    return {"values": values, "expected": expected, "residual": residual}


def entrance_law_identity(g: Geometry, K: Sequence[Point], a: int, b: int,
                          a_t: int, b_t: int) -> dict[str, object]:
    """Entrance law from ``q`` against ``(d+1)(h - r)/N^d`` times ``e_{K,U}``."""
    h, r = _layout(a, b, a_t, b_t)
    U = _band(g, b_t, a_t)
    inner = _levels(g, a, b)
    q = {p: 1.0 / len(inner) for p in inner}
    law = entrance_law(q, K, U, g)
    e = equilibrium_exact(K, U, g).measure.as_dict()
    factor = g.n_moves / 2 * (h - r) / g.torus_size
    expected = {x: factor * e[x] for x in law}
    residual = max(abs(law[x] - expected[x]) for x in law)
    return {"law": law, "expected": expected, "residual": residual}


def escape_identity(a: int, b: int, a_t: int, b_t: int) -> dict[str, float]:
    """One-dimensional escape and hitting identities solved exactly on ``Z``.

    Checks ``P_a[H~_a > T_U] = 1/(2(h-r)) + 1/(2(h+r))`` (same at ``b``) and
    ``P_z[H_a < T_U] + P_z[H_b < T_U] = 2h/(h+r)`` for every ``z`` in
    ``[b, a]``, with ``U = (b_t, a_t)``.
    """
    h, r = _layout(a, b, a_t, b_t)
    g = Geometry.lattice(1)
    U = _band(g, b_t, a_t)
    target = 0.5 / (h - r) + 0.5 / (h + r)
    ea = equilibrium_exact([(a,)], U, g).value
    eb = equilibrium_exact([(b,)], U, g).value
    ha = hitting_probability(U, [(a,)], g)
    hb = hitting_probability(U, [(b,)], g)
    sums = [ha[(z,)] + hb[(z,)] for z in range(b, a + 1)]
    hit_target = 2 * h / (h + r)
    return {
        "escape_a": ea,
        "escape_b": eb,
        "escape_expected": target,
        "escape_residual": max(abs(ea - target), abs(eb - target)),
        "hitting_expected": hit_target,
        "hitting_residual": max(abs(s - hit_target) for s in sums),
    }


# ---------------------------------------------------------------------------
# infinite lattice Z^D


def box_capacity(K: Iterable[Point], R: int, method: str = "direct") -> CapacityResult:
    """Equilibrium measure of ``K`` relative to the box ``B(0, R)`` in ``Z^D``.

    Uses a vectorised sparse operator on the box, so it scales to boxes with
    a few hundred thousand sites (conjugate gradients are used there).
    """
    K = [tuple(int(c) for c in p) for p in K]
    D = len(K[0])
    box = BoxSpec((0,) * D, R)
    if not all(box.contains(p) and max(abs(c) for c in p) < R for p in K):
        raise ValueError("K must lie strictly inside the box")
    n = box.size
    side = box.side
    A = _box_operator(D, side)
    in_K = np.zeros(n, dtype=bool)
    kidx = box.index(np.array(K))
    in_K[kidx] = True
    free = np.flatnonzero(~in_K)
    P = sp.identity(n, format="csr") - A
    rhs = np.asarray(P[free][:, kidx].sum(axis=1)).ravel()
    Aff = A[free][:, free]
    if method == "direct" and free.size <= DENSE_LIMIT:
        hf = spla.splu(Aff.tocsc()).solve(rhs)
    else:
        hf, info = spla.cg(Aff, rhs, rtol=1e-13, atol=0.0, maxiter=20 * n)
        if info != 0:
            raise RuntimeError("conjugate gradient did not converge")
    h = np.zeros(n)
    h[free] = hf
    h[kidx] = 1.0
    ret = np.asarray(P[kidx] @ h).ravel()
    e = 1.0 - ret
    return CapacityResult(DiscreteMeasure(tuple(K), e), "exact-solve")


def _box_operator(D: int, side: int) -> sp.csr_matrix:
    """``I - P`` for the walk on ``{0..side-1}^D`` killed on leaving it."""
    one = sp.diags([np.ones(side - 1), np.ones(side - 1)], [-1, 1], shape=(side, side))
    eye = sp.identity(side, format="csr")
    adj = sp.csr_matrix((side ** D, side ** D))
    for axis in range(D):
        term = None
        for k in range(D):
            f = one if k == axis else eye
            term = f if term is None else sp.kron(term, f, format="csr")
        adj = adj + term
    return (sp.identity(side ** D, format="csr") - adj / (2 * D)).tocsr()


def capacity_bigbox(K: Iterable[Point], radii: Sequence[int] = (8, 10, 12, 16, 20)) -> CapacityResult:
    """Capacity in ``Z^D`` by extrapolating box capacities to infinite radius.

    ``cap_R(K)`` decreases to ``cap(K)`` with corrections in powers of
    ``(R + 1/2)^{2-D}``. A cubic fit through the radii gives the limit and the
    gap to the quadratic fit is reported as ``truncation_bound``. The
    per-site measure is the one of the largest box rescaled to that limit.
    """
    K = [tuple(int(c) for c in p) for p in K]
    D = len(K[0])
    if D < 3:
        raise ValueError("the walk on Z^D is recurrent for D < 3")
    radii = sorted(int(R) for R in radii)
    if len(radii) < 4:
        raise ValueError("need at least four radii for the extrapolation")
    results = [box_capacity(K, R) for R in radii]
    caps = np.array([r.value for r in results])
    x = (np.array(radii, dtype=float) + 0.5) ** (2 - D)

    def fit(order: int) -> float:
        V = np.vander(x, order + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, caps, rcond=None)
        return float(coef[0])

    value = fit(3)
    bound = abs(value - fit(2))
    last = results[-1].measure
    measure = DiscreteMeasure(last.support, last.weights * value / last.total_mass)
    return CapacityResult(measure, "big-box-extrapolation", truncation_bound=bound,
                          value_override=value)


def lattice_green(x, dim: int, step: float = 0.05) -> np.ndarray:
    """Green function ``g(0, x)`` of simple random walk on ``Z^dim`` (``dim >= 3``).

    Evaluates ``int_0^inf prod_i exp(-t/D) I_{x_i}(t/D) dt`` by the
    trapezoid rule in ``s = log t`` on ``[e^-36, 3e8]`` with an end
    correction, plus a two-term analytic tail. Absolute error is below
    ``1e-12`` for moderate ``|x|``.

    Parameters
    ----------
    x : array_like
        A point or an array of points, shape ``(..., dim)``.
    dim : int
    step : float
        Quadrature step in ``log t``.

    Returns
    -------
    numpy.ndarray
        Green function values, shape ``x.shape[:-1]``.
    """
    from scipy.special import ive

    if dim < 3:
        raise ValueError("the Green function is infinite for dim < 3")
    X = np.abs(np.asarray(x, dtype=float))
    shape = X.shape[:-1]
    X = X.reshape(-1, dim)
    D = float(dim)
    s0, T = -36.0, 3e8
    s1 = np.log(T)
    n = int(np.ceil((s1 - s0) / step))
    s = np.linspace(s0, s1, n + 1)
    h = s[1] - s[0]
    t = np.exp(s)
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    out = np.empty(len(X))
    for lo in range(0, len(X), 2048):
        blk = X[lo:lo + 2048]
        F = np.ones((len(blk), n + 1))
        for i in range(dim):
            F *= ive(blk[:, i][:, None], t[None, :] / D)
        F *= t
        val = F @ w + np.exp(s0) * (blk.sum(axis=1) == 0)
        val -= h * h / 12 * (3 * F[:, -1] - 4 * F[:, -2] + F[:, -3]) / (2 * h)
        c = D / 8 * (4 * blk ** 2 - 1).sum(axis=1)
        tail = (D / (2 * np.pi)) ** (D / 2) * (T ** (1 - D / 2) / (D / 2 - 1) - c * T ** (-D / 2) / (D / 2))
        out[lo:lo + 2048] = val + tail
    return out.reshape(shape)


def lattice_green_asymptotic(x, dim: int) -> np.ndarray:
    """Large-``|x|`` expansion of the ``Z^dim`` Green function.

    Leading term ``D Gamma(D/2 - 1) / (2 pi^{D/2}) |x|^{2-D}``; for ``D = 3`` the
    cubic-anisotropy correction of order ``|x|^{-3}`` is included.
    """
    from math import gamma, pi

    X = np.asarray(x, dtype=float)
    r2 = np.einsum("...i,...i->...", X, X)
    inv_r = 1.0 / np.sqrt(r2)
    if dim == 3:
        inv_r2 = inv_r * inv_r
        X2 = X * X
        quart = np.einsum("...i,...i->...", X2, X2)
        # 3/(2 pi r) + 6/(32 pi) (5 sum x_i^4 / r^7 - 3 / r^3)
        return inv_r * (3 / (2 * pi) + 6 / (32 * pi) * inv_r2 * (5 * quart * inv_r2 * inv_r2 - 3))
    return dim * gamma(dim / 2 - 1) / (2 * pi ** (dim / 2)) * inv_r ** (dim - 2)


def equilibrium_lattice(K: Iterable[Point]) -> CapacityResult:
    """Equilibrium measure of a finite ``K`` in ``Z^D`` (``D >= 3``).

    Solves ``sum_{y in K} g(x - y) e(y) = 1`` for ``x`` in ``K`` with the
    quadrature Green function.
    """
    K = [tuple(int(c) for c in p) for p in K]
    pts = np.array(K, dtype=np.int64)
    D = pts.shape[1]
    diff = np.sort(np.abs(pts[:, None, :] - pts[None, :, :]), axis=-1)
    keys, inv = np.unique(diff.reshape(-1, D), axis=0, return_inverse=True)
    G = lattice_green(keys, D)[inv.ravel()].reshape(len(K), len(K))
    e = np.linalg.solve(G, np.ones(len(K)))
    return CapacityResult(DiscreteMeasure(tuple(K), e), "exact-solve")


def return_bound(K: Sequence[Point], guard: int) -> float:
    """Upper bound on the chance of returning to ``K`` after leaving ``B(0, guard)``.

    From any ``y`` outside the guard, ``P_y[H_K < inf]`` is at most
    ``sum_{x in K} g(y - x) / g(0)``, evaluated at the exit point nearest to
    ``K`` along a coordinate axis.
    """
    K = np.array(K, dtype=np.int64)
    dim = K.shape[1]
    rk = int(np.abs(K).max())
    far = (guard + 1 - rk)
    if far <= 0:
        return 1.0
    worst = 0.0
    for axis in range(dim):
        for sign in (1, -1):
            y = np.zeros(dim, dtype=np.int64)
            y[axis] = sign * (guard + 1)
            worst = max(worst, float(lattice_green(y - K, dim).sum()))
    g0 = float(lattice_green(np.zeros(dim), dim))
    return min(1.0, worst / g0)


def equilibrium_infinite(K: Iterable[Point], guard_radius: int, samples: int,
                         seed=None) -> CapacityResult:
    """Monte Carlo equilibrium measure of a finite ``K`` in ``Z^D`` (``D >= 3``).

    From each ``x`` in ``K`` the walk runs until it returns to ``K`` or leaves
    ``B(0, guard_radius)``. The escape fraction ``p_hat`` overestimates
    ``e_K(x)`` by at most the factor ``1 / (1 - eps)`` where ``eps`` is
    :func:`return_bound`; the estimate is centred at ``p_hat (1 - eps / 2)``
    and ``truncation_bound`` is ``cap_hat * eps / 2``.

    Parameters
    ----------
    K : iterable of points
    guard_radius : int
        Must be at least twice the sup-norm diameter of ``K``.
    samples : int
        Walks per site of ``K``.
    seed : int or Generator, optional
    """
    from . import kernels
    from .rng import as_generator

    K = [tuple(int(c) for c in p) for p in K]
    pts = np.array(K, dtype=np.int64)
    D = pts.shape[1]
    if D < 3:
        raise ValueError("the walk on Z^D is recurrent for D < 3")
    diam = int((pts.max(axis=0) - pts.min(axis=0)).max())
    rK = int(np.abs(pts).max())
    if guard_radius < max(2 * diam, rK + 1):
        raise ValueError("guard_radius must be at least twice the diameter of K")
    rng = as_generator(seed)
    box = BoxSpec((0,) * D, rK)
    mask = np.zeros(box.size, dtype=np.uint8)
    mask[box.index(pts)] = 1
    chunk = 256
    rec_t = np.empty(chunk + 1, dtype=np.int64)
    rec_pos = np.empty((chunk + 1, D), dtype=np.int64)
    esc = np.zeros(len(K))
    for i, x in enumerate(pts):
        for _ in range(samples):
            pos = x.copy()
            while True:
                moves = rng.integers(0, 2 * D, size=chunk, dtype=np.uint8)
                _, status, _ = kernels.lattice_walk(pos, moves, guard_radius, rK, mask, True, 0,
                                                    rec_t, rec_pos, 0)
                if status == 1:
                    esc[i] += 1
                    break
                if status == 2:
                    break
    p_hat = esc / samples
    eps = return_bound(K, guard_radius)
    e = p_hat * (1 - eps / 2)
    se = float(np.sqrt((p_hat * (1 - p_hat) / samples).sum()))
    return CapacityResult(DiscreteMeasure(tuple(K), e), "mc-escape", std_error=se,
                          truncation_bound=float(e.sum() * eps / 2),
                          seed=seed if isinstance(seed, int) else None)
