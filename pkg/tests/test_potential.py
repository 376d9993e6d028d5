import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylab import potential as pt
from cylab.lattice import Geometry
from cylab.walk import height_scales

Z = Geometry.lattice(1)


def interval(lo, hi):
    return [(z,) for z in range(lo + 1, hi)]


def test_singleton_green_is_one():
    g = Geometry.cylinder(2, 3)
    assert pt.green_exact([(0, 0, 0)], g)((0, 0, 0), (0, 0, 0)) == pytest.approx(1.0)


def test_green_size_guard():
    with pytest.raises(ValueError):
        pt.green_exact(interval(-10, 10), Z, max_size=5)


def test_green_cylinder_symmetric_and_solvers_agree():
    g = Geometry.cylinder(2, 3)
    U = g.slab(-1, 1)
    a = pt.green_exact(U, g)
    b = pt.green_exact(U, g, method="iterative")
    assert np.allclose(a.values, a.values.T, atol=1e-12)
    assert (a.values > 0).all() and (np.diag(a.values) >= 1).all()
    assert np.max(np.abs(a.values - b.values)) < 1e-10


@pytest.mark.parametrize("lay", [(3, -3, 9, -9), (2, 0, 5, -3), (4, -2, 7, -5)])
def test_one_dimensional_green_at_a(lay):
    a, b, at, bt = lay
    h, r = 0.5 * (at - bt), 0.5 * (a - b)
    # visits to a before exiting, for the walk killed on {a}^c... here U = (bt, at) and K = {a}
    G = pt.green_exact(interval(bt, at), Z)
    e = pt.equilibrium_exact([(a,)], interval(bt, at), Z).value
    assert G((a,), (a,)) == pytest.approx(1 / e, abs=1e-12)
    assert e == pytest.approx(0.5 / (h - r) + 0.5 / (h + r), abs=1e-12)


def test_equilibrium_singleton_domain():
    g = Geometry.cylinder(2, 3)
    res = pt.equilibrium_exact([(0, 0, 0)], [(0, 0, 0)], g)
    assert res.value == pytest.approx(1.0)


def test_equilibrium_pair_on_z():
    # for K = {a, b} the escape from a must avoid b as well, so only the outer gap counts
    a, b, at, bt = 3, -3, 9, -9
    h, r = 6.0 * 1.5, 3.0
    res = pt.equilibrium_exact([(a,), (b,)], interval(bt, at), Z).measure.as_dict()
    assert res[(a,)] == pytest.approx(0.5 / (h - r), abs=1e-12)
    assert res[(b,)] == pytest.approx(0.5 / (h - r), abs=1e-12)


def test_equilibrium_requires_k_in_u():
    with pytest.raises(ValueError):
        pt.equilibrium_exact([(20,)], interval(-3, 3), Z)


def test_layer_equilibrium_constant_and_bounded():
    g = Geometry.cylinder(2, 5)
    K = g.layer(0)
    res = pt.equilibrium_exact(K, g.slab(-3, 3), g)
    w = np.asarray(res.measure.weights)
    assert res.value <= len(K)
    assert np.ptp(w) < 1e-10


def test_hitting_identity_gamblers_ruin():
    a, bt, at = 4, -6, 8
    U = interval(bt, at)
    for z in range(bt + 1, a + 1):
        lhs, rhs, res = pt.hitting_identity_check((z,), [(a,)], U, Z)
        assert lhs == pytest.approx((z - bt) / (a - bt), abs=1e-12)
        assert res < 1e-10


def test_hitting_identity_inside_k():
    g = Geometry.cylinder(2, 3)
    lhs, rhs, res = pt.hitting_identity_check((0, 0, 0), [(0, 0, 0), (1, 0, 0)], g.slab(-2, 2), g)
    assert lhs == pytest.approx(1.0) and res < 1e-10


def _random_instance(rng, g):
    U = g.slab(-int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    idx = rng.choice(len(U), size=int(rng.integers(1, 5)), replace=False)
    K = [U[i] for i in idx]
    x = U[int(rng.integers(len(U)))]
    return x, K, U


def test_hitting_identity_and_sandwich_sweep():
    g = Geometry.cylinder(2, 3)
    rng = np.random.default_rng(5)
    for _ in range(100):
        x, K, U = _random_instance(rng, g)
        assert pt.hitting_identity_check(x, K, U, g)[2] < 1e-10
        lower, p, upper, holds = pt.sandwich_check(x, K, U, g)
        assert holds and lower - 1e-10 <= p <= upper + 1e-10


def test_sandwich_singleton_collapses():
    g = Geometry.cylinder(2, 3)
    lower, p, upper, _ = pt.sandwich_check((1, 1, 2), [(0, 0, 0)], g.slab(-3, 3), g)
    assert lower == pytest.approx(p, abs=1e-12) == pytest.approx(upper, abs=1e-12)


@pytest.mark.parametrize("N", [3, 5])
def test_green_sum_identity(N):
    g = Geometry.cylinder(2, N)
    r, h = height_scales(N)
    out = pt.green_sum_identity(g, r, -r, h, -h)
    assert out["expected"] == pytest.approx(3 * (h - r) / N ** 2)
    assert len(out["values"]) == N ** 2 * (2 * r + 1)
    assert out["residual"] < 1e-10


def test_entrance_law_identity_random_k():
    g = Geometry.cylinder(2, 3)
    r, h = height_scales(3)
    rng = np.random.default_rng(11)
    inner = g.slab(-r + 1, r - 1)
    for _ in range(3):
        K = [inner[i] for i in rng.choice(len(inner), 3, replace=False)]
        assert pt.entrance_law_identity(g, K, r, -r, h, -h)["residual"] < 1e-10


@pytest.mark.parametrize("lay", [(3, -3, 9, -9), (2, 0, 5, -3), (1, -1, 10, -10),
                                 (4, -2, 7, -5), (0, -1, 3, -4)])
def test_escape_identities(lay):
    out = pt.escape_identity(*lay)
    assert out["escape_residual"] < 1e-12 and out["hitting_residual"] < 1e-12


def test_layout_validation():
    with pytest.raises(ValueError):
        pt.escape_identity(3, -3, 9, -8)
    with pytest.raises(ValueError):
        pt.escape_identity(3, 5, 9, -9)


# infinite lattice

G0 = 1.516386059151978


def test_lattice_green_at_origin():
    assert float(pt.lattice_green(np.zeros(3), 3)) == pytest.approx(G0, abs=1e-12)


def test_lattice_green_matches_asymptotics_far_away():
    x = np.array([[12, 5, 3], [20, 0, 0]])
    assert np.allclose(pt.lattice_green(x, 3), pt.lattice_green_asymptotic(x, 3), rtol=2e-4)


def test_lattice_green_harmonic_off_origin():
    x = np.array([2, 1, 0])
    nb = x + np.vstack([np.eye(3, dtype=int), -np.eye(3, dtype=int)])
    assert float(pt.lattice_green(nb, 3).mean()) == pytest.approx(float(pt.lattice_green(x, 3)),
                                                                    abs=1e-11)


@pytest.mark.parametrize("K,cap", [
    ([(0, 0, 0)], 1 / G0),
    ([(0, 0, 0), (1, 0, 0)], 0.98387811501),
    ([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)], 1.38874095925),
])
def test_capacity_oracles_agree(K, cap):
    bb = pt.capacity_bigbox(K)
    ex = pt.equilibrium_lattice(K)
    assert bb.method == "big-box-extrapolation" and ex.method == "exact-solve"
    assert bb.value == pytest.approx(cap, abs=5e-6)
    assert ex.value == pytest.approx(cap, abs=1e-9)
    assert abs(bb.value - cap) <= bb.truncation_bound


def test_pair_subadditivity_strict():
    assert pt.capacity_bigbox([(0, 0, 0), (1, 0, 0)]).value < 2 * pt.capacity_bigbox([(0, 0, 0)]).value


def test_capacity_recurrent_rejected():
    with pytest.raises(ValueError):
        pt.capacity_bigbox([(0, 0)])
    with pytest.raises(ValueError):
        pt.equilibrium_infinite([(0, 0)], 5, 10)


def test_equilibrium_infinite_singleton_within_error():
    res = pt.equilibrium_infinite([(0, 0, 0)], 12, 4000, seed=3)
    assert res.method == "mc-escape"
    err = 3 * res.std_error + res.truncation_bound
    assert abs(res.value - 1 / G0) <= err


def test_equilibrium_infinite_symmetric_pair():
    res = pt.equilibrium_infinite([(0, 0, 0), (1, 0, 0)], 10, 3000, seed=4)
    w = np.asarray(res.measure.weights)
    assert abs(w[0] - w[1]) <= 3 * np.sqrt(2) * np.sqrt(0.25 / 3000)


def test_equilibrium_infinite_guard_precondition():
    with pytest.raises(ValueError):
        pt.equilibrium_infinite([(0, 0, 0), (3, 0, 0)], 4, 10)
