import numpy as np
import pytest

from cylab import disconnect as dc
from cylab.lattice import Geometry
from cylab.rng import stream
from cylab.walk import WalkRun


def _random_set(rng, g, n, height=10):
    return [(int(a), int(b), int(c)) for a, b, c in
            zip(rng.integers(0, g.N, n), rng.integers(0, g.N, n), rng.integers(0, height, n))]


def test_empty_set_does_not_disconnect(cyl3):
    assert not dc.disconnects([], cyl3)


def test_full_level_disconnects(cyl3):
    assert dc.disconnects(cyl3.layer(5), cyl3)
    assert dc.disconnects_unionfind(cyl3.layer(5), cyl3)


def test_level_minus_one_point_does_not(cyl3):
    assert not dc.disconnects(cyl3.layer(5)[1:], cyl3)


def test_bfs_agrees_with_union_find(cyl3):
    rng = np.random.default_rng(0)
    for _ in range(200):
        S = _random_set(rng, cyl3, int(rng.integers(1, 60)))
        assert dc.disconnects(S, cyl3) == dc.disconnects_unionfind(S, cyl3)


def test_monotone_under_inclusion(cyl3):
    rng = np.random.default_rng(1)
    for _ in range(200):
        S = _random_set(rng, cyl3, 40)
        T = S + _random_set(rng, cyl3, 20)
        if dc.disconnects(S, cyl3):
            assert dc.disconnects(T, cyl3)


def test_disconnects_needs_cylinder():
    with pytest.raises(ValueError):
        dc.disconnects([(0, 0, 0)], Geometry.lattice(3))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_degenerate_cylinder_disconnects_at_time_zero(d):
    res = dc.disconnection_time(Geometry.cylinder(d, 1), 0)
    assert res.time == 0 and not res.censored


def test_binary_search_equals_scan_and_is_exact(cyl3):
    for i in range(100):
        run = WalkRun(cyl3, (0, 0, 0), stream(0, "tn-scan", i))
        res = dc.disconnection_time(cyl3, budget=10**6, run=run)
        assert not res.censored
        assert res.time == dc.disconnection_time_scan(run, 10**6)
        trace = [tuple(int(c) for c in p) for p in run.coords[: res.time + 1]]
        assert dc.disconnects(trace, cyl3)
        assert not dc.disconnects(trace[:-1], cyl3)
        assert dc.disconnects_unionfind(trace, cyl3)
        assert not dc.disconnects_unionfind(trace[:-1], cyl3)


def test_censoring_is_reported(cyl3):
    res = dc.disconnection_time(cyl3, 0, budget=5)
    assert res.censored and res.time is None and res.scaled is None


def test_tn_distribution_quantiles_and_rows():
    dist = dc.tn_distribution(Geometry.cylinder(2, 6), 50, seed=3)
    q = dist.quantile([0.1, 0.25, 0.5, 0.75, 0.9])
    assert np.all(np.diff(q) >= 0)
    rows = dist.rows()
    assert len(rows) == 50 and set(rows[0]) == {"seed", "N", "d", "T_N", "T_N/N^{2d}", "censored"}
    p, se = dist.tail([0.0, 1e9])
    assert p[0] == 1.0 and p[1] == 0.0


def test_tn_distribution_reproducible_and_prefix_stable():
    g = Geometry.cylinder(2, 5)
    a = dc.tn_distribution(g, 10, seed=9)
    b = dc.tn_distribution(g, 20, seed=9)
    assert [r.time for r in a.results] == [r.time for r in b.results[:10]]
    assert a.seeds == b.seeds[:10]


def test_tn_distribution_needs_d_at_least_two():
    with pytest.raises(ValueError):
        dc.tn_distribution(Geometry.cylinder(1, 5), 2)


def test_upper_quartile_tight_across_n():
    q75 = [float(dc.tn_distribution(Geometry.cylinder(2, N), 100, seed=4).quantile(0.75))
           for N in (6, 10, 14)]
    assert max(q75) / min(q75) < 2
