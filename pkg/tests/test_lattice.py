from collections import Counter
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylab.lattice import (BoxSpec, Geometry, boundary, decode_torus, embed_slab, encode_torus,
                           interior_boundary)


def test_cylinder_neighbors_d2_n5():
    g = Geometry.cylinder(2, 5)
    assert sorted(g.neighbors((0, 0, 0))) == sorted(
        [(1, 0, 0), (4, 0, 0), (0, 1, 0), (0, 4, 0), (0, 0, 1), (0, 0, -1)])


def test_degenerate_torus_keeps_multi_edges():
    g = Geometry.cylinder(2, 1)
    c = Counter(g.neighbors((0, 0, 7)))
    assert c == Counter({(0, 0, 7): 4, (0, 0, 8): 1, (0, 0, 6): 1})


def test_n2_torus_duplicates_retained():
    g = Geometry.cylinder(1, 2)
    assert Counter(g.neighbors((0, 0)))[(1, 0)] == 2


def test_lattice_neighbors():
    g = Geometry.lattice(3)
    assert sorted(g.neighbors((0, 0, 0))) == sorted(
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])


@given(d=st.integers(1, 3), N=st.integers(3, 7), z=st.integers(-20, 20))
def test_neighbors_are_distinct_unit_moves(d, N, z):
    g = Geometry.cylinder(d, N)
    p = (0,) * d + (z,)
    nb = g.neighbors(p)
    assert len(nb) == 2 * (d + 1) == len(set(nb))
    assert all(g.sup_distance(p, q) == 1 for q in nb)


def test_invalid_geometries():
    with pytest.raises(ValueError):
        Geometry.cylinder(0, 3)
    with pytest.raises(ValueError):
        Geometry.cylinder(2, 0)
    with pytest.raises(ValueError):
        Geometry("torus", 2, 3)


def test_boundaries_of_empty_set():
    g = Geometry.lattice(3)
    assert boundary([], g) == frozenset() and interior_boundary([], g) == frozenset()


def test_boundary_of_point_in_z2():
    g = Geometry.lattice(2)
    assert boundary([(0, 0)], g) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert interior_boundary([(0, 0)], g) == {(0, 0)}


def test_interior_boundary_of_box_is_sphere():
    g = Geometry.lattice(3)
    U = g.ball((0, 0, 0), 2)
    brute = {p for p in product(range(-3, 4), repeat=3) if max(map(abs, p)) == 2}
    assert interior_boundary(U, g) == brute == g.sphere((0, 0, 0), 2)
    assert boundary(U, g) <= {p for p in product(range(-3, 4), repeat=3) if max(map(abs, p)) == 3}


def test_box_membership_matches_sup_norm():
    box = BoxSpec((1, -1, 0), 2)
    pts = np.array(list(product(range(-3, 5), repeat=3)))
    inside = box.contains_array(pts)
    assert np.array_equal(inside, np.abs(pts - [1, -1, 0]).max(axis=1) <= 2)
    assert box.size == 125 and len(list(box.points())) == 125
    idx = box.index(box.points_array())
    assert np.array_equal(idx, np.arange(125))


@given(st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_torus_codec_roundtrip(y):
    flat = encode_torus(np.array(y), 5)
    assert decode_torus(flat, 5, 3).tolist() == y


def test_embed_slab_is_isomorphism():
    g = Geometry.cylinder(2, 9)
    emb = embed_slab(4, 2, g)
    cyl = emb.cylinder_points()
    images = {emb.to_lattice(p) for p in cyl}
    assert len(cyl) == len(images) == 125
    lat = Geometry.lattice(3)
    pairs = 0
    for p in cyl:
        for q in g.neighbors(p):
            if q in cyl:
                pairs += 1
                assert lat.sup_distance(emb.to_lattice(p), emb.to_lattice(q)) == 1
                assert sum(abs(a - b) for a, b in zip(emb.to_lattice(p), emb.to_lattice(q))) == 1
    assert pairs // 2 == 300
    for q in emb.lattice_points():
        assert emb.to_lattice(emb.to_cylinder(q)) == q


def test_embed_slab_radius_zero_and_wrap_error():
    g = Geometry.cylinder(2, 5)
    assert len(embed_slab(0, 0, g).cylinder_points()) == 1
    with pytest.raises(ValueError):
        embed_slab(0, 3, g)


def test_geometry_config_roundtrip():
    g = Geometry.cylinder(2, 7)
    assert Geometry.from_config(g.to_config()) == g
