"""Tests for interlacement clouds, occupancy and the return/departure decomposition."""

import json
import math

import numpy as np
import pytest
from scipy import stats

from cylab.interlace import (CloudSampler, equilibrium_box, load_occupancy, occupancy,
                             returns_departures, sample_cloud, truncated_occupancy,
                             vacancy_probability)
from cylab.lattice import BoxSpec
from cylab.potential import capacity_bigbox, equilibrium_lattice, lattice_green

G0 = 1.516386059151978
ORIGIN = (0, 0, 0)


def test_equilibrium_box_matches_direct_solve():
    sym = equilibrium_box(1)
    pts = BoxSpec(ORIGIN, 1).points_array()
    direct = equilibrium_lattice([tuple(int(c) for c in p) for p in pts])
    assert sym.value == pytest.approx(direct.value, rel=1e-10)


def test_equilibrium_box_radius_zero_is_singleton():
    assert equilibrium_box(0).value == pytest.approx(1 / G0, rel=1e-10)


def test_zero_level_gives_empty_cloud():
    s = sample_cloud([ORIGIN], 0.0, rng=1)
    assert s.trajectories == []
    assert occupancy(s, 0.0).vacant().all()


def test_cloud_size_is_poisson_with_mean_u_cap():
    sampler = CloudSampler([ORIGIN, (1, 0, 0)], guard_radius=4)
    rng = np.random.default_rng(7)
    u = 1.5
    counts = np.array([rng.poisson(u * sampler.cap) for _ in range(10000)])
    direct = [len(sampler.sample(u, rng).trajectories) for _ in range(300)]
    mean = u * sampler.cap
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / len(counts))
    assert abs(np.mean(direct) - mean) <= 3 * math.sqrt(mean / len(direct))


def test_labels_uniform_on_level_interval():
    sampler = CloudSampler([ORIGIN], guard_radius=4)
    s = sampler.sample(2.0, np.random.default_rng(3), n=2000)
    labels = s.labels()
    assert labels.min() >= 0 and labels.max() <= 2.0
    assert stats.kstest(labels / 2.0, "uniform").pvalue > 0.001


def test_starts_follow_normalised_equilibrium_measure():
    K = [ORIGIN, (1, 0, 0), (0, 1, 0)]
    sampler = CloudSampler(K, guard_radius=6)
    s = sampler.sample(1.0, np.random.default_rng(11), n=6000)
    eq = equilibrium_lattice(K)
    w = np.asarray(eq.measure.weights)
    index = {p: i for i, p in enumerate(eq.measure.support)}
    obs = np.bincount([index[t.start] for t in s.trajectories], minlength=len(w))
    exp = w / w.sum() * len(s.trajectories)
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_singleton_vacancy_matches_green_function():
    sampler = CloudSampler([ORIGIN], guard_radius=6)
    rng = np.random.default_rng(5)
    n = 10000
    vac = sum(occupancy(sampler.sample(1.0, rng), 1.0).is_vacant([ORIGIN]) for _ in range(n))
    p = vacancy_probability([ORIGIN], 1.0, 1 / G0)
    assert p == pytest.approx(math.exp(-1 / G0))
    assert abs(vac / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_occupancy_is_monotone_in_level():
    K = [tuple(int(c) for c in p) for p in BoxSpec(ORIGIN, 1).points_array()]
    sampler = CloudSampler(K, eq=equilibrium_box(1))
    s = sampler.sample(3.0, np.random.default_rng(2))
    prev = occupancy(s, 0.0).occupied
    assert not prev.any()
    for u in (0.5, 1.0, 2.0, 3.0):
        cur = occupancy(s, u).occupied
        assert np.all(cur >= prev)
        prev = cur
    with pytest.raises(ValueError):
        occupancy(s, 3.5)


def test_window_outside_K_is_rejected():
    s = sample_cloud([ORIGIN], 1.0, rng=0)
    with pytest.raises(ValueError):
        occupancy(s, 1.0, [(1, 0, 0)])


def test_truncated_occupancy_is_contained_in_full_occupancy():
    K = [tuple(int(c) for c in p) for p in BoxSpec(ORIGIN, 2).points_array()]
    sampler = CloudSampler(K, guard_radius=12, record_radius=5, eq=equilibrium_box(2))
    rng = np.random.default_rng(9)
    for _ in range(5):
        s = sampler.sample(2.0, rng)
        full = occupancy(s, 2.0).occupied
        for C in (2, 3, 4):
            trunc = truncated_occupancy(s, 2.0, C).occupied
            assert np.all(trunc <= full)
    with pytest.raises(ValueError):
        truncated_occupancy(s, 2.0, 5)


def test_truncation_at_guard_equals_occupancy_without_reinjection():
    K = [tuple(int(c) for c in p) for p in BoxSpec(ORIGIN, 1).points_array()]
    sampler = CloudSampler(K, guard_radius=5, eq=equilibrium_box(1), reinject=False)
    rng = np.random.default_rng(4)
    for _ in range(10):
        s = sampler.sample(2.0, rng)
        assert all(len(t.seg_start) == 1 for t in s.trajectories)
        a = truncated_occupancy(s, 1.5, 5).occupied
        b = occupancy(s, 1.5).occupied
        assert np.array_equal(a, b)


def test_returns_and_departures_interleave_and_partition_visits():
    K = [tuple(int(c) for c in p) for p in BoxSpec(ORIGIN, 1).points_array()]
    sampler = CloudSampler(K, guard_radius=8, record_radius=6, eq=equilibrium_box(1))
    s = sampler.sample(1.0, np.random.default_rng(12), n=200)
    seen_multi = False
    for t in s.trajectories:
        R, Dp = returns_departures(t, 1, 3)
        assert R and R[0] == t.rec_t[0]
        assert len(Dp) in (len(R), len(R) - 1)
        merged = [x for pair in zip(R, Dp) for x in pair] + R[len(Dp):]
        assert all(a < b for a, b in zip(merged, merged[1:]))
        seen_multi |= len(R) > 1
        # every visit to A lies in some [R_k, D_k]
        sup = np.abs(t.rec_pos).max(axis=1)
        for time in t.rec_t[sup <= 1]:
            k = np.searchsorted(R, time, side="right") - 1
            assert k >= 0
            assert k >= len(Dp) or time <= Dp[k]
    assert seen_multi
    with pytest.raises(ValueError):
        returns_departures(s.trajectories[0], 3, 3)


def test_reinjection_return_probability_below_bound():
    sampler = CloudSampler([ORIGIN], guard_radius=10)
    y = np.array([[11, 0, 0]])  # first site outside the guard box
    p = float(lattice_green(y, 3)[0]) * sampler.cap
    assert 0 < p <= sampler.return_bound + 1e-12


def test_capacity_of_sampled_set_matches_big_box():
    sampler = CloudSampler([ORIGIN, (1, 0, 0)])
    bb = capacity_bigbox([ORIGIN, (1, 0, 0)])
    assert abs(sampler.cap - bb.value) <= bb.truncation_bound


def test_sample_serialises_to_json():
    sampler = CloudSampler([ORIGIN], guard_radius=4, keep_moves=True)
    s = sampler.sample(1.0, np.random.default_rng(1), n=3)
    data = json.loads(s.to_json())
    assert len(data["trajectories"]) == 3
    for t, raw in zip(s.trajectories, data["trajectories"]):
        assert raw["label"] == t.label
        assert tuple(raw["start"]) == t.start
        assert all(set(seg["moves"]) <= set("012345") for seg in raw["segments"])


def test_occupancy_export_round_trip(tmp_path):
    K = [tuple(int(c) for c in p) for p in BoxSpec(ORIGIN, 1).points_array()]
    s = CloudSampler(K, eq=equilibrium_box(1)).sample(2.0, np.random.default_rng(8))
    field = occupancy(s, 2.0)
    path = tmp_path / "field.bin"
    field.save(path, seed=8)
    back, header = load_occupancy(path)
    assert header["seed"] == 8 and header["u"] == 2.0
    assert np.array_equal(back.occupied, field.occupied)
    assert np.array_equal(back.window, field.window)


def test_two_dimensional_lattice_is_rejected():
    with pytest.raises(ValueError):
        CloudSampler([(0, 0)])
