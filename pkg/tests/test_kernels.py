import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylab import kernels

BACKENDS = kernels.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def both(name):
    return kernels.get_backend("compiled"), kernels.get_backend("python")


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_env_var_forces_python_fallback():
    env = dict(os.environ, CYLAB_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", "import cylab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), guard=st.integers(1, 12), rec=st.integers(0, 4),
       use_stop=st.booleans())
def test_lattice_walk_backends_agree(seed, guard, rec, use_stop):
    rec = min(rec, guard)
    rng = np.random.default_rng(seed)
    moves = rng.integers(0, 6, size=500, dtype=np.uint8)
    side = 2 * rec + 1
    mask = (rng.random(side ** 3) < 0.1).astype(np.uint8)
    outs = []
    for mod in both("lattice_walk"):
        pos = np.zeros(3, dtype=np.int64)
        rt = np.empty(502, dtype=np.int64)
        rp = np.empty((502, 3), dtype=np.int64)
        used, status, n = mod.lattice_walk(pos, moves, guard, rec, mask, use_stop, 7, rt, rp, 0)
        outs.append((used, status, n, pos.tolist(), rt[:n].tolist(), rp[:n].tolist()))
    assert outs[0] == outs[1]


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), thr=st.integers(1, 30), half=st.integers(2, 40))
def test_local_time_hit_backends_agree(seed, thr, half):
    moves = np.random.default_rng(seed).integers(0, 2, size=2000, dtype=np.uint8)
    outs = []
    for mod in both("local_time_hit"):
        counts = np.zeros(2 * half + 1, dtype=np.int64)
        res = mod.local_time_hit(0, moves, counts, half, thr)
        outs.append((tuple(res), counts.tolist()))
    assert outs[0] == outs[1]


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 6), d=st.integers(1, 3),
       lo=st.integers(-15, -1), hi=st.integers(1, 15))
def test_slab_exit_backends_agree(seed, N, d, lo, hi):
    moves = np.random.default_rng(seed).integers(0, 2 * (d + 1), size=3000, dtype=np.uint8)
    outs = []
    for mod in both("cylinder_slab_exit"):
        state = np.array([N ** d - 1, 0], dtype=np.int64)
        res = mod.cylinder_slab_exit(state, moves, N, d, lo, hi)
        outs.append((tuple(res), state.tolist()))
    assert outs[0] == outs[1]


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 5), rows=st.integers(1, 8),
       thr=st.integers(0, 10))
def test_slab_crossing_backends_agree(seed, N, rows, thr):
    fv = np.random.default_rng(seed).integers(0, 12, size=(rows, N * N), dtype=np.int64)
    a, b = both("slab_crossing")
    assert bool(a.slab_crossing(fv, thr, N, 2)) == bool(b.slab_crossing(fv, thr, N, 2))


def test_slab_crossing_full_cut_blocks():
    fv = np.full((5, 9), 100, dtype=np.int64)
    fv[2, :] = 0
    for mod in (kernels.get_backend(b) for b in BACKENDS):
        assert not mod.slab_crossing(fv, 0, 3, 2)
        assert mod.slab_crossing(fv, -1, 3, 2)


def test_slab_crossing_uses_torus_wrap():
    # top row free at column 0, bottom row free at column 2; the middle row
    # joins them only through the wrap 0 <-> N-1
    fv = np.zeros((3, 3), dtype=np.int64)
    fv[2, 0] = fv[1, 0] = fv[1, 2] = fv[0, 2] = 1
    for mod in (kernels.get_backend(b) for b in BACKENDS):
        assert mod.slab_crossing(fv, 0, 3, 1)
    fv[1, 2] = 0
    for mod in (kernels.get_backend(b) for b in BACKENDS):
        assert not mod.slab_crossing(fv, 0, 3, 1)
