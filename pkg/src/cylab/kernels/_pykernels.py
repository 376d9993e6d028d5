"""Pure-Python (numpy) versions of the compiled kernels.

Signatures and results match ``_ckernels`` exactly. The loops are vectorised
over each block of moves, so the fallback is slower than the compiled core
but still usable for moderate problem sizes.
"""

from __future__ import annotations

import numpy as np


def _step_table(D: int) -> np.ndarray:
    table = np.zeros((2 * D, D), dtype=np.int64)
    for axis in range(D):
        table[2 * axis, axis] = 1
        table[2 * axis + 1, axis] = -1
    return table


def lattice_walk(pos, moves, guard, rec_radius, stop_mask, use_stop, t0, rec_t,
                 rec_pos, n_rec):
    """See ``_ckernels.lattice_walk``."""
    D = pos.shape[0]
    n = moves.shape[0]
    if n == 0:
        return 0, 0, n_rec
    path = np.cumsum(_step_table(D)[moves], axis=0)
    path += pos
    amax = np.abs(path).max(axis=1)
    inrec = amax <= rec_radius
    events = amax > guard
    stop = np.zeros(n, dtype=bool)
    if use_stop:
        rows = np.flatnonzero(inrec)
        if rows.size:
            side = 2 * rec_radius + 1
            idx = np.zeros(rows.size, dtype=np.int64)
            for j in range(D):
                idx = idx * side + path[rows, j] + rec_radius
            stop[rows] = np.asarray(stop_mask)[idx] != 0
        events = events | stop
    if events.any():
        k = int(np.argmax(events))
        used = k + 1
        status = 2 if stop[k] else 1
    else:
        used = n
        status = 0
    rows = np.flatnonzero(inrec[:used])
    m = rows.size
    rec_t[n_rec:n_rec + m] = t0 + rows + 1
    rec_pos[n_rec:n_rec + m] = path[rows]
    pos[:] = path[used - 1]
    return used, status, n_rec + m


def local_time_hit(z, moves, counts, offset, thr):
    """See ``_ckernels.local_time_hit``."""
    n = moves.shape[0]
    if n == 0:
        return 0, 0, z
    size = counts.shape[0]
    steps = 1 - 2 * moves.astype(np.int64)
    p = np.empty(n, dtype=np.int64)
    p[0] = z
    if n > 1:
        np.cumsum(steps[:-1], out=p[1:])
        p[1:] += z
    idx = p + offset
    bad = (idx < 0) | (idx >= size)
    first_bad = int(np.argmax(bad)) if bad.any() else n
    q = idx[:first_bad]
    if q.size:
        order = np.argsort(q, kind="stable")
        sq = q[order]
        ar = np.arange(q.size)
        starts = np.empty(q.size, dtype=bool)
        starts[0] = True
        starts[1:] = sq[1:] != sq[:-1]
        grp = np.maximum.accumulate(np.where(starts, ar, 0))
        occ = np.empty(q.size, dtype=np.int64)
        occ[order] = ar - grp + 1
        hits = counts[q] + occ >= thr
        if hits.any():
            i = int(np.argmax(hits))
            u, c = np.unique(q[:i + 1], return_counts=True)
            counts[u] += c
            return i, 1, int(p[i])
        u, c = np.unique(q, return_counts=True)
        counts[u] += c
    if first_bad < n:
        return first_bad, 3, int(p[first_bad])
    return n, 0, int(z + steps.sum())


def cylinder_slab_exit(state, moves, N, d, z_lo, z_hi):
    """See ``_ckernels.cylinder_slab_exit``."""
    n = moves.shape[0]
    y, z = int(state[0]), int(state[1])
    if z <= z_lo or z >= z_hi:
        return 0, 1
    mv = np.asarray(moves)
    dz = (mv == 2 * d).astype(np.int64) - (mv == 2 * d + 1)
    zpath = z + np.cumsum(dz)
    out = (zpath <= z_lo) | (zpath >= z_hi)
    if out.any():
        used = int(np.argmax(out)) + 1
        status = 1
    else:
        used = n
        status = 0
    prefix = mv[:used]
    counts = np.bincount(prefix, minlength=2 * d + 2)
    stride = 1
    new_y = 0
    for axis in range(d):
        coord = (y // stride) % N
        coord = (coord + int(counts[2 * axis]) - int(counts[2 * axis + 1])) % N
        new_y += coord * stride
        stride *= N
    state[0] = new_y
    if used:
        state[1] = int(zpath[used - 1])
    return used, status


def slab_crossing(fv, threshold, N, d):
    """See ``_ckernels.slab_crossing``."""
    H = fv.shape[0]
    if H == 0:
        return False
    free = np.asarray(fv) > threshold
    shape = (H,) + (N,) * d
    free = free.reshape(shape)
    reach = np.zeros(shape, dtype=bool)
    reach[H - 1] = free[H - 1]
    while True:
        if reach[0].any():
            return True
        grown = reach.copy()
        grown[:-1] |= reach[1:]
        grown[1:] |= reach[:-1]
        for axis in range(1, d + 1):
            grown |= np.roll(reach, 1, axis=axis)
            grown |= np.roll(reach, -1, axis=axis)
        grown &= free
        if np.array_equal(grown, reach):
            return False
        reach = grown
