# cython: language_level=3
"""Compiled hot loops.

Every function here has a twin in ``_pykernels`` with the same signature and
bit-identical results; the dispatcher in ``cylab.kernels`` picks one at import.

Move encoding shared by all walk kernels: move ``m`` changes coordinate
``m >> 1`` by ``+1`` when ``m`` is even and by ``-1`` when it is odd.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()


def lattice_walk(int64_t[::1] pos, const uint8_t[::1] moves, int64_t guard,
                 int64_t rec_radius, const uint8_t[::1] stop_mask, bint use_stop,
                 int64_t t0, int64_t[::1] rec_t, int64_t[:, ::1] rec_pos,
                 int64_t n_rec):
    """Walk on Z^D until the guard box is left, the stop set is hit or moves run out.

    ``pos`` is updated in place. Visits inside the record box ``[-rec_radius,
    rec_radius]^D`` are appended to ``rec_t``/``rec_pos`` starting at row
    ``n_rec``; times are ``t0 + i + 1`` for the position after move ``i``.

    Returns
    -------
    tuple
        ``(used, status, n_rec)`` with status 0 (moves exhausted), 1 (left
        ``[-guard, guard]^D``) or 2 (entered a cell flagged in ``stop_mask``).
    """
    cdef Py_ssize_t D = pos.shape[0]
    cdef Py_ssize_t n = moves.shape[0]
    cdef Py_ssize_t i, j
    cdef int64_t side = 2 * rec_radius + 1
    cdef int64_t c, idx, amax
    cdef uint8_t m
    cdef bint inside
    for i in range(n):
        m = moves[i]
        if m & 1:
            pos[m >> 1] -= 1
        else:
            pos[m >> 1] += 1
        amax = 0
        for j in range(D):
            c = pos[j]
            if c < 0:
                c = -c
            if c > amax:
                amax = c
        if amax <= rec_radius:
            rec_t[n_rec] = t0 + i + 1
            idx = 0
            for j in range(D):
                rec_pos[n_rec, j] = pos[j]
                idx = idx * side + pos[j] + rec_radius
            n_rec += 1
            if use_stop and stop_mask[idx]:
                return i + 1, 2, n_rec
        if amax > guard:
            return i + 1, 1, n_rec
    return n, 0, n_rec


def local_time_hit(int64_t z, const uint8_t[::1] moves, int64_t[::1] counts,
                   int64_t offset, int64_t thr):
    """Nearest-neighbour walk on Z counting visits until one level reaches ``thr``.

    The current position ``z`` has not been counted yet. Move 0 is ``+1`` and
    move 1 is ``-1``. ``counts[z + offset]`` holds visit counts.

    Returns
    -------
    tuple
        ``(i, status, z)``. Status 1 means the visit with index ``i`` (relative
        to this call) brought a level to ``thr``; status 0 means all moves were
        used and ``z`` is the uncounted next position; status 3 means ``z``
        fell outside the ``counts`` array and was not counted.
    """
    cdef Py_ssize_t n = moves.shape[0]
    cdef Py_ssize_t size = counts.shape[0]
    cdef Py_ssize_t i = 0
    cdef int64_t idx
    while True:
        if i == n:
            return n, 0, z
        idx = z + offset
        if idx < 0 or idx >= size:
            return i, 3, z
        counts[idx] += 1
        if counts[idx] >= thr:
            return i, 1, z
        if moves[i]:
            z -= 1
        else:
            z += 1
        i += 1


def cylinder_slab_exit(int64_t[::1] state, const uint8_t[::1] moves, int64_t N,
                       int64_t d, int64_t z_lo, int64_t z_hi):
    """Walk on (Z/NZ)^d x Z until the height leaves the open interval (z_lo, z_hi).

    ``state`` is ``[y_flat, z]`` and is updated in place; ``y_flat`` encodes
    the torus point as ``sum_i y_i N^i``.

    Returns
    -------
    tuple
        ``(used, status)`` with status 1 on exit and 0 when moves ran out.
    """
    cdef Py_ssize_t n = moves.shape[0]
    cdef Py_ssize_t i
    cdef int64_t y = state[0]
    cdef int64_t z = state[1]
    cdef int64_t axis, k, c, delta, is_z
    cdef int64_t coords[33]
    cdef uint8_t m
    if d > 32:
        raise ValueError("torus dimension above 32 is not supported")
    if z <= z_lo or z >= z_hi:
        return 0, 1
    for k in range(d):
        coords[k] = y % N
        y //= N
    coords[d] = 0
    for i in range(n):
        # branch-free update: vertical moves land in the dummy slot coords[d]
        m = moves[i]
        axis = m >> 1
        delta = 1 - 2 * <int64_t>(m & 1)
        is_z = axis == d
        z += is_z * delta
        c = coords[axis] + delta
        c += N * (c < 0) - N * (c >= N)
        coords[axis] = c
        if z <= z_lo or z >= z_hi:
            state[0] = _encode(coords, d, N)
            state[1] = z
            return i + 1, 1
    state[0] = _encode(coords, d, N)
    state[1] = z
    return n, 0


cdef inline int64_t _encode(int64_t* coords, int64_t d, int64_t N) noexcept:
    cdef int64_t y = 0
    cdef Py_ssize_t k
    for k in range(d - 1, -1, -1):
        y = y * N + coords[k]
    return y


def slab_crossing(const int64_t[:, ::1] fv, int64_t threshold, int64_t N,
                  int64_t d):
    """Breadth-first search through free cells of a cylinder slab.

    Row ``r`` of ``fv`` is one height level and column ``c`` a flat torus
    index. A cell is free when ``fv[r, c] > threshold``. The search starts
    from every free cell of the top row and succeeds on reaching row 0.

    Returns
    -------
    bool
        True when the top and bottom rows are joined by free cells.
    """
    cdef Py_ssize_t H = fv.shape[0]
    cdef Py_ssize_t M = fv.shape[1]
    cdef Py_ssize_t total = H * M
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen_arr = np.zeros(total, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] queue_arr = np.empty(total, dtype=np.int64)
    cdef uint8_t[::1] seen = seen_arr
    cdef int64_t[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0
    cdef int64_t cell, r, c, nb, stride, coord, k
    cdef Py_ssize_t c0
    if H == 0:
        return False
    for c0 in range(M):
        if fv[H - 1, c0] > threshold:
            cell = (H - 1) * M + c0
            seen[cell] = 1
            queue[tail] = cell
            tail += 1
    while head < tail:
        cell = queue[head]
        head += 1
        r = cell // M
        c = cell - r * M
        if r == 0:
            return True
        # vertical neighbours
        nb = cell - M
        if not seen[nb] and fv[r - 1, c] > threshold:
            seen[nb] = 1
            queue[tail] = nb
            tail += 1
        if r + 1 < H:
            nb = cell + M
            if not seen[nb] and fv[r + 1, c] > threshold:
                seen[nb] = 1
                queue[tail] = nb
                tail += 1
        stride = 1
        for k in range(d):
            coord = (c // stride) % N
            if coord == N - 1:
                nb = c - (N - 1) * stride
            else:
                nb = c + stride
            if not seen[r * M + nb] and fv[r, nb] > threshold:
                seen[r * M + nb] = 1
                queue[tail] = r * M + nb
                tail += 1
            if coord == 0:
                nb = c + (N - 1) * stride
            else:
                nb = c - stride
            if not seen[r * M + nb] and fv[r, nb] > threshold:
                seen[r * M + nb] = 1
                queue[tail] = r * M + nb
                tail += 1
            stride *= N
    return False
