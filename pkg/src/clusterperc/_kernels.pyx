# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Newman-Ziff kernels.

Both sweeps keep, for every node, a parent pointer and the unwrapped
displacement from the node to its parent. A bond closing a cycle whose
net displacement is nonzero marks a cluster that winds around the torus.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64


cdef inline i32 _find(i32* parent, i32* ox, i32* oy, i32 x,
                      i32* rx, i32* ry, i64* steps) noexcept nogil:
    cdef i32 root = x
    cdef i32 tx = 0, ty = 0, cur, nxt, sx, sy
    while parent[root] != root:
        tx += ox[root]
        ty += oy[root]
        root = parent[root]
        steps[0] += 1
    cur = x
    while cur != root:
        nxt = parent[cur]
        sx = ox[cur]
        sy = oy[cur]
        parent[cur] = root
        ox[cur] = tx
        oy[cur] = ty
        tx -= sx
        ty -= sy
        cur = nxt
    # offsets of x relative to root after compression
    if x != root:
        rx[0] = ox[x]
        ry[0] = oy[x]
    else:
        rx[0] = 0
        ry[0] = 0
    return root


cdef inline void _link(i32* parent, i32* size, i32* ox, i32* oy,
                       cnp.uint8_t* flags, i32 u, i32 v, i32 ex, i32 ey,
                       i32* largest, i64* wraps, i64 step,
                       i64* steps) noexcept nogil:
    # wraps: first step with [any, x, y, both]-direction winding, else -1
    # flags[root]: bit 0 = cluster winds in x, bit 1 = winds in y
    cdef i32 ru, rv, ux, uy, vx, vy, wx, wy, s
    cdef cnp.uint8_t f
    ru = _find(parent, ox, oy, u, &ux, &uy, steps)
    rv = _find(parent, ox, oy, v, &vx, &vy, steps)
    wx = ux + ex - vx
    wy = uy + ey - vy
    if ru == rv:
        if wx != 0 or wy != 0:
            if wraps[0] < 0:
                wraps[0] = step
            if wx != 0 and wraps[1] < 0:
                wraps[1] = step
            if wy != 0 and wraps[2] < 0:
                wraps[2] = step
            f = flags[ru] | (wx != 0) | ((wy != 0) << 1)
            flags[ru] = f
            if f == 3 and wraps[3] < 0:
                wraps[3] = step
        return
    f = flags[ru] | flags[rv]
    if size[ru] > size[rv] or (size[ru] == size[rv] and ru < rv):
        parent[rv] = ru
        ox[rv] = wx
        oy[rv] = wy
        size[ru] += size[rv]
        s = size[ru]
        flags[ru] = f
    else:
        parent[ru] = rv
        ox[ru] = -wx
        oy[ru] = -wy
        size[rv] += size[ru]
        s = size[rv]
        flags[rv] = f
    if f == 3 and wraps[3] < 0:
        wraps[3] = step
    if s > largest[0]:
        largest[0] = s


def bond_sweep(int n_nodes, const i32[::1] u, const i32[::1] v,
               const i32[::1] dx, const i32[::1] dy, const i64[::1] order,
               int first_size):
    """Add edges in ``order``; return (lcc sizes, wraps[4], find steps)."""
    cdef Py_ssize_t m = order.shape[0]
    cdef Py_ssize_t i, k
    cdef i32[::1] parent = np.arange(n_nodes, dtype=np.int32)
    cdef i32[::1] size = np.ones(n_nodes, dtype=np.int32)
    cdef i32[::1] ox = np.zeros(n_nodes, dtype=np.int32)
    cdef i32[::1] oy = np.zeros(n_nodes, dtype=np.int32)
    cdef cnp.uint8_t[::1] flags = np.zeros(n_nodes, dtype=np.uint8)
    lcc_arr = np.empty(m + 1, dtype=np.int32)
    cdef i32[::1] lcc = lcc_arr
    wraps_arr = np.full(4, -1, dtype=np.int64)
    cdef i64[::1] wraps = wraps_arr
    cdef i32 largest = first_size
    cdef i64 steps = 0
    lcc[0] = largest
    with nogil:
        for i in range(m):
            k = order[i]
            _link(&parent[0], &size[0], &ox[0], &oy[0], &flags[0],
                  u[k], v[k], dx[k], dy[k], &largest, &wraps[0], i + 1,
                  &steps)
            lcc[i + 1] = largest
    return lcc_arr, wraps_arr, steps


def site_sweep(int n_nodes, const i64[::1] indptr, const i32[::1] nbr,
               const i32[::1] ndx, const i32[::1] ndy, const i64[::1] order):
    """Occupy sites in ``order`` with every bond present.

    ``nbr[indptr[s]:indptr[s+1]]`` lists the neighbours of site ``s`` and
    ``ndx/ndy`` the displacement from ``s`` to each of them.
    """
    cdef Py_ssize_t m = order.shape[0]
    cdef Py_ssize_t i, j
    cdef i32 s, t
    cdef i32[::1] parent = np.arange(n_nodes, dtype=np.int32)
    cdef i32[::1] size = np.ones(n_nodes, dtype=np.int32)
    cdef i32[::1] ox = np.zeros(n_nodes, dtype=np.int32)
    cdef i32[::1] oy = np.zeros(n_nodes, dtype=np.int32)
    cdef cnp.uint8_t[::1] occ = np.zeros(n_nodes, dtype=np.uint8)
    cdef cnp.uint8_t[::1] flags = np.zeros(n_nodes, dtype=np.uint8)
    lcc_arr = np.empty(m + 1, dtype=np.int32)
    cdef i32[::1] lcc = lcc_arr
    wraps_arr = np.full(4, -1, dtype=np.int64)
    cdef i64[::1] wraps = wraps_arr
    cdef i32 largest = 0
    cdef i64 steps = 0
    lcc[0] = 0
    with nogil:
        for i in range(m):
            s = <i32>order[i]
            occ[s] = 1
            if largest < 1:
                largest = 1
            for j in range(indptr[s], indptr[s + 1]):
                t = nbr[j]
                if occ[t]:
                    _link(&parent[0], &size[0], &ox[0], &oy[0], &flags[0],
                          s, t, ndx[j], ndy[j], &largest, &wraps[0], i + 1,
                          &steps)
            lcc[i + 1] = largest
    return lcc_arr, wraps_arr, steps
