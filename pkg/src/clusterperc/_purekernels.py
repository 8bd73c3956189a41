"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same signatures, same return values, same tie-breaking; only slower.
"""

import numpy as np


def _find(parent, ox, oy, x, steps):
    root = x
    tx = ty = 0
    while parent[root] != root:
        tx += ox[root]
        ty += oy[root]
        root = parent[root]
        steps[0] += 1
    cur = x
    while cur != root:
        nxt = parent[cur]
        sx, sy = ox[cur], oy[cur]
        parent[cur] = root
        ox[cur] = tx
        oy[cur] = ty
        tx -= sx
        ty -= sy
        cur = nxt
    if x == root:
        return root, 0, 0
    return root, ox[x], oy[x]


def _link(parent, size, ox, oy, flags, u, v, ex, ey, state, wraps, step):
    # state = [largest, find_steps]; flags bit 0 = winds in x, bit 1 = in y
    steps = [0]
    ru, ux, uy = _find(parent, ox, oy, u, steps)
    rv, vx, vy = _find(parent, ox, oy, v, steps)
    state[1] += steps[0]
    wx = ux + ex - vx
    wy = uy + ey - vy
    if ru == rv:
        if wx or wy:
            if wraps[0] < 0:
                wraps[0] = step
            if wx and wraps[1] < 0:
                wraps[1] = step
            if wy and wraps[2] < 0:
                wraps[2] = step
            f = flags[ru] | (wx != 0) | ((wy != 0) << 1)
            flags[ru] = f
            if f == 3 and wraps[3] < 0:
                wraps[3] = step
        return
    f = flags[ru] | flags[rv]
    if size[ru] > size[rv] or (size[ru] == size[rv] and ru < rv):
        parent[rv] = ru
        ox[rv], oy[rv] = wx, wy
        size[ru] += size[rv]
        s = size[ru]
        flags[ru] = f
    else:
        parent[ru] = rv
        ox[ru], oy[ru] = -wx, -wy
        size[rv] += size[ru]
        s = size[rv]
        flags[rv] = f
    if f == 3 and wraps[3] < 0:
        wraps[3] = step
    if s > state[0]:
        state[0] = s


def bond_sweep(n_nodes, u, v, dx, dy, order, first_size):
    parent = list(range(n_nodes))
    size = [1] * n_nodes
    ox = [0] * n_nodes
    oy = [0] * n_nodes
    flags = [0] * n_nodes
    u, v, dx, dy = u.tolist(), v.tolist(), dx.tolist(), dy.tolist()
    order = order.tolist()
    lcc = [0] * (len(order) + 1)
    wraps = [-1, -1, -1, -1]
    state = [first_size, 0]
    lcc[0] = first_size
    for i, k in enumerate(order):
        _link(parent, size, ox, oy, flags, u[k], v[k], dx[k], dy[k], state, wraps, i + 1)
        lcc[i + 1] = state[0]
    return (np.asarray(lcc, dtype=np.int32), np.asarray(wraps, dtype=np.int64),
            state[1])


def site_sweep(n_nodes, indptr, nbr, ndx, ndy, order):
    parent = list(range(n_nodes))
    size = [1] * n_nodes
    ox = [0] * n_nodes
    oy = [0] * n_nodes
    flags = [0] * n_nodes
    occ = [False] * n_nodes
    indptr, nbr = indptr.tolist(), nbr.tolist()
    ndx, ndy = ndx.tolist(), ndy.tolist()
    order = order.tolist()
    lcc = [0] * (len(order) + 1)
    wraps = [-1, -1, -1, -1]
    state = [0, 0]
    for i, s in enumerate(order):
        occ[s] = True
        if state[0] < 1:
            state[0] = 1
        for j in range(indptr[s], indptr[s + 1]):
            t = nbr[j]
            if occ[t]:
                _link(parent, size, ox, oy, flags, s, t, ndx[j], ndy[j], state, wraps, i + 1)
        lcc[i + 1] = state[0]
    return (np.asarray(lcc, dtype=np.int32), np.asarray(wraps, dtype=np.int64),
            state[1])
