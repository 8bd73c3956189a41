"""Finite 2D lattices on an L x L grid of node indices.

Node ``(x, y)`` has index ``y * L + x``. Every edge is stored once as
``(u, v)`` with ``u < v`` together with the unwrapped displacement from
``u`` to ``v``; the union-find sweeps use that displacement to detect
clusters that wind around a periodic lattice.

Geometries
----------
square
    Neighbours (+-1, 0) and (0, +-1).
triangular
    Square neighbours plus the (+1, +1) / (-1, -1) diagonal.
hexagonal
    Brick-wall honeycomb: left and right neighbours, plus one vertical
    neighbour, up when ``x + y`` is even and down otherwise. Needs even L.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng


class Geometry(str, enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    HEXAGONAL = "hexagonal"

    @property
    def degree(self) -> int:
        return _DEGREE[self]


_DEGREE = {Geometry.SQUARE: 4, Geometry.TRIANGULAR: 6, Geometry.HEXAGONAL: 3}


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Pairing(str, enum.Enum):
    STRAIGHT_THROUGH = "straight_through"


def _frozen(a, dtype=np.int32):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Lattice:
    geometry: Geometry
    L: int
    boundary: Boundary
    u: np.ndarray
    v: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    active: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.L * self.L

    @property
    def M(self) -> int:
        return len(self.u)

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def wrap_detection(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def edges(self) -> np.ndarray:
        """(M, 2) array of ``(u, v)`` pairs in canonical order."""
        return np.column_stack([self.u, self.v])

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.u, self.v]), minlength=self.N)

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.L == other.L
            and self.boundary == other.boundary
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("u", "v", "dx", "dy", "active")
            )
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ContractedGraph:
    """Active nodes of a square lattice joined through transparent nodes.

    ``hops[k]`` counts the transparent nodes edge ``k`` passes through.
    """

    L: int
    active_nodes: np.ndarray
    u: np.ndarray
    v: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    hops: np.ndarray
    epsilon: float
    target_epsilon: float
    pairing: Pairing = Pairing.STRAIGHT_THROUGH

    geometry = Geometry.SQUARE
    boundary = Boundary.PERIODIC
    # displacement along a straight-through chain is the hop count + 1
    wrap_detection = True

    @property
    def N(self) -> int:
        return self.L * self.L

    @property
    def M(self) -> int:
        return len(self.u)

    @property
    def n_active(self) -> int:
        return len(self.active_nodes)

    @property
    def active(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[self.active_nodes] = True
        return mask

    @property
    def edges(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.u, self.v]), minlength=self.N)


def _canonical(u, v, dx, dy, *extra):
    """Orient every edge as u < v, sort by (u, v), drop duplicate pairs.

    Among duplicates the first one after sorting by the trailing ``extra``
    key wins.
    """
    swap = u > v
    u, v = np.where(swap, v, u), np.where(swap, u, v)
    dx = np.where(swap, -dx, dx)
    dy = np.where(swap, -dy, dy)
    keys = [e for e in reversed(extra)] + [v, u]
    order = np.lexsort(keys)
    u, v, dx, dy = u[order], v[order], dx[order], dy[order]
    extra = [e[order] for e in extra]
    keep = np.ones(len(u), dtype=bool)
    keep[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
    keep &= u != v
    return (u[keep], v[keep], dx[keep], dy[keep], *[e[keep] for e in extra])


def _offsets(geometry: Geometry, x, y):
    """Forward neighbour offsets per node; each edge is generated once."""
    yield np.ones_like(x, dtype=bool), 1, 0
    if geometry is Geometry.HEXAGONAL:
        yield (x + y) % 2 == 0, 0, 1
        return
    yield np.ones_like(x, dtype=bool), 0, 1
    if geometry is Geometry.TRIANGULAR:
        yield np.ones_like(x, dtype=bool), 1, 1


def check_size(geometry, L: int, boundary="periodic") -> int:
    """Validate a linear size for ``geometry``; returns it as an int."""
    geometry, boundary = Geometry(geometry), Boundary(boundary)
    L = int(L)
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    if boundary is Boundary.PERIODIC and L < 3:
        raise ValueError(f"periodic lattices need L >= 3, got {L}")
    if geometry is Geometry.HEXAGONAL and (L % 2 or L < 4):
        raise ValueError(f"hexagonal brick-wall tiling needs even L >= 4, got {L}")
    return L


def build_lattice(geometry, L: int, boundary="periodic") -> Lattice:
    """Build a square, triangular or hexagonal lattice on an L x L grid.

    Raises
    ------
    ValueError
        If ``L < 3`` with periodic boundaries, or ``L`` is odd (or smaller
        than 4) for the hexagonal brick-wall tiling.
    """
    geometry, boundary = Geometry(geometry), Boundary(boundary)
    L = check_size(geometry, L, boundary)

    idx = np.arange(L * L, dtype=np.int64)
    x, y = idx % L, idx // L
    us, vs, dxs, dys = [], [], [], []
    for sel, ox, oy in _offsets(geometry, x, y):
        nx, ny = x + ox, y + oy
        if boundary is Boundary.OPEN:
            sel = sel & (nx < L) & (ny < L)
        xs, ys = x[sel], y[sel]
        us.append(ys * L + xs)
        vs.append((ny[sel] % L) * L + nx[sel] % L)
        dxs.append(np.full(len(xs), ox))
        dys.append(np.full(len(xs), oy))
    u, v, dx, dy = _canonical(*(np.concatenate(a) for a in (us, vs, dxs, dys)))
    return Lattice(
        geometry, L, boundary,
        _frozen(u), _frozen(v), _frozen(dx), _frozen(dy),
        _frozen(np.ones(L * L, dtype=bool), bool),
    )


def dilute_sites(lattice: Lattice, q: float, seed: int) -> Lattice:
    """Remove each node independently with probability ``1 - q``.

    Removed nodes keep their index and are flagged inactive; their edges go.
    Node ``i`` survives iff its uniform draw is below ``q``, so for a fixed
    seed the surviving sets are nested in ``q``.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    draws = rng.stream(seed, rng.DILUTE).random(lattice.N)
    alive = lattice.active & (draws < q)
    keep = alive[lattice.u] & alive[lattice.v]
    return Lattice(
        lattice.geometry, lattice.L, lattice.boundary,
        _frozen(lattice.u[keep]), _frozen(lattice.v[keep]),
        _frozen(lattice.dx[keep]), _frozen(lattice.dy[keep]),
        _frozen(alive, bool),
    )


def _chain_edges(active_2d: np.ndarray, L: int):
    """Edges between cyclically consecutive active cells of each row.

    Returns (a, b, step, hops) with cell indices in row-major order of
    ``active_2d`` and ``step`` the forward distance along the row.
    """
    rows, cols = np.nonzero(active_2d)
    if len(rows) == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, empty
    _, start, count = np.unique(rows, return_index=True, return_counts=True)
    start = np.repeat(start, count)
    count = np.repeat(count, count)
    k = np.arange(len(rows))
    nxt = start + (k - start + 1) % count
    step = (cols[nxt] - cols) % L
    step = np.where(count == 1, L, step)
    a = rows * L + cols
    b = rows[nxt] * L + cols[nxt]
    return a, b, step, step - 1


def contract_transparent(lattice: Lattice, epsilon: float, pairing="straight_through",
                         seed: int = 0, active=None) -> ContractedGraph:
    """Make each node transparent with probability ``1 - epsilon`` and contract.

    With straight-through pairing a transparent node joins its West and East
    ports and its North and South ports, so every active node is linked to
    the nearest active node in each cardinal direction along its row and
    column, wrapping periodically. Self-loops (a lone active node in a row)
    and duplicate pairs are dropped; among duplicates the shortest chain is
    kept. ``active`` overrides the random draw with an explicit mask.
    """
    pairing = Pairing(pairing)
    if lattice.geometry is not Geometry.SQUARE:
        raise ValueError("transparent contraction is defined for square lattices only")
    if lattice.boundary is not Boundary.PERIODIC:
        raise ValueError("transparent contraction needs periodic boundaries")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    L = lattice.L
    if active is None:
        draws = rng.stream(seed, rng.TRANSPARENT).random(lattice.N)
        active = (draws < epsilon) & lattice.active
    else:
        active = np.asarray(active, dtype=bool) & lattice.active
    grid = active.reshape(L, L)  # grid[y, x]

    ra, rb, rstep, rhops = _chain_edges(grid, L)
    ca, cb, cstep, chops = _chain_edges(grid.T, L)
    # column cells come back as x * L + y; map them to node indices
    ca = (ca % L) * L + ca // L
    cb = (cb % L) * L + cb // L
    u = np.concatenate([ra, ca])
    v = np.concatenate([rb, cb])
    dx = np.concatenate([rstep, np.zeros_like(cstep)])
    dy = np.concatenate([np.zeros_like(rstep), cstep])
    hops = np.concatenate([rhops, chops])
    u, v, dx, dy, hops = _canonical(u, v, dx, dy, hops)
    nodes = np.flatnonzero(active)
    return ContractedGraph(
        L, _frozen(nodes), _frozen(u), _frozen(v), _frozen(dx), _frozen(dy),
        _frozen(hops), len(nodes) / lattice.N, float(epsilon), pairing,
    )


def write_edgelist(lattice: Lattice, path) -> None:
    """Write ``geometry L N M boundary`` then one ``u v`` line per edge."""
    lines = [f"{lattice.geometry.value} {lattice.L} {lattice.N} {lattice.M} "
             f"{lattice.boundary.value}"]
    lines += [f"{a} {b}" for a, b in zip(lattice.u.tolist(), lattice.v.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path):
    """Parse an edge-list file; returns (header dict, (M, 2) int array)."""
    with open(path) as fh:
        geometry, L, N, M, boundary = fh.readline().split()
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2).reshape(-1, 2)
    header = {"geometry": Geometry(geometry), "L": int(L), "N": int(N),
              "M": int(M), "boundary": Boundary(boundary)}
    if len(edges) != header["M"]:
        raise ValueError(f"header says {header['M']} edges, file has {len(edges)}")
    return header, edges


def site_neighbours(lattice: Lattice):
    """CSR adjacency (indptr, neighbours, dx, dy) with displacements per entry."""
    u = np.concatenate([lattice.u, lattice.v])
    v = np.concatenate([lattice.v, lattice.u])
    dx = np.concatenate([lattice.dx, -lattice.dx])
    dy = np.concatenate([lattice.dy, -lattice.dy])
    order = np.lexsort([v, u])
    indptr = np.zeros(lattice.N + 1, dtype=np.int64)
    np.cumsum(np.bincount(u, minlength=lattice.N), out=indptr[1:])
    return (indptr, np.ascontiguousarray(v[order], dtype=np.int32),
            np.ascontiguousarray(dx[order], dtype=np.int32),
            np.ascontiguousarray(dy[order], dtype=np.int32))
