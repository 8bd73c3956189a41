"""Site-bond percolation: the least bond probability that percolates at yield q.

Each replica dilutes the lattice afresh (node ``i`` survives iff its
uniform draw is below ``q``), runs one bond sweep, and keeps only the bond
counts at which it first wraps. The ensemble wrapping probability is then
an exact function of ``p``, so bisection over ``p`` costs no further
sweeps.

Because survival is decided by ``draw < q``, adding sites in increasing
order of their draws (:func:`site_records`) visits exactly the nested
sequence of diluted lattices; the site count at which that sweep first
wraps says for which ``q`` the replica wraps with every bond present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .lattice import Geometry, build_lattice, site_neighbours
from .percolation import (
    ReplicaGraph,
    merge_records,
    replica_records,
    wrap_probability,
)
from .physics import PhysicalParams, time_to_threshold

PERCOLATING = "ok"
NON_PERCOLATING = "non-percolating"
DEFAULT_TOLERANCE = 2e-3


@dataclass
class YieldCurvePoint:
    geometry: str
    q: float
    p_min: float
    p_min_stderr: float
    t_min: float
    status: str
    bracket: tuple = (0.0, 1.0)

    @property
    def percolates(self) -> bool:
        return self.status == PERCOLATING

    def csv_row(self) -> list:
        return [self.geometry, self.q, self.p_min, self.p_min_stderr, self.t_min, self.status]


CSV_HEADER = ["geometry", "q", "p_min", "p_min_stderr", "t_min_seconds", "status"]


class WrapEnsemble:
    """Per-replica first-wrap bond counts of an ensemble of diluted lattices."""

    def __init__(self, M, wx, wy):
        self.M = np.asarray(M)
        self.wx = np.asarray(wx)
        self.wy = np.asarray(wy)

    @classmethod
    def simulate(cls, geometry, L, q, replicas, base_seed, workers=1):
        builder = ReplicaGraph(geometry, L, q=q)
        curve = merge_records(replica_records(builder, replicas, [], base_seed, workers),
                              [], builder.N)
        return cls(curve.replica_M, curve.replica_wraps[:, 1], curve.replica_wraps[:, 2])

    def per_replica(self, p: float) -> np.ndarray:
        out = np.empty(len(self.M))
        for r, (M, wx, wy) in enumerate(zip(self.M, self.wx, self.wy)):
            px = wrap_probability(int(M), None if wx < 0 else int(wx), p)
            py = wrap_probability(int(M), None if wy < 0 else int(wy), p)
            out[r] = 0.5 * (px + py)
        return out

    def __call__(self, p: float) -> float:
        return float(self.per_replica(p).mean())


def bisect_crossing(prob, lo: float, hi: float, tolerance: float, level: float = 0.5):
    """Shrink ``[lo, hi]`` with prob(lo) < level <= prob(hi) to width < tolerance."""
    if prob(hi) < level:
        raise ValueError("upper end of the bracket does not percolate")
    if prob(lo) >= level:
        raise ValueError("lower end of the bracket already percolates")
    while hi - lo >= tolerance:
        mid = 0.5 * (lo + hi)
        if prob(mid) >= level:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _crossing_stderr(ens: WrapEnsemble, p: float, tolerance: float) -> float:
    R = len(ens.M)
    if R < 2:
        return 0.0
    h = max(tolerance, 1e-4)
    a, b = max(0.0, p - h), min(1.0, p + h)
    slope = (ens(b) - ens(a)) / (b - a)
    spread = ens.per_replica(p).std(ddof=1) / math.sqrt(R)
    return spread / slope if slope > 0 else math.inf


def min_bond_prob(geometry, q: float, sizes=(128,), replicas: int = 100,
                  base_seed: int = 0, tolerance: float = DEFAULT_TOLERANCE,
                  params: PhysicalParams | None = None, workers: int = 1,
                  upper: float = 1.0) -> YieldCurvePoint:
    """Least bond probability at which the ensemble wraps with probability >= 1/2.

    The crossing at the largest size is the point estimate. ``upper`` is a
    warm-start upper bracket; it is widened to 1 if it does not percolate.
    """
    geometry = Geometry(geometry)
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    params = params or PhysicalParams.preset("waveguide")
    sizes = sorted(int(L) for L in sizes)
    crossings, brackets = [], []
    for L in sizes:
        ens = WrapEnsemble.simulate(geometry, L, q, replicas, base_seed, workers)
        if ens(1.0) < 0.5:
            if L == sizes[-1]:
                return YieldCurvePoint(geometry.value, q, math.nan, math.nan, math.inf,
                                       NON_PERCOLATING, (1.0, 1.0))
            continue
        hi = upper if upper < 1.0 and ens(upper) >= 0.5 else 1.0
        lo, hi = bisect_crossing(ens, 0.0, hi, tolerance)
        crossings.append(0.5 * (lo + hi))
        brackets.append((lo, hi))
    p_min = crossings[-1]
    stat = _crossing_stderr(ens, p_min, tolerance)
    sys_ = 0.5 * (max(crossings) - min(crossings))
    t_min = time_to_threshold(p_min, params, geometry.degree)
    return YieldCurvePoint(geometry.value, q, p_min, math.hypot(stat, sys_), t_min,
                           PERCOLATING, brackets[-1])


def yield_curve(geometry, q_grid, sizes=(128,), replicas: int = 100, base_seed: int = 0,
                tolerance: float = DEFAULT_TOLERANCE, params: PhysicalParams | None = None,
                workers: int = 1) -> list[YieldCurvePoint]:
    """Minimum percolating bond probability (and time) per site yield."""
    q_grid = [float(q) for q in q_grid]
    if q_grid != sorted(q_grid):
        raise ValueError("q_grid must be sorted ascending")
    points, upper = [], 1.0
    for q in q_grid:
        pt = min_bond_prob(geometry, q, sizes, replicas, base_seed, tolerance, params,
                           workers, upper)
        if pt.percolates:
            upper = min(1.0, pt.bracket[1] + tolerance)
        points.append(pt)
    return points


def min_site_yield(geometry, t_budget: float, sizes=(128,), replicas: int = 100,
                   base_seed: int = 0, tolerance: float = 5e-3,
                   params: PhysicalParams | None = None, workers: int = 1,
                   q_floor: float = 0.3) -> float:
    """Smallest site yield whose lattice percolates within ``t_budget`` seconds.

    Bisects over ``q`` in ``[q_floor, 1]`` on the sign of
    ``t_min(q) - t_budget``; returns ``nan`` when even ``q = 1`` is too slow.
    """
    if not t_budget > 0:
        raise ValueError("t_budget must be positive")

    def fast_enough(q):
        pt = min_bond_prob(geometry, q, sizes, replicas, base_seed,
                           min(tolerance, DEFAULT_TOLERANCE), params, workers)
        return pt.percolates and pt.t_min <= t_budget

    if not fast_enough(1.0):
        return math.nan
    lo, hi = q_floor, 1.0
    if fast_enough(lo):
        raise ValueError(f"q_floor={q_floor} already percolates within the budget")
    while hi - lo >= tolerance:
        mid = 0.5 * (lo + hi)
        if fast_enough(mid):
            hi = mid
        else:
            lo = mid
    return hi


def site_records(geometry, L: int, replicas: int, base_seed: int = 0):
    """Site sweeps with every bond present, one per replica.

    Sites are added in increasing order of the replica's dilution draws.
    Returns ``(wraps, onsets)``: ``wraps[r] = [any, x, y, both]`` site
    counts (-1 = never) and ``onsets[r] = [qx, qy]``, the draw of the site
    that completed the x / y wrap (inf = never).
    """
    lat = build_lattice(geometry, L)
    nb = site_neighbours(lat)
    wraps, onsets = [], []
    for r in range(replicas):
        draws = rng.stream(base_seed + r, rng.DILUTE).random(lat.N)
        order = np.argsort(draws, kind="stable")
        _, w, _ = kernels.site_sweep(lat.N, *nb, order)
        wraps.append(w)
        onsets.append([draws[order[k - 1]] if k > 0 else math.inf for k in (w[1], w[2])])
    return np.array(wraps), np.array(onsets)


@dataclass
class SiteThreshold:
    geometry: str
    q_c_hat: float
    sigma: float
    per_size: dict  # L -> crossing


def site_threshold(geometry, sizes=(128, 256), replicas: int = 100, base_seed: int = 0,
                   tolerance: float = 1e-4) -> SiteThreshold:
    """Site threshold at p = 1: where the canonical wrap probability in q crosses 1/2."""
    sizes = sorted(int(L) for L in sizes)
    per_size = {}
    for L in sizes:
        wraps, _ = site_records(geometry, L, replicas, base_seed)
        N = L * L

        def prob(q, wraps=wraps, N=N):
            return float(np.mean([0.5 * (wrap_probability(N, int(w[1]), q)
                                         + wrap_probability(N, int(w[2]), q))
                                  for w in wraps]))

        lo, hi = bisect_crossing(prob, 0.0, 1.0, tolerance)
        per_size[L] = 0.5 * (lo + hi)
    vals = list(per_size.values())
    return SiteThreshold(Geometry(geometry).value, per_size[sizes[-1]],
                         0.5 * (max(vals) - min(vals)), per_size)


def percolation_onset(geometry, L: int, replicas: int, base_seed: int = 0,
                      margin: int = 0) -> float:
    """Finite-size site threshold of the replica ensemble at p = 1.

    Replica ``r`` wraps along an axis once every site up to the wrap count
    of its site sweep survives, i.e. for ``q`` above that site's draw. The
    ensemble (as diluted by :class:`ReplicaGraph` with the same seeds)
    wraps at p = 1 with probability ``1/2 + margin / (2 * replicas)`` for
    ``q`` just above the returned value, and with less at or below it.

    With ``margin = 0`` the ensemble sits exactly on the 1/2 criterion, so
    its wrap probability stays below 1/2 for every p < 1 up to rounding;
    ``margin >= 1`` gives the first yields that percolate strictly.
    """
    _, onsets = site_records(geometry, L, replicas, base_seed)
    onsets = np.sort(onsets.ravel())
    # each axis event carries weight 1/(2R); half of them must have occurred
    k = len(onsets) // 2 - 1 + int(margin)
    if not 0 <= k < len(onsets) or not np.isfinite(onsets[k]):
        raise ValueError(f"margin={margin} leaves too few wrapping events")
    return float(onsets[k])
