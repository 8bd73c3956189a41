"""Newman-Ziff sweeps, binomial convolution and replica ensembles.

A sweep adds the edges of a graph one at a time in a seeded random order
and records the largest-cluster size after every addition (the
microcanonical curve). Fixed-p observables follow by weighting those
records with the binomial distribution of the number of occupied bonds.

Wrapping events are recorded per sweep as the first bond count at which a
cluster winds around the torus:

``any``   in any direction
``x/y``   along that axis
``both``  a single cluster winds along both axes
``axes``  (derived) the average of the x and y events
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, rng
from .lattice import Boundary, Geometry, build_lattice, contract_transparent, dilute_sites

WRAP_KINDS = ("any", "x", "y", "both")
CRITERIA = ("axes", "any", "x", "y", "both", "jump")
WINDOW_SIGMAS = 8.0
MASS_TOLERANCE = 1e-10


class NonPercolatingError(RuntimeError):
    """Raised when the input never wraps, even with every bond present."""


@dataclass
class MicrocanonicalCurve:
    lcc: np.ndarray  # int32 LCC size after n bonds, n = 0..M
    n_total: int
    seed: int
    wrap_detection: bool
    wraps: dict = field(default_factory=dict)  # kind -> first bond count or None
    find_steps: int = 0

    @property
    def M(self) -> int:
        return len(self.lcc) - 1

    @property
    def f_lcc(self) -> np.ndarray:
        return self.lcc / self.n_total

    @property
    def wrap_bond_count(self):
        return self.wraps.get("any")

    @property
    def jump(self) -> int:
        """Bond count at which the LCC makes its largest single jump."""
        if self.M == 0:
            return 0
        return int(np.argmax(np.diff(self.lcc))) + 1


def run_sweep(graph, seed: int) -> MicrocanonicalCurve:
    """One Newman-Ziff pass over ``graph`` (a Lattice or ContractedGraph)."""
    if graph.n_active < 1:
        raise ValueError("graph has no active nodes")
    order = rng.stream(seed, rng.SWEEP).permutation(graph.M)
    lcc, wraps, steps = kernels.bond_sweep(graph.N, graph.u, graph.v, graph.dx,
                                           graph.dy, order, 1)
    if graph.wrap_detection:
        found = {k: (int(w) if w >= 0 else None) for k, w in zip(WRAP_KINDS, wraps)}
    else:
        found = {}
    return MicrocanonicalCurve(lcc, graph.N, seed, graph.wrap_detection, found, int(steps))


_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(n: float) -> float:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n)."""
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LN_SQRT_2PI
    nn = n * n
    return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - (1 / 1188) / nn) / nn) / nn) / nn) / n


def _bd0(x: float, np_: float) -> float:
    """Deviance term x log(x/np) + np - x without cancellation."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / np_) + np_ - x


def binom_pmf(k: int, M: int, p: float) -> float:
    """Binomial pmf by Loader's saddle-point expansion.

    Plain lgamma differences lose ~1e-8 relative accuracy at M ~ 1e7.
    """
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == M else 0.0
    if k == 0:
        return math.exp(M * math.log1p(-p))
    if k == M:
        return math.exp(M * math.log(p))
    q = 1.0 - p
    lc = (_stirlerr(M) - _stirlerr(k) - _stirlerr(M - k)
          - _bd0(k, M * p) - _bd0(M - k, M * q))
    lf = 2.0 * _LN_SQRT_2PI + math.log(k) + math.log1p(-k / M)
    return math.exp(lc - 0.5 * lf)


def binomial_window(M: int, p: float, sigmas: float = WINDOW_SIGMAS):
    """Binomial(M, p) pmf restricted to ``mode +- (sigmas * sd + sigmas**2 / 2)``.

    Returns ``(lo, weights)`` with ``weights[i]`` the probability of
    ``lo + i`` successes. Built from the mode outwards with the ratio
    B(n+1)/B(n) = (M-n)/(n+1) * p/(1-p), so nothing overflows at M ~ 1e7.
    The truncated mass is checked and the weights renormalised.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0 or M == 0:
        return 0, np.ones(1)
    if p == 1.0:
        return M, np.ones(1)
    mode = min(M, int(math.floor((M + 1) * p)))
    # the sigmas**2 / 2 margin covers the skewed tail when M p (1-p) is small
    half = int(math.ceil(sigmas * math.sqrt(M * p * (1.0 - p)) + 0.5 * sigmas**2))
    lo, hi = max(0, mode - half), min(M, mode + half)
    p_mode = binom_pmf(mode, M, p)
    odds = p / (1.0 - p)
    up_n = np.arange(mode, hi, dtype=float)
    up = np.cumprod((M - up_n) / (up_n + 1.0) * odds)
    down_n = np.arange(mode, lo, -1, dtype=float)
    down = np.cumprod(down_n / (M - down_n + 1.0) / odds)
    weights = p_mode * np.concatenate([down[::-1], [1.0], up])
    mass = weights.sum()
    if mass < 1.0 - MASS_TOLERANCE:
        raise ArithmeticError(f"binomial window holds only {mass!r} of the mass "
                              f"(M={M}, p={p})")
    return lo, weights / mass


def _canonical_lcc(lcc, p_grid):
    out = np.empty(len(p_grid))
    M = len(lcc) - 1
    for i, p in enumerate(p_grid):
        lo, w = binomial_window(M, float(p))
        out[i] = np.dot(w, lcc[lo:lo + len(w)])
    return out


def wrap_probability(M: int, first: int | None, p: float) -> float:
    """P(Binomial(M, p) >= first): chance a replica has wrapped at bond probability p."""
    if first is None:
        return 0.0
    lo, w = binomial_window(M, float(p))
    k = first - lo
    if k <= 0:
        return float(w.sum())
    return float(w[k:].sum()) if k < len(w) else 0.0


@dataclass
class CanonicalCurve:
    p: np.ndarray
    f_lcc: np.ndarray
    f_lcc_stderr: np.ndarray
    wrap: dict  # criterion -> ensemble wrapping probability per p
    n_replicas: int
    n_total: int
    replica_M: np.ndarray = field(repr=False, default=None)
    replica_wraps: np.ndarray = field(repr=False, default=None)  # (R, 4), -1 = never
    replica_jump: np.ndarray = field(repr=False, default=None)
    replica_n_active: np.ndarray = field(repr=False, default=None)
    criterion: str = "axes"

    @property
    def wrap_prob(self):
        return self.wrap.get(self.criterion)

    @property
    def stderr(self):
        return self.f_lcc_stderr


def _replica_record(graph, seed: int, p_grid) -> dict:
    curve = run_sweep(graph, seed)
    rec = {
        "M": curve.M,
        "n_active": graph.n_active,
        "jump": curve.jump,
        "wraps": np.array([-1 if curve.wraps.get(k) is None else curve.wraps[k]
                           for k in WRAP_KINDS], dtype=np.int64),
        "f": _canonical_lcc(curve.lcc, p_grid) / curve.n_total,
    }
    wrap = {}
    if curve.wrap_detection:
        for k in WRAP_KINDS:
            wrap[k] = np.array([wrap_probability(curve.M, curve.wraps[k], p) for p in p_grid])
        wrap["axes"] = 0.5 * (wrap["x"] + wrap["y"])
    rec["wrap"] = wrap
    return rec


def convolve_binomial(curve: MicrocanonicalCurve, p_grid) -> CanonicalCurve:
    """Fixed-p observables of a single sweep: sum_n B(M, n, p) f[n]."""
    p_grid = np.asarray(p_grid, dtype=float)
    f = _canonical_lcc(curve.lcc, p_grid) / curve.n_total
    wrap = {}
    if curve.wrap_detection:
        for k in WRAP_KINDS:
            wrap[k] = np.array([wrap_probability(curve.M, curve.wraps.get(k), p)
                                for p in p_grid])
        wrap["axes"] = 0.5 * (wrap["x"] + wrap["y"])
    return CanonicalCurve(p_grid, f, np.zeros_like(f), wrap, 1, curve.n_total)


class ReplicaGraph:
    """Picklable recipe for the graph of replica ``seed``.

    The base lattice is built lazily once per process. With ``q < 1`` each
    replica gets a fresh site dilution; with ``epsilon`` set each replica
    gets a fresh transparent-node pattern (a node is active with
    probability ``epsilon * q``).
    """

    def __init__(self, geometry="square", L: int = 64, boundary="periodic",
                 q: float = 1.0, epsilon: float | None = None,
                 pairing: str = "straight_through"):
        self.geometry = Geometry(geometry)
        self.L = int(L)
        self.boundary = Boundary(boundary)
        self.q = float(q)
        self.epsilon = None if epsilon is None else float(epsilon)
        self.pairing = pairing
        self._base = None
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {q}")
        if self.epsilon is not None and self.geometry is not Geometry.SQUARE:
            raise ValueError("transparent nodes are defined for the square lattice only")

    @property
    def base(self):
        if self._base is None:
            self._base = build_lattice(self.geometry, self.L, self.boundary)
        return self._base

    @property
    def N(self) -> int:
        return self.L * self.L

    def __call__(self, seed: int):
        if self.epsilon is not None:
            return contract_transparent(self.base, self.epsilon * self.q, self.pairing, seed)
        if self.q < 1.0:
            return dilute_sites(self.base, self.q, seed)
        return self.base

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_base"] = None
        return state

    def __repr__(self):
        return (f"ReplicaGraph({self.geometry.value!r}, L={self.L}, q={self.q}, "
                f"epsilon={self.epsilon})")


_WORKER = {}


def _init_worker(builder, p_grid):
    _WORKER["builder"] = builder
    _WORKER["p_grid"] = p_grid


def _work(seed):
    return _replica_record(_WORKER["builder"](seed), seed, _WORKER["p_grid"])


class _Fixed:
    def __init__(self, graph):
        self.graph = graph
        self.N = graph.N

    def __call__(self, seed):
        return self.graph


def _as_builder(graph):
    return graph if callable(graph) else _Fixed(graph)


def default_workers() -> int:
    return int(os.environ.get("CLUSTERPERC_WORKERS", "1"))


def replica_records(graph, replicas: int, p_grid, base_seed: int, workers: int = 1):
    """Per-replica records in replica order; replica r uses seed base_seed + r."""
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    p_grid = np.asarray(p_grid, dtype=float)
    seeds = [base_seed + r for r in range(replicas)]
    builder = _as_builder(graph)
    if workers <= 1 or replicas == 1:
        return [_replica_record(builder(s), s, p_grid) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(builder, p_grid)) as pool:
        return list(pool.map(_work, seeds, chunksize=max(1, replicas // (4 * workers))))


def merge_records(records, p_grid, n_total: int, criterion: str = "axes") -> CanonicalCurve:
    p_grid = np.asarray(p_grid, dtype=float)
    R = len(records)
    F = np.array([r["f"] for r in records]).reshape(R, len(p_grid))
    mean = F.mean(axis=0)
    err = F.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros_like(mean)
    wrap = {}
    if records[0]["wrap"]:
        for k in records[0]["wrap"]:
            wrap[k] = np.array([r["wrap"][k] for r in records]).reshape(R, len(p_grid)).mean(axis=0)
    return CanonicalCurve(
        p_grid, mean, err, wrap, R, n_total,
        replica_M=np.array([r["M"] for r in records]),
        replica_wraps=np.array([r["wraps"] for r in records]),
        replica_jump=np.array([r["jump"] for r in records]),
        replica_n_active=np.array([r["n_active"] for r in records]),
        criterion=criterion,
    )


def ensemble_run(graph, replicas: int, p_grid, base_seed: int = 0,
                 workers: int = 1) -> CanonicalCurve:
    """Replica-averaged canonical curve.

    ``graph`` is a fixed graph or a callable ``seed -> graph`` such as
    :class:`ReplicaGraph`. Output does not depend on ``workers``.
    """
    records = replica_records(graph, replicas, p_grid, base_seed, workers)
    n_total = graph.N
    return merge_records(records, p_grid, n_total)


def replica_estimates(curve: CanonicalCurve, criterion: str = "axes") -> np.ndarray:
    """Per-replica threshold estimate (first-event bond count / M)."""
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    M = curve.replica_M.astype(float)
    if criterion == "jump":
        return curve.replica_jump / M
    W = curve.replica_wraps
    if criterion == "axes":
        cols = [W[:, 1], W[:, 2]]
    else:
        cols = [W[:, WRAP_KINDS.index(criterion)]]
    missing = sum(int((c < 0).sum()) for c in cols)
    if missing:
        raise NonPercolatingError(
            f"{missing} of {len(cols) * len(M)} wrapping events never occurred "
            f"with all bonds present ({criterion} criterion)")
    return sum(c / M for c in cols) / len(cols)


@dataclass
class ThresholdEstimate:
    geometry: str
    L_list: list
    p_c_hat: float
    sigma: float
    sigma_stat: float
    sigma_sys: float
    criterion: str
    per_size: dict  # L -> (mean, stderr)
    epsilon: float | None = None
    q: float = 1.0

    def to_json(self) -> dict:
        out = {"geometry": self.geometry, "L_list": self.L_list, "p_c_hat": self.p_c_hat,
               "sigma": self.sigma, "criterion": self.criterion,
               "sigma_stat": self.sigma_stat, "sigma_sys": self.sigma_sys,
               "per_size": {str(L): list(v) for L, v in self.per_size.items()}}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        if self.q != 1.0:
            out["q"] = self.q
        return out


def estimate_threshold(geometry, sizes, replicas: int = 200, base_seed: int = 0,
                       criterion: str | None = None, workers: int = 1,
                       epsilon: float | None = None, q: float = 1.0,
                       boundary: str = "periodic") -> ThresholdEstimate:
    """Bond threshold from the mean first-wrapping bond fraction per size.

    The largest size gives the point estimate; half the spread across
    sizes is the systematic error. ``criterion`` defaults to ``axes`` for
    plain lattices and ``both`` for transparent-node graphs, where a single
    short row chain winds around the torus long before anything percolates.
    Open boundaries fall back to ``jump``, the position of the largest
    single LCC increase.
    """
    sizes = sorted(int(L) for L in sizes)
    if len(sizes) < 2:
        raise ValueError("need at least two lattice sizes")
    if criterion is None:
        if Boundary(boundary) is Boundary.OPEN:
            criterion = "jump"
        else:
            criterion = "both" if epsilon is not None else "axes"
    per_size = {}
    for L in sizes:
        builder = ReplicaGraph(geometry, L, boundary, q=q, epsilon=epsilon)
        curve = merge_records(replica_records(builder, replicas, [], base_seed, workers),
                              [], builder.N)
        est = replica_estimates(curve, criterion)
        err = est.std(ddof=1) / math.sqrt(len(est)) if len(est) > 1 else 0.0
        per_size[L] = (float(est.mean()), float(err))
    means = [m for m, _ in per_size.values()]
    point, stat = per_size[sizes[-1]]
    sys_ = 0.5 * (max(means) - min(means))
    return ThresholdEstimate(Geometry(geometry).value, sizes, point, math.hypot(stat, sys_),
                             stat, sys_, criterion, per_size, epsilon, q)
