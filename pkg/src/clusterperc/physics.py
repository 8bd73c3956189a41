"""Closed-form maps between device parameters and percolation quantities.

A node makes one entanglement attempt per period ``t0`` and cycles through
its ``d`` neighbours, so after time ``t`` each bond has been tried
``t / (t0 * d)`` times and exists with probability

    p(t) = 1 - (1 - p0) ** (t / (t0 * d)).

Inverting at the bond threshold gives the time to a percolated cluster.
All times are in seconds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

BOND_THRESHOLD = {
    "square": 0.5,
    "triangular": 2.0 * math.sin(math.pi / 18.0),
    "hexagonal": 1.0 - 2.0 * math.sin(math.pi / 18.0),
}
SITE_THRESHOLD = {"square": 0.592746, "triangular": 0.5, "hexagonal": 0.697043}
DEGREE = {"square": 4, "triangular": 6, "hexagonal": 3}


class Scheme(str, enum.Enum):
    BULLSEYE_SIL = "bullseye_sil"
    WAVEGUIDE = "waveguide"
    CAVITY = "cavity"
    CUSTOM = "custom"


T0_DEFAULT = 5e-6
LIMIT_DEGREE = 10**7
_PRESET_P0 = {
    Scheme.BULLSEYE_SIL: 5e-5,
    Scheme.WAVEGUIDE: 2e-4,
    Scheme.CAVITY: 5e-2,
}


@dataclass(frozen=True)
class PhysicalParams:
    p0: float
    t0: float = T0_DEFAULT
    eta: float | None = None
    scheme: Scheme = Scheme.CUSTOM
    # per-hop bond survival for long-range (transparent) links; 1.0 = length-independent
    hop_loss: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"p0 must lie in (0, 1), got {self.p0}")
        if not self.t0 > 0.0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.eta is not None:
            if not 0.0 <= self.eta <= 1.0:
                raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
            if not math.isclose(self.p0, self.eta**2 / 2.0, rel_tol=1e-12):
                raise ValueError(f"p0={self.p0} inconsistent with eta**2/2={self.eta**2 / 2}")
        if not 0.0 < self.hop_loss <= 1.0:
            raise ValueError(f"hop_loss must lie in (0, 1], got {self.hop_loss}")

    @classmethod
    def preset(cls, scheme) -> "PhysicalParams":
        scheme = Scheme(scheme)
        if scheme is Scheme.CUSTOM:
            raise ValueError("the custom scheme has no preset; pass p0/t0 or eta")
        return cls(p0=_PRESET_P0[scheme], t0=T0_DEFAULT, scheme=scheme)

    @classmethod
    def from_eta(cls, eta: float, t0: float = T0_DEFAULT) -> "PhysicalParams":
        """Heralding success of a two-photon Bell measurement, p0 = eta**2 / 2."""
        return cls(p0=eta**2 / 2.0, t0=t0, eta=eta)


def bond_prob_from_time(t, params: PhysicalParams, d: int, discrete: bool = False):
    """Probability a bond exists after entangling for time ``t``.

    With ``discrete=True`` only completed attempt rounds count
    (``floor(t / (t0 * d))`` attempts per neighbour).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    attempts = t / (params.t0 * d)
    if discrete:
        attempts = np.floor(attempts)
    p = -np.expm1(attempts * math.log1p(-params.p0))
    return float(p) if p.ndim == 0 else p


def time_to_threshold(p_c, params: PhysicalParams, d: int):
    """Time until the bond probability reaches ``p_c``: t0 d ln(1-p_c)/ln(1-p0)."""
    p_c = np.asarray(p_c, dtype=float)
    if np.any((p_c < 0) | (p_c > 1)):
        raise ValueError("p_c must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        t = params.t0 * d * np.log1p(-p_c) / math.log1p(-params.p0)
    return float(t) if t.ndim == 0 else t


def degree_bound(params: PhysicalParams, d: int) -> float:
    """Threshold-time bound for degree ``d`` using p_c >= 1/(d-1)."""
    if d < 3:
        raise ValueError(f"the degree bound needs d >= 3, got {d}")
    return params.t0 * d * math.log1p(-1.0 / (d - 1)) / math.log1p(-params.p0)


def threshold_time_lower_bound(params: PhysicalParams) -> float:
    """Minimum time to a universal resource without feed-forward, -t0/ln(1-p0).

    This is the d -> infinity limit of :func:`degree_bound`.
    """
    t_lb = -params.t0 / math.log1p(-params.p0)
    # the bound approaches t_lb as 1 + 3/(2d), so check at d = 1e7
    assert math.isclose(degree_bound(params, LIMIT_DEGREE), t_lb, rel_tol=1e-6)
    return t_lb


def report(params: PhysicalParams, geometries=("square", "triangular", "hexagonal"),
           p_c: float | None = None, coherence: float | None = None) -> dict:
    """Derived quantities ``{p0, t0, d, p_c, t_c, t_lb}`` per lattice."""
    t_lb = threshold_time_lower_bound(params)
    rows = []
    for g in geometries:
        d = DEGREE[g]
        pc = BOND_THRESHOLD[g] if p_c is None else p_c
        t_c = time_to_threshold(pc, params, d)
        row = {"geometry": g, "p0": params.p0, "t0": params.t0, "d": d,
               "p_c": pc, "t_c": t_c, "t_lb": t_lb, "ratio": t_c / t_lb}
        if coherence is not None:
            row["within_coherence"] = t_c <= coherence
        rows.append(row)
    return {"scheme": params.scheme.value, "p0": params.p0, "t0": params.t0,
            "eta": params.eta, "t_lb": t_lb, "lattices": rows}
