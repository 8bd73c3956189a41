import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from clusterperc.physics import (
    BOND_THRESHOLD,
    DEGREE,
    PhysicalParams,
    Scheme,
    bond_prob_from_time,
    degree_bound,
    report,
    threshold_time_lower_bound,
    time_to_threshold,
)

mpmath.mp.dps = 40
WAVEGUIDE = PhysicalParams.preset("waveguide")
CAVITY = PhysicalParams.preset("cavity")


def mp_tc(p_c, p0, t0, d):
    return float(mpmath.mpf(t0) * d * mpmath.log(1 - mpmath.mpf(p_c)) / mpmath.log(1 - mpmath.mpf(p0)))


def mp_tlb(p0, t0):
    return float(-mpmath.mpf(t0) / mpmath.log(1 - mpmath.mpf(p0)))


@pytest.mark.parametrize("scheme, p0", [("bullseye_sil", 5e-5), ("waveguide", 2e-4),
                                        ("cavity", 5e-2)])
def test_presets(scheme, p0):
    p = PhysicalParams.preset(scheme)
    assert p.p0 == p0 and p.t0 == 5e-6 and p.scheme is Scheme(scheme)


def test_custom_has_no_preset():
    with pytest.raises(ValueError):
        PhysicalParams.preset("custom")


@pytest.mark.parametrize("kw", [dict(p0=0.0), dict(p0=1.0), dict(p0=0.1, t0=0.0),
                                dict(p0=0.1, eta=0.9), dict(p0=0.1, hop_loss=0.0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        PhysicalParams(**kw)


def test_eta_relation():
    p = PhysicalParams.from_eta(math.sqrt(0.1))
    assert p.p0 == pytest.approx(0.05, rel=1e-12)
    assert p.eta == pytest.approx(0.316227766, rel=1e-9)


def test_single_attempt():
    p = PhysicalParams(p0=0.05)
    assert bond_prob_from_time(p.t0 * 4, p, 4) == pytest.approx(0.05, rel=1e-14)
    assert bond_prob_from_time(0.0, p, 4) == 0.0


def test_bond_prob_at_waveguide_tc():
    assert bond_prob_from_time(69.31e-3, WAVEGUIDE, 4) == pytest.approx(0.5, abs=1e-3)


def test_discrete_attempts():
    p = PhysicalParams(p0=0.05)
    t = 4 * p.t0 * 2.7
    assert bond_prob_from_time(t, p, 4, discrete=True) == pytest.approx(1 - 0.95**2)


def test_bond_prob_rejects():
    with pytest.raises(ValueError):
        bond_prob_from_time(-1.0, WAVEGUIDE, 4)
    with pytest.raises(ValueError):
        bond_prob_from_time(1.0, WAVEGUIDE, 0)
    with pytest.raises(ValueError):
        time_to_threshold(1.5, WAVEGUIDE, 4)


@pytest.mark.parametrize("params", [WAVEGUIDE, CAVITY, PhysicalParams.preset("bullseye_sil")])
@pytest.mark.parametrize("geometry", ["square", "triangular", "hexagonal"])
def test_tc_against_high_precision(params, geometry):
    pc, d = BOND_THRESHOLD[geometry], DEGREE[geometry]
    assert time_to_threshold(pc, params, d) == pytest.approx(
        mp_tc(pc, params.p0, params.t0, d), rel=1e-12)


@pytest.mark.parametrize("params", [WAVEGUIDE, CAVITY, PhysicalParams.preset("bullseye_sil")])
def test_tlb_against_high_precision(params):
    assert threshold_time_lower_bound(params) == pytest.approx(
        mp_tlb(params.p0, params.t0), rel=1e-12)


def test_reference_values():
    assert time_to_threshold(0.5, WAVEGUIDE, 4) == pytest.approx(69.31e-3, abs=0.01e-3)
    assert time_to_threshold(0.5, CAVITY, 4) == pytest.approx(270.3e-6, abs=0.5e-6)
    assert threshold_time_lower_bound(WAVEGUIDE) == pytest.approx(25.00e-3, abs=0.01e-3)
    assert threshold_time_lower_bound(CAVITY) == pytest.approx(97.5e-6, abs=0.2e-6)
    assert time_to_threshold(0.0, WAVEGUIDE, 4) == 0.0
    assert time_to_threshold(1e-15, WAVEGUIDE, 4) < 1e-12


EPS = np.finfo(float).eps


def _round_trip_error(t, params, d):
    p = bond_prob_from_time(t, params, d)
    back = time_to_threshold(p, params, d)
    # relative condition number of t(p): p / ((1 - p) |ln(1 - p)|)
    kappa = 1.0 if p == 0 else p / ((1 - p) * -math.log1p(-p)) if p < 1 else math.inf
    return p, back, kappa


@given(log_t=st.floats(-6, 2), d=st.integers(1, 12), p0=st.floats(1e-6, 0.5))
def test_round_trip(log_t, d, p0):
    params = PhysicalParams(p0=p0)
    t = 10.0**log_t
    p, back, kappa = _round_trip_error(t, params, d)
    if p == 1.0:
        assert back == math.inf
    else:
        assert back == pytest.approx(t, rel=max(1e-12, 4 * EPS * kappa))


def test_round_trip_grid():
    for t in np.logspace(-6, 2, 200):
        p, back, kappa = _round_trip_error(t, WAVEGUIDE, 4)
        if kappa < 1e3:
            assert back == pytest.approx(t, rel=1e-12)
        elif p < 1.0:
            assert back == pytest.approx(t, rel=4 * EPS * kappa)
        else:
            assert back == math.inf


def test_orderings():
    t = 30e-3
    ps = [bond_prob_from_time(t, WAVEGUIDE, d) for d in range(1, 20)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    p0s = [1e-5, 1e-4, 1e-3, 1e-2]
    qs = [bond_prob_from_time(t, PhysicalParams(p0=x), 4) for x in p0s]
    assert all(a < b for a, b in zip(qs, qs[1:]))


def test_degree_bound_decreasing_and_limit():
    bounds = [degree_bound(WAVEGUIDE, d) for d in range(3, 101)]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))
    tlb = threshold_time_lower_bound(WAVEGUIDE)
    assert all(b > tlb for b in bounds)
    # the approach to the limit goes like 3 / (2 d)
    assert degree_bound(WAVEGUIDE, 10**6) / tlb - 1 == pytest.approx(1.5e-6, rel=1e-3)
    with pytest.raises(ValueError):
        degree_bound(WAVEGUIDE, 2)


@pytest.mark.parametrize("geometry", ["square", "triangular", "hexagonal"])
def test_ratio_to_lower_bound(geometry):
    r = time_to_threshold(BOND_THRESHOLD[geometry], WAVEGUIDE, DEGREE[geometry]) / \
        threshold_time_lower_bound(WAVEGUIDE)
    assert 2.5 <= r <= 3.5


def test_tc_spread_across_lattices():
    tc = {g: time_to_threshold(BOND_THRESHOLD[g], WAVEGUIDE, DEGREE[g]) for g in DEGREE}
    mean = sum(tc.values()) / 3
    assert all(abs(v / mean - 1) < 0.15 for v in tc.values())
    # pairwise the extremes differ by about 24%
    assert tc["hexagonal"] / tc["triangular"] == pytest.approx(1.239, abs=1e-3)


def test_report():
    rep = report(CAVITY, coherence=1.0)
    rows = {r["geometry"]: r for r in rep["lattices"]}
    assert rows["square"]["t_c"] == pytest.approx(270.3e-6, abs=0.5e-6)
    assert rows["hexagonal"]["d"] == 3
    assert all(r["within_coherence"] for r in rows.values())
    assert {"p0", "t0", "d", "p_c", "t_c", "t_lb"} <= rows["square"].keys()
    assert report(CAVITY, ["square"], p_c=0.3)["lattices"][0]["p_c"] == 0.3
