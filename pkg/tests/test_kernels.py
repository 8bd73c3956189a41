import numpy as np
import pytest
from hypothesis import given, strategies as st

from clusterperc import _purekernels, kernels, rng
from clusterperc.lattice import build_lattice, site_neighbours

from conftest import brute_lcc

try:
    from clusterperc import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def _bond_args(lat, seed):
    order = rng.stream(seed, rng.SWEEP).permutation(lat.M)
    return lat.N, lat.u, lat.v, lat.dx, lat.dy, order, 1


@needs_ext
def test_extension_is_selected():
    assert kernels.BACKEND == "cython"


@needs_ext
@pytest.mark.parametrize("geometry", ["square", "triangular", "hexagonal"])
def test_backends_agree_on_bond_sweep(geometry):
    lat = build_lattice(geometry, 16)
    for seed in range(5):
        a = _kernels.bond_sweep(*_bond_args(lat, seed))
        b = _purekernels.bond_sweep(*_bond_args(lat, seed))
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])
        assert a[2] == b[2]


@needs_ext
@pytest.mark.parametrize("geometry", ["square", "triangular", "hexagonal"])
def test_backends_agree_on_site_sweep(geometry):
    lat = build_lattice(geometry, 16)
    nb = site_neighbours(lat)
    for seed in range(5):
        order = rng.stream(seed, rng.DILUTE).permutation(lat.N)
        a = _kernels.site_sweep(lat.N, *nb, order)
        b = _purekernels.site_sweep(lat.N, *nb, order)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])


@pytest.mark.parametrize("impl", [_purekernels, _kernels] if _kernels else [_purekernels])
@pytest.mark.parametrize("geometry", ["square", "triangular", "hexagonal"])
def test_lcc_matches_brute_force(impl, geometry):
    lat = build_lattice(geometry, 16)
    args = _bond_args(lat, 3)
    lcc, wraps, _ = impl.bond_sweep(*args)
    order = args[5]
    assert lcc[0] == 1 and lcc[-1] == lat.N
    assert np.all(np.diff(lcc) >= 0)
    for n in range(0, lat.M + 1, 100):
        e = order[:n]
        assert lcc[n] == brute_lcc(lat.N, lat.u[e], lat.v[e])


def test_first_wrap_is_first_winding_cycle():
    # square L=4: adding the four horizontal bonds of row 0 closes a loop
    # around x at the fourth bond and nothing winds before it
    lat = build_lattice("square", 4)
    row0 = [k for k in range(lat.M) if lat.dy[k] == 0 and lat.u[k] < 4]
    rest = [k for k in range(lat.M) if k not in row0]
    order = np.array(row0 + rest, dtype=np.int64)
    _, wraps, _ = kernels.bond_sweep(lat.N, lat.u, lat.v, lat.dx, lat.dy, order, 1)
    assert wraps[0] == 4 and wraps[1] == 4
    assert wraps[2] > 4 and wraps[3] == max(wraps[1], wraps[2])


def test_contractible_cycle_is_not_a_wrap():
    lat = build_lattice("square", 6)
    # the plaquette 0-1-7-6 closes a contractible loop
    plaquette = {(0, 1), (1, 7), (6, 7), (0, 6)}
    idx = [k for k, e in enumerate(map(tuple, lat.edges.tolist())) if e in plaquette]
    order = np.array(idx + [k for k in range(lat.M) if k not in idx], dtype=np.int64)
    _, wraps, _ = kernels.bond_sweep(lat.N, lat.u, lat.v, lat.dx, lat.dy, order, 1)
    assert wraps[0] > 4


@given(seed=st.integers(0, 2**32 - 1))
def test_wrap_order_invariants(seed):
    lat = build_lattice("triangular", 8)
    _, w, _ = kernels.bond_sweep(*_bond_args(lat, seed))
    assert 0 < w[0] == min(w[1], w[2])
    assert w[3] >= max(w[1], w[2])
    assert w[3] <= lat.M


@given(n=st.integers(2, 40), data=st.data())
def test_random_graphs_against_brute_force(n, data):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=60))
    u = np.array([p[0] for p in chosen], dtype=np.int32)
    v = np.array([p[1] for p in chosen], dtype=np.int32)
    z = np.zeros(len(u), dtype=np.int32)
    order = np.arange(len(u), dtype=np.int64)
    lcc, wraps, _ = kernels.bond_sweep(n, u, v, z, z, order, 1)
    assert list(wraps) == [-1, -1, -1, -1]
    for k in range(len(u) + 1):
        assert lcc[k] == brute_lcc(n, u[:k], v[:k])


def test_find_step_budget():
    # total find steps <= c * M * alpha(N) with c < 10; alpha(N) <= 4 for any
    # physically sized N, so alpha = 1 here is the conservative choice
    lat = build_lattice("square", 256)
    _, _, steps = kernels.bond_sweep(*_bond_args(lat, 0))
    c = steps / lat.M
    assert c < 10


def test_site_sweep_full_lattice_wraps():
    lat = build_lattice("square", 12)
    order = np.arange(lat.N, dtype=np.int64)
    lcc, wraps, _ = kernels.site_sweep(lat.N, *site_neighbours(lat), order)
    # sites added row by row: row 0 wraps in x at its 12th site
    assert lcc[0] == 0 and lcc[-1] == lat.N
    assert wraps[1] == 12
    assert wraps[2] == lat.N - lat.L + 1


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = ("from clusterperc import kernels, build_lattice, run_sweep;"
            "c = run_sweep(build_lattice('square', 12), 5);"
            "print(kernels.BACKEND, int(c.lcc.sum()), c.wraps['both'])")
    env = dict(os.environ, CLUSTERPERC_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    from clusterperc import build_lattice, run_sweep
    c = run_sweep(build_lattice("square", 12), 5)
    assert out == ["python", str(int(c.lcc.sum())), str(c.wraps["both"])]
