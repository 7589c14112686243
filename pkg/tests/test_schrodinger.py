import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal
from scipy.special import ai_zeros, eval_hermite, factorial

from grushin_lab import potential as pot
from grushin_lab import schrodinger as sch
from grushin_lab.errors import NotCertified

X2 = pot.power(2)
ABS = pot.power(1)


def hermite_function(n, x):
    """Normalized psi_n for x^2 (n >= 1), sign chosen positive at large x."""
    k = n - 1
    c = 1.0 / math.sqrt(2.0 ** k * factorial(k) * math.sqrt(math.pi))
    return c * eval_hermite(k, x) * np.exp(-x * x / 2)


def test_hermite_eigenvalues():
    for n in (1, 2, 5, 17, 64):
        assert sch.eigenvalue(X2, n) == pytest.approx(2 * n - 1, rel=1e-10)


def test_airy_eigenvalues_scipy_oracle():
    a, ap, _, _ = ai_zeros(10)
    ref = np.ravel(np.column_stack([-ap, -a]))
    E = [sch.eigenvalue(ABS, n) for n in range(1, 21)]
    np.testing.assert_allclose(E, ref, rtol=1e-9)
    assert E[0] == pytest.approx(1.018792972, rel=1e-9)
    assert E[1] == pytest.approx(2.338107410, rel=1e-9)


def test_scaling_law_example():
    assert sch.eigenvalue(pot.scale(X2, 4.0), 1) == pytest.approx(2.0, rel=1e-10)


@settings(max_examples=8, deadline=None)
@given(d=st.floats(min_value=0.5, max_value=4.0), tau=st.floats(min_value=0.1, max_value=10.0),
       n=st.integers(min_value=1, max_value=12))
def test_homogeneous_scaling_property(d, tau, n):
    V = pot.power(d)
    lhs = sch.eigenvalue(pot.scale(V, tau), n)
    assert lhs == pytest.approx(tau ** (2 / (d + 2)) * sch.eigenvalue(V, n), rel=1e-8)


def test_dense_matrix_cross_check():
    # second-order finite differences on a uniform box; a test-only oracle
    L, N = 7.0, 6000
    x = np.linspace(-L, L, N + 2)[1:-1]
    h = x[1] - x[0]
    w = eigh_tridiagonal(2 / h ** 2 + x ** 4, -np.ones(N - 1) / h ** 2, select="i", select_range=(0, 5))[0]
    ours = [sch.eigenvalue(pot.power(4), n) for n in range(1, 7)]
    np.testing.assert_allclose(ours, w, rtol=2e-5)


def test_ground_state_values():
    p = sch.eigenfunction(X2, 1)
    assert p(0.0)[0] == pytest.approx(math.pi ** -0.25, rel=1e-9)
    assert sch.eigenfunction(X2, 2)(0.0)[0] == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 21])
def test_eigenfunction_matches_hermite(n):
    p = sch.eigenfunction(X2, n)
    x = np.linspace(-4, 4, 33)
    np.testing.assert_allclose(p(x), hermite_function(n, x), atol=1e-8)


def test_zero_sets():
    assert sch.zeros(sch.eigenfunction(X2, 2)) == pytest.approx([0.0], abs=1e-12)
    assert sch.zeros(sch.eigenfunction(X2, 3)) == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)], abs=1e-10)
    assert sch.zeros(sch.eigenfunction(ABS, 2)) == pytest.approx([0.0], abs=1e-12)
    assert sch.critical_points(sch.eigenfunction(X2, 1)) == pytest.approx([0.0], abs=1e-10)


def test_hermite_zeros_oracle():
    from numpy.polynomial.hermite import hermroots
    n = 12
    ref = np.sort(hermroots([0] * (n - 1) + [1]))
    np.testing.assert_allclose(sch.zeros(sch.eigenfunction(X2, n)), ref, atol=1e-10)


@pytest.mark.parametrize("V", [X2, ABS, pot.power(0.5), pot.power_asym(2, 4), pot.two_power(1, 3)])
def test_pair_invariants(V):
    for n in (1, 4, 30):
        p = sch.eigenfunction(V, n)
        assert p.norm_defect <= 1e-8
        assert p.residual <= 1e-6
        assert len(sch.zeros(p)) == n - 1
        xm, xp = pot.transition_points(V, p.E)
        tail = p.grid > xp
        assert np.all(p.psi[tail][:-1] > 0)
        facts = sch.extrema_facts(p)
        assert facts["psi2_maxima_increasing"] and facts["dpsi2_maxima_decreasing"] and facts["tail_sign_ok"]


def test_tails_are_negligible():
    p = sch.eigenfunction(pot.power(0.5), 40)
    assert abs(p.psi[1]) < 1e-9 * p.max_abs and abs(p.psi[-2]) < 1e-9 * p.max_abs


def test_orthogonality_small():
    ps = [sch.eigenfunction(pot.power_asym(1.5, 2), n) for n in range(1, 9)]
    G = np.array([[sch.inner_product(p, q) for q in ps] for p in ps])
    np.testing.assert_allclose(G, np.eye(8), atol=1e-8)


def test_inner_product_needs_same_potential():
    with pytest.raises(ValueError):
        sch.inner_product(sch.eigenfunction(X2, 1), sch.eigenfunction(ABS, 1))


@pytest.mark.parametrize("V, lam, count", [(X2, 10.0, 5), (X2, 0.5, 0), (ABS, 3.0, 2)])
def test_spectrum_count_examples(V, lam, count):
    assert sch.spectrum_count(V, lam) == count


@settings(max_examples=6, deadline=None)
@given(d=st.sampled_from([0.5, 1.0, 2.0, 3.0]), n=st.integers(min_value=1, max_value=40))
def test_count_consistency(d, n):
    V = pot.power(d)
    E = sch.eigenvalue(V, n)
    assert sch.spectrum_count(V, E * (1 + 1e-6)) == n
    assert sch.spectrum_count(V, E * (1 - 1e-6)) == n - 1


def test_transition_points_examples():
    assert sch.transition_points(ABS, 2.3381) == pytest.approx((2.3381, 2.3381))


def test_uncertified_potential_is_rejected():
    V = pot.tabulated([-3, -2, -1, -0.5, 0.5, 1, 2, 3], [9, 4, 1, 0.25, 0.25, 3, 0.5, 9])
    with pytest.raises(NotCertified):
        sch.eigenvalue(V, 1)


def test_binary_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("GRUSHIN_LAB_CACHE", str(tmp_path))
    V = pot.power(2.5)
    cfg = sch.EigenSolveConfig(min_nodes=3000)
    p = sch._eigenfunction_cached(V, 3, cfg)
    files = list(tmp_path.glob("*.bin"))
    assert len(files) == 1 and files[0].name.startswith(V.key)
    q = sch._disk_load(V, 3, cfg)
    assert q.E == p.E
    np.testing.assert_array_equal(q.psi, p.psi)
    np.testing.assert_array_equal(q.grid, p.grid)
    head, grid, psi, dpsi = sch.read_arrays(files[0])
    assert head[0] == 3 and grid.size == psi.size == dpsi.size


def test_array_format_is_little_endian(tmp_path):
    path = tmp_path / "a.bin"
    sch.write_arrays(path, [np.array([1.0, 2.0])])
    raw = path.read_bytes()
    assert raw[:8] == (2).to_bytes(8, "little")
    assert np.frombuffer(raw[8:], dtype="<f8").tolist() == [1.0, 2.0]


def test_config_validation():
    with pytest.raises(ValueError):
        sch.EigenSolveConfig(rel_tol_eigenvalue=1e-3)
    with pytest.raises(ValueError):
        sch.EigenSolveConfig(truncation_factor=4)


def test_spectrum_csv(tmp_path):
    path = tmp_path / "s.csv"
    rows = sch.spectrum_csv(X2, range(1, 4), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,E,residual,norm_defect,zeros_count"
    assert [ln.split(",")[1] for ln in lines[1:]] == ["1", "3", "5"]
    assert [r["zeros_count"] for r in rows] == [0, 1, 2]
