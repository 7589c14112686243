import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ai_zeros

from grushin_lab import potential as pot
from grushin_lab import schrodinger as sch
from grushin_lab import semiclassics as sc
from grushin_lab.errors import NonPositiveInput

X2 = pot.power(2)
ABS = pot.power(1)


def test_phase_examples():
    assert sc.bs_phase(X2, 9.0) == pytest.approx(14.13716694, rel=1e-9)
    assert sc.bs_phase(ABS, 1.0) == pytest.approx(4 / 3, rel=1e-10)
    assert sc.bs_phase(pot.power_asym(2, 4), 4.0) == pytest.approx(3 * math.pi / 2, rel=1e-10)


@given(d=st.floats(min_value=0.3, max_value=5.0), E=st.floats(min_value=0.01, max_value=1e3))
def test_power_phase_closed_form(d, E):
    # int_{-a}^{a} sqrt(E - |x|^d) dx = 2 E^{1/2 + 1/d} B(1/d, 3/2) / d
    exact = 2 * E ** (0.5 + 1 / d) * math.gamma(1 / d) * math.gamma(1.5) / math.gamma(1 / d + 1.5) / d
    assert sc.bs_phase(pot.power(d), E) == pytest.approx(exact, rel=1e-9)


def test_phase_against_plain_quadrature():
    V = pot.power_logperturbed(2, 0.1)
    E = 7.0
    xm, xp = pot.transition_points(V, E)
    ref = quad(lambda x: math.sqrt(max(E - pot.evaluate(V, x), 0.0)), -xm, xp, limit=500, epsabs=1e-13)[0]
    assert sc.bs_phase(V, E) == pytest.approx(ref, rel=1e-8)


@given(E1=st.floats(min_value=0.1, max_value=100), f=st.floats(min_value=1.01, max_value=3))
def test_phase_strictly_increasing(E1, f):
    V = pot.two_power(1, 3)
    assert sc.bs_phase(V, f * E1) > sc.bs_phase(V, E1)


def test_kv_examples():
    assert sc.kv(X2, 4.0) == pytest.approx(math.pi, rel=1e-10)
    assert sc.kv(ABS, 3.0) == pytest.approx(4.0, rel=1e-10)
    for t in (0.3, 5.0, 80.0):
        assert sc.kv(X2, t) / pot.sublevel_measure(X2, t) == pytest.approx(math.pi / 4, rel=1e-10)
    with pytest.raises(NonPositiveInput):
        sc.kv(X2, 0.0)


def test_bs_log_error_examples():
    for n in (1, 7, 30):
        err, _ = sc.bs_log_error(X2, n)
        assert err == pytest.approx(math.pi / 2, abs=1e-8)
    assert sc.bs_log_error(X2, 1)[1] == pytest.approx((math.pi / 2) / math.log(2), rel=1e-8)
    a, _, _, _ = ai_zeros(1)
    E2 = -a[0]
    err, _ = sc.bs_log_error(ABS, 2)
    assert err == pytest.approx(abs(4 / 3 * E2 ** 1.5 - 2 * math.pi), rel=1e-8)
    assert err == pytest.approx(1.5163, abs=1e-3)


def test_rough_bs_bracket():
    for V in (pot.power(0.5), X2, pot.power(4), pot.two_power(1, 3)):
        r = sc.rough_bs_ratios(V, range(1, 201, 7))
        assert r.max() / r.min() <= 4


def test_kv_differential_identity():
    V = pot.two_power(1, 3)
    for t in np.geomspace(0.01, 100, 9):
        ratio = sc.kv_log_derivative(V, t) / pot.sublevel_measure(V, t)
        assert 0.25 <= ratio <= 4


def test_xi_examples():
    assert sc.xi(X2, 1, 2.0) == pytest.approx(4.0, rel=1e-9)
    assert sc.xi(ABS, 2, sch.eigenvalue(ABS, 2)) == pytest.approx(1.0, rel=1e-12)
    assert sc.xi(X2, 3, 20.0) > sc.xi(X2, 3, 10.0)


@settings(max_examples=6, deadline=None)
@given(n=st.integers(min_value=1, max_value=20), lam=st.floats(min_value=0.5, max_value=200))
def test_xi_round_trip_nonhomogeneous(n, lam):
    V = pot.two_power(1, 3)
    tau = sc.xi(V, n, lam)
    assert sch.eigenvalue(pot.scale(V, tau), n) == pytest.approx(lam, rel=1e-8)


def test_xi_log_derivative_bracket():
    V = pot.two_power(1, 3)
    k = pot.certificate(V, "P1").kappa_hat
    for lam in (1.0, 10.0, 100.0):
        g = sc.xi_log_derivative(V, 3, lam)
        assert 1 / (2 * k) <= g <= 2 * k


@pytest.mark.parametrize("V, expected", [(X2, 0.5), (ABS, 2 / 3), (pot.power(4), 1 / 3)])
def test_virial_examples(V, expected):
    for n, tau in ((1, 1.0), (7, 0.3)):
        v = sc.virial_ratio(V, n, tau)
        assert v == pytest.approx(expected, abs=1e-7)
        assert sc.hellmann_feynman_ratio(V, n, tau) == pytest.approx(v, abs=1e-6)


def test_virial_upper_bound_nonhomogeneous():
    for V in (pot.two_power(1, 3), pot.power_logperturbed(2, 0.1)):
        for n in (1, 5, 25):
            v = sc.virial_ratio(V, n)
            assert 0 < v <= 1 + 1e-6
            assert sc.hellmann_feynman_ratio(V, n) == pytest.approx(v, abs=1e-6)


def test_sweeps_write_csv(tmp_path):
    rows = sc.bs_sweep(X2, [1, 2, 3], tmp_path / "bs.csv")
    assert (tmp_path / "bs.csv").read_text().splitlines()[0] == "n,E,phase,err,ratio"
    assert [r["err"] for r in rows] == pytest.approx([math.pi / 2] * 3, abs=1e-9)
    rows = sc.scaling_sweep(X2, [1, 2], [3.0, 9.0], tmp_path / "sc.csv")
    assert (tmp_path / "sc.csv").read_text().splitlines()[0] == "n,lambda,xi,virial"
    assert rows[1]["xi"] == pytest.approx(81.0, rel=1e-9)


def test_log_growth_metric():
    assert sc.log_bs_growth([1.0, 2.0, 2.0, 2.1], 2) == pytest.approx(1.05)
