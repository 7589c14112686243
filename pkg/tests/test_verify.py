import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin_lab import potential as pot
from grushin_lab import schrodinger as sch
from grushin_lab import verify as vf
from grushin_lab.errors import EmptyWindow, MissingCertificate, PreconditionViolated

X2 = pot.power(2)


def test_pointwise_ground_state_example():
    ratio, x = vf.pointwise_ratio(X2, 1, 0.25)
    assert ratio == pytest.approx(math.pi ** -0.25 * math.sqrt(2), rel=1e-6)
    assert abs(x) < 0.05


def test_pointwise_odd_state_vanishes_at_origin():
    p = sch.eigenfunction(X2, 2)
    assert abs(p.psi[p.origin]) < 1e-12


def test_pointwise_needs_class():
    broken = pot.tabulated([-3, -2, -1, -0.5, 0.5, 1, 2, 3], [9, 4, 1, 0.25, 0.25, 3, 0.5, 9])
    with pytest.raises(MissingCertificate):
        vf.pointwise_ratio(broken, 3, 0.5)
    # |x|^{1/2} misses P1_cv but holds Pk, which is enough at alpha = 1/4
    assert vf._require_alpha_class(pot.power(0.5), 0.25) == "Pk"
    with pytest.raises(PreconditionViolated):
        vf.class_for_alpha(0.1)


def test_pointwise_report_airy_family():
    rep = vf.pointwise_report(pot.power(1), range(1, 41), 0.25)
    assert math.isfinite(rep.uniform_constant)
    assert rep.cls == "P1_cv"
    assert [r[0] for r in rep.per_n] == list(range(1, 41))


def test_bound_report_serialization(tmp_path):
    rep = vf.BoundReport("pointwise_psi", family="power", cls="P1", alpha=0.5)
    rep.add(2, 1.5, 0.1)
    rep.add(1, 1.0, 0.0)
    rep.add(4, 1.6, 0.2)
    assert [r[0] for r in rep.per_n] == [1, 2, 4]
    assert rep.uniform_constant == 1.6
    assert rep.trend == pytest.approx(1.6 / 1.5)
    rep.write_json(tmp_path / "r.json")
    d = json.loads((tmp_path / "r.json").read_text())
    assert {"inequality_id", "family", "class", "alpha", "per_n", "uniform_constant", "trend", "params"} <= set(d)
    vf.write_long_csv(tmp_path / "r.csv", [rep])
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "inequality,n,x,ratio"
    with pytest.raises(PreconditionViolated):
        rep.add(5, float("inf"), 0.0)
    with pytest.raises(ValueError):
        vf.BoundReport("made_up")


@pytest.mark.parametrize("V", [X2, pot.power(1.5), pot.power_asym(2, 4)])
def test_monotone_envelopes(V):
    for n in (1, 5, 40):
        assert vf.monotone_envelopes(sch.eigenfunction(V, n)) == {"g_violations": 0, "h_violations": 0}


def test_sonin_examples():
    assert vf.sonin_profile(X2, 10, "C3", eps=0.1)[0] == 0
    assert vf.sonin_profile(X2, 10, "power", alpha=0.25, delta=1.0)[0] == 0
    v, S = vf.sonin_profile(X2, 2, "power", alpha=0.25, delta=1.0)
    assert v == 0 and np.all(np.isfinite(S))


def test_sonin_narrow_region_low_n():
    # only a handful of grid nodes fall in {0.95 E <= V < E} here
    v, S = vf.sonin_profile(pot.power(3), 3, "C3", eps=0.05)
    assert v == 0 and S.size >= 2 * 30


def test_sonin_preconditions():
    with pytest.raises(PreconditionViolated):
        vf.sonin_profile(X2, 1)
    with pytest.raises(MissingCertificate):
        vf.sonin_profile(pot.power(0.5), 5, "power", alpha=0.25)


def test_exp_decay_examples():
    c, viol = vf.exp_decay_fit(X2, 1)
    assert c == pytest.approx(0.5, abs=0.02)
    assert math.isfinite(viol)
    p = sch.eigenfunction(X2, 1)
    assert abs(p(2.0)[0]) * math.sqrt(2) == pytest.approx(math.pi ** -0.25 * math.exp(-2) * math.sqrt(2), rel=1e-8)
    c1, _ = vf.exp_decay_fit(pot.power(1), 1)
    assert 0 < c1 < 1


def test_exp_decay_low_n_widens_domain():
    for n in (2, 3, 6):
        c, _ = vf.exp_decay_fit(X2, n)
        assert 0.4 < c < 0.55


def test_exp_decay_positive_high_n():
    for V in (pot.power(0.5), pot.two_power(1, 3)):
        assert vf.exp_decay_fit(V, 100)[0] > 0


def _mp_sum(a, b, theta, beta, kappa, t):
    mpmath.mp.dps = 30
    total = mpmath.mpf(0)
    for tn in t:
        if tn <= kappa * a:
            d = abs(mpmath.mpf(tn) - b)
            near = mpmath.mpf(a) ** (theta - 1) * d ** (-theta) if d else mpmath.inf
            total += min(near, mpmath.mpf(a) ** (-beta))
    return float(total)


def test_summation_example_against_mpmath():
    t = np.arange(1, 201, dtype=float)
    got = vf.summation_oracle(t, 100.0, 50.5, 0.5, 0.0, 1.0, c=1.0)
    assert got == pytest.approx(_mp_sum(100.0, 50.5, 0.5, 0.0, 1.0, t), rel=1e-14)
    assert got == pytest.approx(2.707459180659371, rel=1e-12)


def test_summation_trivial_cases():
    t = np.arange(1, 51, dtype=float)
    assert vf.summation_oracle(t, 10.0, 5.0, 0.0, 0.0, 1.0) <= 1.0 + 1e-12
    assert vf.summation_oracle(t + 100, 10.0, 5.0, 0.5, 0.5, 1.0) == 0.0
    with pytest.raises(PreconditionViolated):
        vf.summation_oracle(t, 10.0, 50.0, 0.5, 0.5, 1.0)
    with pytest.raises(PreconditionViolated):
        vf.summation_oracle(t * 3, 10.0, 5.0, 0.5, 0.5, 1.0, c=1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), theta=st.floats(0.0, 0.9), beta=st.floats(0.0, 0.9))
def test_summation_instances_are_admissible_and_finite(seed, theta, beta):
    inst = vf.random_summation_instances(np.random.default_rng(seed), 3, theta, beta, 2.0, a_range=(1.0, 100.0))
    for i in inst:
        s = vf.summation_oracle(i["t"], i["a"], i["b"], theta, beta, 2.0, c=1.0)
        assert math.isfinite(s) and s >= 0


def test_projector_window_example():
    w = vf.projector_window(X2, 100.0, 1.0)
    assert [n for n, _ in w] == [6, 7]
    for n, t in w:
        assert t == pytest.approx((100.0 / (2 * n - 1)) ** 2, rel=1e-9)
    # lam / Xi_1 = 0.01 already exceeds 2A
    assert vf.projector_window(X2, 100.0, 1e-3) == []
    assert [n for n, _ in vf.projector_window(X2, 100.0, 4.0)] == [11, 12, 13, 14]


def test_projector_sum_parity_at_origin():
    s, r, window = vf.projector_sum(X2, 100.0, 1.0, 0.0)
    assert window == [6, 7]
    t7 = (100.0 / 13) ** 2
    only7 = math.sqrt(t7 ** 0.5) * sch.eigenfunction(X2, 7)(0.0)[0] ** 2
    assert s == pytest.approx(only7, rel=1e-9)
    assert r == pytest.approx(s / 10.0)


def test_projector_sum_empty_window():
    assert vf.projector_sum(X2, 100.0, 1e-3, 0.3) == (0.0, 0.0, [])


def test_gap_log_check_x2():
    g = vf.gap_log_check(X2, 100.0, 1.0)
    assert g.max_gap == pytest.approx(math.pi / 2, abs=1e-9)
    assert g.max_ratio <= (math.pi / 2) / math.log(2)
    with pytest.raises(EmptyWindow):
        vf.gap_log_check(X2, 100.0, 1e-3)


def test_gap_log_check_abs():
    g = vf.gap_log_check(pot.power(1), 50.0, 1.0)
    assert g.window and all(math.isfinite(r) for r in g.ratios)
