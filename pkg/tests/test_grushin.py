import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from grushin_lab import grushin as gr
from grushin_lab import potential as pot
from grushin_lab.errors import ConfigError

X2 = pot.power(2)
SMALL = gr.FiberConfig(n_cap=30)


def test_bump_shape():
    m = gr.bump()
    assert m.support == pytest.approx((0.4, 0.6))
    np.testing.assert_allclose(m([0.3, 0.45, 0.5, 0.55, 0.7]), [0, 1, 1, 1, 0])
    assert 0 < float(m(0.42)) < 1


def test_support_enforced():
    with pytest.raises(ConfigError):
        gr.bump(0.2, 0.05, 0.05)
    with pytest.raises(ConfigError):
        gr.riesz_fragment(1.0, 1)
    with pytest.raises(ConfigError):
        gr.tabulated_multiplier([0.1, 0.5, 0.9], [0, 1, 0])
    lo, hi = gr.riesz_fragment(0.5, 3).support
    assert 0.25 <= lo < hi <= 1


def test_multiplier_config_round_trip():
    for m in (gr.bump(0.6, 0.1, 0.05), gr.riesz_fragment(1.5, 4), gr.ZERO):
        assert gr.multiplier_from_config(m.to_config()) == m


def test_sobolev_s0_matches_quadrature_oracle():
    m = gr.bump()
    ref = quad(lambda t: float(m(t)) ** 2, 0.3, 0.7, points=[0.4, 0.45, 0.55, 0.6], epsabs=1e-14)[0]
    assert 0.1 < ref < 0.2
    assert ref == pytest.approx(0.14057052527733524, rel=1e-12)
    assert gr.sobolev_norm(m, 0.0) ** 2 == pytest.approx(ref, rel=1e-6)


def test_sobolev_zero_and_validation():
    assert gr.sobolev_norm(gr.ZERO, 1.0) == 0.0
    with pytest.raises(ValueError):
        gr.sobolev_norm(gr.bump(), 3.0)


@settings(max_examples=10, deadline=None)
@given(s1=st.floats(0.0, 2.0), s2=st.floats(0.0, 2.0))
def test_sobolev_monotone_in_order(s1, s2):
    lo, hi = sorted((s1, s2))
    m = gr.riesz_fragment(0.5, 3)
    assert gr.sobolev_norm(m, lo) <= gr.sobolev_norm(m, hi) * (1 + 1e-12)


def test_sobolev_half_order_closed_form():
    # ||m||_{W^{1,2}}^2 = ||m||^2 + ||m'||^2
    m = gr.bump()
    h = 1e-6
    d2 = quad(lambda t: ((float(m(t + h)) - float(m(t - h))) / (2 * h)) ** 2, 0.39, 0.61,
              points=[0.4, 0.45, 0.55, 0.6], limit=200)[0]
    assert gr.sobolev_norm(m, 1.0) ** 2 == pytest.approx(gr.sobolev_norm(m, 0.0) ** 2 + d2, rel=1e-3)


def test_fiber_window_matches_closed_form():
    m = gr.tabulated_multiplier([0.25, 0.5, 1.0], [0.0, 1.0, 0.0])
    model = gr.FiberModel(m, X2, 1.0, SMALL)
    for f in model.fibers[:: max(1, len(model.fibers) // 50)]:
        ref = [n for n in range(1, 200) if 0.25 / f.xi <= 2 * n - 1 <= 1 / f.xi]
        assert f.ns.tolist() == ref


def test_kernel_symmetries():
    m, r = gr.bump(), 1.0
    u = np.linspace(-3, 3, 13)
    a, b = 0.3, -0.8
    k_ab = gr.kernel_slice(m, X2, r, b, x=[a], u=u, fc=SMALL).K[0]
    k_ba = gr.kernel_slice(m, X2, r, a, x=[b], u=-u, fc=SMALL).K[0]
    scale = np.max(np.abs(k_ab))
    np.testing.assert_allclose(k_ab, k_ba, atol=1e-9 * scale)
    k_neg = gr.kernel_slice(m, X2, r, -b, x=[-a], u=u, fc=SMALL).K[0]
    np.testing.assert_allclose(k_ab, k_neg, atol=1e-9 * scale)
    assert np.all(np.isreal(k_ab))


def test_zero_multiplier_gives_zero_kernel(tmp_path):
    s = gr.kernel_slice(gr.ZERO, X2, 1.0, 0.0, x=[0.0, 1.0], u=[0.0, 2.0])
    assert not np.any(s.K)
    assert gr.weighted_plancherel_lhs(gr.ZERO, X2, 1.0, 0.25, 0.0) == 0.0
    assert gr.fiber_plancherel_lhs(gr.ZERO, X2, 1.0, 0.0) == 0.0
    res = gr.plancherel_sweep(gr.ZERO, X2, [0.0], [1.0], [0.0], tmp_path / "z.csv")
    assert all(row["lhs"] == 0 and row["ratio"] == 0 for row in res["rows"])


def test_slice_exports(tmp_path):
    s = gr.kernel_slice(gr.bump(), X2, 1.0, 0.0, x=np.linspace(-1, 1, 3), u=np.linspace(0, 1, 4), fc=SMALL)
    s.to_csv(tmp_path / "k.csv")
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert lines[0] == "x,u,K" and len(lines) == 13
    s.to_binary(tmp_path / "k.bin")
    raw = (tmp_path / "k.bin").read_bytes()
    assert raw[:16] == (3).to_bytes(8, "little") + (4).to_bytes(8, "little")
    np.testing.assert_array_equal(gr.read_binary_grid(tmp_path / "k.bin"), s.K)


def test_plancherel_identity_small_cap():
    m = gr.bump()
    u_side = gr.weighted_plancherel_lhs(m, X2, 1.0, 0.0, 1.0, SMALL)
    xi_side = gr.fiber_plancherel_lhs(m, X2, 1.0, 1.0, SMALL)
    assert u_side == pytest.approx(xi_side, rel=1e-2)


def test_rescaling_covariance_small_cap():
    m, r, xp = gr.bump(), 2.0, 1.0
    a = gr.weighted_plancherel_lhs(m, X2, r, 0.25, xp, SMALL)
    b = gr.weighted_plancherel_lhs(m, pot.rescale(X2, r), 1.0, 0.25, xp / r, SMALL)
    assert a == pytest.approx(b, rel=2e-2)


def test_vartheta_range():
    with pytest.raises(ValueError):
        gr.weighted_plancherel_lhs(gr.bump(), X2, 1.0, 0.5, 0.0)


def test_taper_profile():
    assert float(gr.taper(1.0, 1.0)) < 1e-7
    assert float(gr.taper(4.0, 1.0)) == pytest.approx(0.5)
    assert float(gr.taper(100.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
    # scale covariance: only xi / xi_min matters
    assert float(gr.taper(3.0, 1.5)) == pytest.approx(float(gr.taper(2.0, 1.0)))
