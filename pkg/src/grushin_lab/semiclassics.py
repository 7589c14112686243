"""Phase integrals, the K_V transform, Bohr-Sommerfeld errors, scaling inverse and virial ratios."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import potential as pot
from . import schrodinger as sch
from .errors import BracketFailure, NonPositiveInput
from .io import write_csv


@dataclass(frozen=True)
class PhaseProfile:
    V: pot.PotentialSpec
    E: float
    phase: float
    quadrature_error_bound: float


def _half_phase(V, E, side):
    xt = pot.half_inverse(V, E, side)

    # x = xt (1 - w^2) turns the square-root endpoint at the transition point into a regular one
    def f(w):
        x = xt * (1.0 - w * w)
        return math.sqrt(max(E - float(pot.evaluate(V, side * x)), 0.0)) * 2.0 * xt * w

    val, err = quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=400, points=[0.5, 0.9, 0.99])
    return val, err


def phase_profile(V: pot.PotentialSpec, E: float) -> PhaseProfile:
    if not E > 0:
        raise NonPositiveInput("E must be positive")
    a, ea = _half_phase(V, E, 1)
    b, eb = _half_phase(V, E, -1)
    return PhaseProfile(V=V, E=E, phase=a + b, quadrature_error_bound=ea + eb)


def bs_phase(V: pot.PotentialSpec, E: float) -> float:
    """Phi(E) = integral of (E - V)_+^(1/2)."""
    return phase_profile(V, E).phase


def kv(V: pot.PotentialSpec, t: float) -> float:
    """K_V(t) = t^(-1/2) Phi(t)."""
    if not t > 0:
        raise NonPositiveInput("t must be positive")
    return bs_phase(V, t) / math.sqrt(t)


def bs_log_error(V: pot.PotentialSpec, n: int, cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> tuple[float, float]:
    """(|Phi(E_n) - pi n|, that divided by log(1 + n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    err = abs(bs_phase(V, sch.eigenvalue(V, n, cfg)) - math.pi * n)
    return err, err / math.log1p(n)


def rough_bs_ratios(V: pot.PotentialSpec, ns, cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> np.ndarray:
    """r_n = E_n^(1/2) |{V <= E_n}| / n."""
    out = []
    for n in ns:
        e = sch.eigenvalue(V, n, cfg)
        out.append(math.sqrt(e) * pot.sublevel_measure(V, e) / n)
    return np.array(out)


def kv_log_derivative(V: pot.PotentialSpec, t: float, rel_step: float = 1e-4) -> float:
    """t K_V'(t) by central difference, to be compared with |{V <= t}|."""
    h = rel_step * t
    return t * (kv(V, t + h) - kv(V, t - h)) / (2 * h)


# -- scaling inverse ----------------------------------------------------------------

def xi(V: pot.PotentialSpec, n: int, lam: float, cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> float:
    """Xi_n(lam; V): the unique tau > 0 with E_n(tau V) = lam."""
    if not lam > 0:
        raise NonPositiveInput("lambda must be positive")
    e0 = sch.eigenvalue(V, n, cfg)
    d = V.homogeneous_degree
    if d is not None:
        return (lam / e0) ** ((d + 2) / 2)
    cert = pot.certificate(V, "P1")
    k = cert.kappa_hat + 2.0
    ratio = lam / e0
    spread = max(ratio, 1.0 / ratio) * 2.0
    lo, hi = -k * math.log(spread), k * math.log(spread)

    def f(lt):
        return math.log(sch.eigenvalue(pot.scale(V, math.exp(lt)), n, cfg)) - math.log(lam)

    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise BracketFailure(f"Xi bracket [{math.exp(lo)}, {math.exp(hi)}] does not contain the root")
    return math.exp(brentq(f, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=200))


def xi_log_derivative(V: pot.PotentialSpec, n: int, lam: float, rel_step: float = 1e-3,
                      cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> float:
    """lam d(Xi_n)/d(lam) / Xi_n by central difference in log lam."""
    a = math.log(xi(V, n, lam * math.exp(rel_step), cfg))
    b = math.log(xi(V, n, lam * math.exp(-rel_step), cfg))
    return (a - b) / (2 * rel_step)


# -- virial ------------------------------------------------------------------------

def virial_ratio(V: pot.PotentialSpec, n: int, tau: float = 1.0,
                 cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG, rel_step: float = 1e-4) -> float:
    """tau dE_n(tau V)/dtau / E_n(tau V) by central differences with one Richardson step.

    All four energies are solved on the same grid so grid-dependent errors cancel.
    """
    if not tau > 0:
        raise NonPositiveInput("tau must be positive")
    Vt = pot.scale(V, tau)
    e0 = sch.eigenvalue(Vt, n, cfg)
    _, grid = sch._eigenvalue_cached(Vt, n, cfg)
    h = rel_step * tau

    def E(t):
        return sch.eigenvalue_on_grid(pot.scale(V, t), n, grid)

    d1 = (E(tau + h) - E(tau - h)) / (2 * h)
    d2 = (E(tau + h / 2) - E(tau - h / 2)) / h
    deriv = (4 * d2 - d1) / 3
    return tau * deriv / e0


def hellmann_feynman_ratio(V: pot.PotentialSpec, n: int, tau: float = 1.0,
                           cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> float:
    """<tau V psi, psi> / E_n(tau V); an independent route to the virial ratio."""
    Vt = pot.scale(V, tau)
    p = sch.eigenfunction(Vt, n, cfg)
    pot_energy = sch.integrate(p, lambda x, psi, dpsi: pot.evaluate(Vt, x) * psi * psi)
    return pot_energy / p.E


# -- sweeps ----------------------------------------------------------------------------

BS_COLUMNS = ["n", "E", "phase", "err", "ratio"]
SCALING_COLUMNS = ["n", "lambda", "xi", "virial"]


def bs_sweep(V: pot.PotentialSpec, ns, path=None, cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> list[dict]:
    rows = []
    for n in ns:
        e = sch.eigenvalue(V, n, cfg)
        ph = bs_phase(V, e)
        err = abs(ph - math.pi * n)
        rows.append({"n": n, "E": e, "phase": ph, "err": err, "ratio": err / math.log1p(n)})
    if path is not None:
        write_csv(path, BS_COLUMNS, rows)
    return rows


def scaling_sweep(V: pot.PotentialSpec, ns, lams, path=None,
                  cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> list[dict]:
    rows = []
    for n in ns:
        for lam in lams:
            t = xi(V, n, lam, cfg)
            rows.append({"n": n, "lambda": lam, "xi": t, "virial": virial_ratio(V, n, t, cfg)})
    if path is not None:
        write_csv(path, SCALING_COLUMNS, rows)
    return rows


def log_bs_growth(rows_or_ratios, split: int) -> float:
    """max ratio over n <= 2 split divided by max over n <= split."""
    ratios = np.asarray([r["ratio"] for r in rows_or_ratios] if isinstance(rows_or_ratios[0], dict)
                        else rows_or_ratios)
    return float(np.max(ratios[: 2 * split]) / np.max(ratios[:split]))
