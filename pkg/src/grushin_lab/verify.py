"""Numerical checks of eigenfunction inequalities: pointwise transition-region bounds,
Sonin-type monotone quantities, exponential decay, a summation lemma and spectral
projector sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import potential as pot
from . import schrodinger as sch
from . import semiclassics as sc
from .errors import EmptyWindow, MissingCertificate, PreconditionViolated, RegionEmpty
from .io import write_csv, write_json

INEQUALITIES = ("pointwise_psi", "pointwise_dpsi", "sonin_C3", "sonin_power", "exp_decay",
                "projector", "summation", "gap_log")


@dataclass
class BoundReport:
    inequality_id: str
    per_n: list = field(default_factory=list)  # (n, sup_ratio, argmax_x)
    family: str = ""
    cls: str = ""
    alpha: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.inequality_id not in INEQUALITIES:
            raise ValueError(f"unknown inequality {self.inequality_id!r}")

    def add(self, n, sup_ratio, argmax_x):
        if not math.isfinite(sup_ratio):
            raise PreconditionViolated(f"non-finite ratio at n={n}")
        self.per_n.append((int(n), float(sup_ratio), float(argmax_x)))
        self.per_n.sort(key=lambda r: r[0])

    @property
    def uniform_constant(self) -> float:
        return max(r[1] for r in self.per_n)

    @property
    def trend(self) -> float:
        """sup over the upper half of the n-range divided by sup over the lower half."""
        ns = [r[0] for r in self.per_n]
        mid = 0.5 * (ns[0] + ns[-1])
        lower = [r[1] for r in self.per_n if r[0] <= mid]
        upper = [r[1] for r in self.per_n if r[0] > mid]
        if not upper or max(lower) == 0:
            return 1.0
        return max(upper) / max(lower)

    def to_dict(self) -> dict:
        return {"inequality_id": self.inequality_id, "family": self.family, "class": self.cls,
                "alpha": self.alpha, "per_n": [list(r) for r in self.per_n],
                "uniform_constant": self.uniform_constant, "trend": self.trend, "params": self.params}

    def write_json(self, path) -> None:
        write_json(path, self.to_dict())

    def csv_rows(self) -> list[dict]:
        return [{"inequality": self.inequality_id, "n": n, "x": x, "ratio": r} for n, r, x in self.per_n]


def write_long_csv(path, reports) -> None:
    rows = [row for rep in reports for row in rep.csv_rows()]
    write_csv(path, ["inequality", "n", "x", "ratio"], rows)


# -- pointwise bounds ------------------------------------------------------------

def class_for_alpha(alpha: float) -> tuple[str, ...]:
    """Classes (any one suffices) under which the pointwise bound with exponent alpha is asserted."""
    if not 0 < alpha <= 0.5:
        raise PreconditionViolated("alpha must lie in (0, 1/2]")
    if alpha == 0.5:
        return ("P1",)
    if alpha > 0.25:
        return ("P1_uc",)
    if alpha == 0.25:
        return ("P1_cv", "Pk")
    raise PreconditionViolated("alpha < 1/4 is not covered")


def _require_alpha_class(V, alpha) -> str:
    for cls in class_for_alpha(alpha):
        if pot.certificate(V, cls).passed:
            return cls
    raise MissingCertificate(f"alpha={alpha} needs one of {class_for_alpha(alpha)} for {V!r}")


def _transition_mask(grid, V, E):
    """True except at the single node nearest each transition point."""
    xm, xp = pot.transition_points(V, E)
    mask = np.ones(grid.size, dtype=bool)
    mask[np.argmin(np.abs(grid - xp))] = False
    mask[np.argmin(np.abs(grid + xm))] = False
    return mask


def pointwise_ratio(V: pot.PotentialSpec, n: int, alpha: float, which: str = "psi",
                    cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> tuple[float, float]:
    """sup over grid nodes of |psi_n| (or |psi_n'|) divided by its transition-region bound."""
    _require_alpha_class(V, alpha)
    p = sch.eigenfunction(V, n, cfg)
    x = p.grid
    E = p.E
    L = pot.sublevel_measure(V, E)
    gap = 1.0 - pot.evaluate(V, x) / E
    with np.errstate(divide="ignore", invalid="ignore"):
        if which == "psi":
            bound = np.minimum(n ** (2 * alpha / 3), np.abs(gap) ** (-alpha))
            ratio = np.abs(p.psi) * math.sqrt(L) / bound
        elif which == "dpsi":
            bound = math.sqrt(E) * np.maximum(n ** ((2 * alpha - 1) / 3), np.maximum(gap, 0.0) ** (0.5 - alpha))
            ratio = np.abs(p.dpsi) * math.sqrt(L) / bound
        else:
            raise ValueError("which must be 'psi' or 'dpsi'")
    ratio = np.where(_transition_mask(x, V, E), ratio, 0.0)
    i = int(np.argmax(ratio))
    return float(ratio[i]), float(x[i])


def pointwise_report(V: pot.PotentialSpec, ns, alpha: float, which: str = "psi",
                     cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> BoundReport:
    cls = _require_alpha_class(V, alpha)
    rep = BoundReport(f"pointwise_{which}", family=V.family, cls=cls, alpha=alpha,
                      params={"potential": V.to_config()})
    for n in ns:
        rep.add(n, *pointwise_ratio(V, n, alpha, which, cfg))
    return rep


# -- monotone envelopes ------------------------------------------------------------

def monotone_envelopes(p: sch.EigenPair, tol: float = 1e-8) -> dict:
    """Sign violations of the two energy-type envelopes.

    g = (E - V) psi^2 + psi'^2 is nondecreasing for x < 0 and nonincreasing for x > 0;
    h = psi^2 + psi'^2 / (E - V) is nonincreasing on the classical part of x < 0 and
    nondecreasing on the classical part of x > 0 (one cell at each transition point is skipped).
    """
    x, psi, dpsi = p.grid, p.psi, p.dpsi
    q = p.E - pot.evaluate(p.V, x)
    g = q * psi ** 2 + dpsi ** 2
    dg = np.diff(g)
    xl, xr = x[:-1], x[1:]
    gtol = tol * np.max(g)
    g_viol = int(np.sum((xr <= 0) & (dg < -gtol)) + np.sum((xl >= 0) & (dg > gtol)))

    xm, xp = pot.transition_points(p.V, p.E)
    inside = (x > -xm) & (x < xp)
    idx = np.flatnonzero(inside)
    # drop the cell adjacent to each transition point
    idx = idx[1:-1]
    with np.errstate(divide="ignore"):
        h = psi ** 2 + dpsi ** 2 / q
    hi = h[idx]
    htol = tol * np.max(hi)
    dh = np.diff(hi)
    xa, xb = x[idx[:-1]], x[idx[1:]]
    contiguous = np.diff(idx) == 1
    h_viol = int(np.sum(contiguous & (xb <= 0) & (dh > htol)) + np.sum(contiguous & (xa >= 0) & (dh < -htol)))
    return {"g_violations": g_viol, "h_violations": h_viol}


# -- Sonin functions --------------------------------------------------------------------

def _region_points(p: sch.EigenPair, lo: float, hi: float, exclude: float, minimum: int = 32) -> np.ndarray:
    """Grid nodes in [lo, hi) minus the one nearest `exclude`, topped up with evenly spaced points.

    Off-node values come from a single propagator step, so the extra points cost no accuracy.
    """
    x = p.grid[(p.grid >= lo) & (p.grid < hi)]
    if x.size < minimum and hi > lo:
        x = np.union1d(x, np.linspace(lo, hi, minimum + 1)[:-1])
    if x.size:
        x = np.delete(x, np.argmin(np.abs(x - exclude)))
    if x.size < 8:
        raise RegionEmpty(f"only {x.size} samples in [{lo:.6g}, {hi:.6g})")
    return x


def _slope_violations(S: np.ndarray, increasing: bool, tol: float) -> int:
    d = np.diff(S)
    t = tol * np.max(np.abs(S))
    return int(np.sum(d < -t)) if increasing else int(np.sum(d > t))


def sonin_profile(V: pot.PotentialSpec, n: int, variant: str = "C3", eps: float = 0.1,
                  alpha: float = 0.25, delta: float = 1.0, tol: float = 1e-8,
                  cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> tuple[int, np.ndarray]:
    """(violations, S samples) for a Sonin function near both transition points.

    variant "C3": f = (E-V)^(1/4) psi, B = E - V + (5/16) V'^2/(E-V)^2 + (1/4) V''/(E-V),
    on {(1-eps) E <= V < E}; S = f^2 + f'^2/B decreases for x > 0 and increases for x < 0.
    variant "power": f = y^alpha psi with y the distance to the transition point,
    B = E - V + alpha(alpha+1)/y^2, on the last factor e^(-delta) of the way to it.
    """
    if n < 2:
        raise PreconditionViolated("n must be >= 2")
    if variant == "C3":
        pot.require_class(V, "Pk", k=3, error=MissingCertificate)
    elif variant == "power":
        if alpha == 0.25:
            pot.require_class(V, "P1_cv", error=MissingCertificate)
        elif 0.25 < alpha < 0.5:
            pot.require_class(V, "P1_uc", error=MissingCertificate)
        else:
            raise PreconditionViolated("power variant needs alpha in [1/4, 1/2)")
    else:
        raise ValueError("variant must be 'C3' or 'power'")
    p = sch.eigenfunction(V, n, cfg)
    E = p.E
    xm, xp = pot.transition_points(V, E)
    samples, violations = [], 0
    for side, xt in ((1, xp), (-1, xm)):
        if variant == "C3":
            inner = pot.half_inverse(V, (1 - eps) * E, side)
        else:
            inner = math.exp(-delta) * xt
        if side == 1:
            x = _region_points(p, inner, xt, xt)
        else:
            x = _region_points(p, -xt, -inner, -xt)
        psi, dpsi = sch.evaluate(p, x)
        v = pot.evaluate(V, x)
        q = E - v
        if variant == "C3":
            v1 = pot.evaluate(V, x, 1)
            v2 = pot.evaluate(V, x, 2)
            f = q ** 0.25 * psi
            df = q ** 0.25 * (dpsi - v1 * psi / (4 * q))
            B = q + (5.0 / 16.0) * v1 ** 2 / q ** 2 + 0.25 * v2 / q
        else:
            y = xt - side * x
            f = y ** alpha * psi
            df = y ** alpha * (dpsi - side * alpha * psi / y)
            B = q + alpha * (alpha + 1) / y ** 2
        S = f ** 2 + df ** 2 / B
        violations += _slope_violations(S, increasing=(side == -1), tol=tol)
        samples.append(S)
    return violations, np.concatenate(samples)


# -- exponential decay ---------------------------------------------------------------------

def exp_decay_fit(V: pot.PotentialSpec, n: int, cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> tuple[float, float]:
    """(c_fit, max_violation) for |psi_n| |{V<=E}|^(1/2) ~ exp(-c |x| V(x)^(1/2)) on {V >= 4E}.

    The eigenfunction is recomputed on a domain reaching V = 8E (wider when needed) and handled through
    log|psi_n|, since it underflows long before that for slowly growing V.  Nodes
    within reach of the Dirichlet end (remaining decay exponent < 20) are dropped.
    """
    for factor in (8.0, 16.0, 32.0, 64.0):
        # low n needs more room past V = 4E before the Dirichlet end
        p = sch.eigenfunction(V, n, replace(cfg, truncation_factor=factor, decay_exponent=1e12))
        x = p.grid
        v = pot.evaluate(V, x)
        logpsi = sch.log_abs_profile(p)
        q = np.sqrt(np.maximum(v - p.E, 0.0))
        seg = 0.5 * (q[1:] + q[:-1]) * np.diff(x)
        to_left = np.concatenate([[0.0], np.cumsum(seg)])
        to_right = to_left[-1] - to_left
        sel = (v >= 4 * p.E) & (np.minimum(to_left, to_right) >= 20.0) & np.isfinite(logpsi)
        if np.count_nonzero(sel) >= 20:
            break
    if np.count_nonzero(sel) < 3:
        raise RegionEmpty(f"grid has too few nodes with V >= 4E for n={n}")
    L = pot.sublevel_measure(V, p.E)
    X = np.abs(x[sel]) * np.sqrt(v[sel])
    Y = -(logpsi[sel] + 0.5 * math.log(L))
    c_fit, _ = np.polyfit(X, Y, 1)
    viol = float(np.exp(np.max(-Y + c_fit * X / 2)))
    return float(c_fit), viol


# -- summation lemma ----------------------------------------------------------------------------

def summation_oracle(t, a: float, b: float, theta: float, beta: float, kappa: float,
                     c: float | None = None) -> float:
    """Brute-force sum over {n : t_n <= kappa a} of min{a^(theta-1) |t_n - b|^(-theta), a^(-beta)}."""
    t = np.asarray(t, dtype=float)
    if not (0 < b <= kappa * a):
        raise PreconditionViolated("need 0 < b <= kappa * a")
    if not (0 <= theta < 1 and 0 <= beta < 1):
        raise PreconditionViolated("theta and beta must lie in [0, 1)")
    if c is not None:
        n = np.arange(1, t.size + 1)
        if np.any(np.abs(t - c * n) > kappa * n ** beta + 1e-12):
            raise PreconditionViolated("t_n deviates from c n by more than kappa n^beta")
    tt = t[t <= kappa * a]
    if tt.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        near = a ** (theta - 1) * np.abs(tt - b) ** (-theta)
    terms = np.minimum(near, a ** (-beta))
    return math.fsum(terms)


def random_summation_instances(rng: np.random.Generator, count: int, theta: float, beta: float,
                               kappa: float, c: float = 1.0, a_range=(1.0, 1e4)) -> list[dict]:
    """Admissible random instances: t_n = c n + kappa n^beta u_n with u_n in [-1, 1]."""
    out = []
    for _ in range(count):
        a = math.exp(rng.uniform(math.log(a_range[0]), math.log(a_range[1])))
        b = rng.uniform(0.0, kappa * a) or kappa * a
        N = int(math.ceil(2 * kappa * a / c)) + 2
        n = np.arange(1, N + 1)
        t = c * n + kappa * n ** beta * rng.uniform(-1.0, 1.0, size=N)
        out.append({"t": t, "a": a, "b": b})
    return out


def summation_sup(instances, theta, beta, kappa, c=1.0) -> float:
    return max(summation_oracle(i["t"], i["a"], i["b"], theta, beta, kappa, c) for i in instances)


# -- spectral projector sums ---------------------------------------------------------------------

def _scaled_psi(V, n, tau, x, cfg):
    """psi_n(x; tau V), through the scaling law when V is homogeneous."""
    d = V.homogeneous_degree
    if d is not None:
        p = sch.eigenfunction(V, n, cfg)
        s = tau ** (1.0 / (d + 2))
        return math.sqrt(s) * float(p(s * x)[0])
    return float(sch.eigenfunction(pot.scale(V, tau), n, cfg)(x)[0])


def projector_window(V: pot.PotentialSpec, lam: float, A: float, n_cap: int = 5000,
                     cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> list[tuple[int, float]]:
    """[(n, Xi_n)] with lam / Xi_n in [A, 2A].

    lam / Xi_n increases with n, so the first n with ratio >= A is located by doubling
    and bisection, then the window is walked upward.
    """
    if not (lam > 0 and A > 0):
        raise PreconditionViolated("lambda and A must be positive")

    def ratio(n):
        return lam / sc.xi(V, n, lam, cfg)

    if ratio(1) >= A:
        first = 1
    else:
        lo, hi = 1, 2
        while ratio(hi) < A:
            lo, hi = hi, 2 * hi
            if lo >= n_cap:
                raise PreconditionViolated(f"window did not open below n={n_cap}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            lo, hi = (mid, hi) if ratio(mid) < A else (lo, mid)
        first = hi
    out = []
    n = first
    while True:
        t = sc.xi(V, n, lam, cfg)
        if lam / t > 2 * A:
            return out
        out.append((n, t))
        n += 1
        if n > n_cap:
            raise PreconditionViolated(f"window did not close below n={n_cap}")


def projector_sum(V: pot.PotentialSpec, lam: float, A: float, x: float, c: float | None = None,
                  cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> tuple[float, float, list[int]]:
    """(sum of psi_n(x; Xi_n V)^2 over the window, normalized ratio, window indices)."""
    pot.require_class(V, "P1_uc", error=MissingCertificate)
    window = projector_window(V, lam, A, cfg=cfg)
    if not window:
        return 0.0, 0.0, []
    total = math.fsum(_scaled_psi(V, n, t, x, cfg) ** 2 for n, t in window)
    scale = math.sqrt(lam)
    if float(pot.evaluate(V, x)) > 8 * A:
        if c is None:
            c = exp_decay_fit(V, 10, cfg)[0]
        scale *= math.exp(-c * math.sqrt(lam) * abs(x))
    return total, total / scale, [n for n, _ in window]


def projector_report(V: pot.PotentialSpec, lams, As, n_x: int = 9,
                     cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> dict:
    """Max ratio per lambda over A and x in the sublevel set {V <= 8A}; trend over the lambda range."""
    per_lam = []
    cells = []
    for lam in lams:
        best = 0.0
        for A in As:
            xm, xp = pot.transition_points(V, 8 * A)
            for x in np.linspace(-xm, xp, n_x):
                s, r, w = projector_sum(V, lam, A, float(x), cfg=cfg)
                cells.append({"lambda": lam, "A": A, "x": float(x), "sum": s, "ratio": r, "window": len(w)})
                best = max(best, r)
        per_lam.append(best)
    half = len(per_lam) // 2
    lower, upper = per_lam[: len(per_lam) - half], per_lam[len(per_lam) - half:]
    # a trend needs at least two lambdas
    trend = max(upper) / max(lower) if upper else float("nan")
    return {"per_lambda": per_lam, "cells": cells, "max_ratio": max(per_lam),
            "trend": trend, "finite": bool(np.all(np.isfinite(per_lam)))}


@dataclass
class GapReport:
    window: list
    gaps: list
    ratios: list

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)


def gap_log_check(V: pot.PotentialSpec, lam: float, A: float,
                  cfg: sch.EigenSolveConfig = sch.DEFAULT_CONFIG) -> GapReport:
    """t_n = lam^(1/2) K_V(lam / Xi_n) against pi n over the projector window."""
    window = projector_window(V, lam, A, cfg=cfg)
    if not window:
        raise EmptyWindow(f"no n with lambda/Xi_n in [{A}, {2 * A}]")
    ns, gaps, ratios = [], [], []
    for n, t in window:
        tn = math.sqrt(lam) * sc.kv(V, lam / t)
        g = abs(tn - math.pi * n)
        ns.append(n)
        gaps.append(g)
        ratios.append(g / math.log1p(n))
    return GapReport(window=ns, gaps=gaps, ratios=ratios)
