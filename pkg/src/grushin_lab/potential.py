"""Single-well potentials, their derivatives, class certificates and sublevel geometry.

A potential is stored as a base family profile together with an amplitude and a
dilation, ``V(x) = amplitude * base(dilation * x)``.  Both ``scale`` and
``rescale`` only touch these two numbers, so every class certificate of the base
profile carries over unchanged (the potential classes are cones, and dilations
preserve the scale-invariant inequalities).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (
    ConfigError,
    DerivativeAtOrigin,
    GridTooCoarse,
    NonPositiveInput,
    NotCertified,
    UnsupportedOrder,
)

FAMILIES = ("power", "power_asym", "power_logperturbed", "two_power", "tabulated")
CLASSES = ("P1", "P1_uc", "P1_cv", "Pk", "P1_holder")

# closed-form families expose derivatives of every order; this is just a sane cap
_MAX_ORDER = 8
_GUARD = 1e-300


@dataclass(frozen=True)
class PotentialSpec:
    family: str
    params: tuple[float, ...] = ()
    table_x: tuple[float, ...] = ()
    table_v: tuple[float, ...] = ()
    amplitude: float = 1.0
    dilation: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown potential family {self.family!r}")
        if self.amplitude <= 0 or self.dilation <= 0:
            raise ConfigError("amplitude and dilation must be positive")
        p = self.params
        if self.family == "power":
            if len(p) != 1 or not p[0] > 0:
                raise ConfigError("power needs d > 0")
        elif self.family == "power_asym":
            if len(p) != 2 or not (p[0] > 0 and p[1] > 0):
                raise ConfigError("power_asym needs d > 0 and a > 0")
        elif self.family == "power_logperturbed":
            if len(p) != 2 or not p[0] > 0 or not 0 <= p[1] < 0.5:
                raise ConfigError("power_logperturbed needs d > 0 and 0 <= eps < 1/2")
            if p[1] >= p[0] / 2:
                # keeps x V'/V = d + eps cos/(1 + eps sin) bounded away from zero
                raise ConfigError("power_logperturbed needs eps < d/2")
        elif self.family == "two_power":
            if len(p) != 2 or not 0 < p[0] < p[1]:
                raise ConfigError("two_power needs 0 < d1 < d2")
        elif self.family == "tabulated":
            if len(self.table_x) != len(self.table_v) or len(self.table_x) < 4:
                raise ConfigError("tabulated potential needs matching x and v arrays")
            xs = np.asarray(self.table_x)
            vs = np.asarray(self.table_v)
            if np.any(np.diff(xs) <= 0):
                raise ConfigError("tabulated x must be strictly increasing")
            nz = xs != 0
            if np.any(vs[nz] <= 0):
                raise ConfigError("tabulated v must be positive off the origin")
            if (xs > 0).sum() < 2 or (xs < 0).sum() < 2:
                raise ConfigError("tabulated potential needs at least two samples on each side")

    # -- evaluation -------------------------------------------------------
    @property
    def derivative_order_available(self) -> int:
        return 1 if self.family == "tabulated" else _MAX_ORDER

    def __call__(self, x):
        return evaluate(self, x, 0)

    def derivative(self, x, order: int = 1):
        return evaluate(self, x, order)

    @property
    def homogeneous_degree(self) -> float | None:
        """Degree d when V(s x) = s^d V(x) for s > 0, else None."""
        if self.family in ("power", "power_asym"):
            return self.params[0]
        return None

    @property
    def is_even(self) -> bool:
        if self.family == "power_asym":
            return self.params[1] == 1.0
        if self.family == "tabulated":
            xs = np.asarray(self.table_x)
            vs = np.asarray(self.table_v)
            return bool(np.allclose(xs, -xs[::-1]) and np.allclose(vs, vs[::-1]))
        return True

    # -- serialization ----------------------------------------------------
    def to_config(self) -> dict:
        f, p = self.family, self.params
        if f == "power":
            cfg = {"family": f, "d": p[0]}
        elif f == "power_asym":
            cfg = {"family": f, "d": p[0], "a": p[1]}
        elif f == "power_logperturbed":
            cfg = {"family": f, "d": p[0], "eps": p[1]}
        elif f == "two_power":
            cfg = {"family": f, "d1": p[0], "d2": p[1]}
        else:
            cfg = {"family": f, "x": list(self.table_x), "v": list(self.table_v)}
        if self.amplitude != 1.0:
            cfg["amplitude"] = self.amplitude
        if self.dilation != 1.0:
            cfg["dilation"] = self.dilation
        return cfg

    @property
    def key(self) -> str:
        blob = json.dumps(self.to_config(), sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def __repr__(self):
        cfg = self.to_config()
        if self.family == "tabulated":
            cfg = {k: v for k, v in cfg.items() if k not in ("x", "v")}
            cfg["samples"] = len(self.table_x)
        return f"PotentialSpec({cfg})"


_CONFIG_KEYS = {
    "power": ("d",),
    "power_asym": ("d", "a"),
    "power_logperturbed": ("d", "eps"),
    "two_power": ("d1", "d2"),
    "tabulated": ("x", "v"),
}


def from_config(cfg: dict) -> PotentialSpec:
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise ConfigError("potential config must be an object with a 'family' key")
    fam = cfg["family"]
    if fam not in _CONFIG_KEYS:
        raise ConfigError(f"unknown potential family {fam!r}")
    allowed = set(_CONFIG_KEYS[fam]) | {"family", "amplitude", "dilation"}
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown keys for {fam}: {sorted(extra)}")
    missing = [k for k in _CONFIG_KEYS[fam] if k not in cfg]
    if missing:
        raise ConfigError(f"missing keys for {fam}: {missing}")
    amp = float(cfg.get("amplitude", 1.0))
    dil = float(cfg.get("dilation", 1.0))
    try:
        if fam == "tabulated":
            return PotentialSpec(fam, (), tuple(map(float, cfg["x"])), tuple(map(float, cfg["v"])), amp, dil)
        return PotentialSpec(fam, tuple(float(cfg[k]) for k in _CONFIG_KEYS[fam]), amplitude=amp, dilation=dil)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load(path) -> PotentialSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return from_config(cfg)


def power(d: float) -> PotentialSpec:
    return PotentialSpec("power", (float(d),))


def power_asym(d: float, a: float) -> PotentialSpec:
    return PotentialSpec("power_asym", (float(d), float(a)))


def power_logperturbed(d: float, eps: float) -> PotentialSpec:
    return PotentialSpec("power_logperturbed", (float(d), float(eps)))


def two_power(d1: float, d2: float) -> PotentialSpec:
    return PotentialSpec("two_power", (float(d1), float(d2)))


def tabulated(x: Sequence[float], v: Sequence[float]) -> PotentialSpec:
    return PotentialSpec("tabulated", (), tuple(map(float, x)), tuple(map(float, v)))


def scale(V: PotentialSpec, tau: float) -> PotentialSpec:
    """tau * V."""
    if tau <= 0:
        raise NonPositiveInput("tau must be positive")
    return PotentialSpec(V.family, V.params, V.table_x, V.table_v, V.amplitude * tau, V.dilation)


def rescale(V: PotentialSpec, r: float) -> PotentialSpec:
    """V_r(x) = r^2 V(r x)."""
    if r <= 0:
        raise NonPositiveInput("r must be positive")
    return PotentialSpec(V.family, V.params, V.table_x, V.table_v, V.amplitude * r * r, V.dilation * r)


# -- half-line profiles ------------------------------------------------------

def _falling(d: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= d - j
    return out


@lru_cache(maxsize=64)
def _table_halves(table_x: tuple, table_v: tuple):
    xs = np.asarray(table_x)
    vs = np.asarray(table_v)
    halves = {}
    for side in (1, -1):
        m = xs * side > 0
        s = np.abs(xs[m])
        v = vs[m]
        order = np.argsort(s)
        ls, lv = np.log(s[order]), np.log(v[order])
        interp = PchipInterpolator(ls, lv, extrapolate=False)
        slopes = interp.derivative()
        halves[side] = (ls, lv, interp, slopes, float(slopes(ls[0])), float(slopes(ls[-1])))
    return halves


def _tab_half(V: PotentialSpec, s: np.ndarray, side: int, order: int) -> np.ndarray:
    ls, lv, interp, slopes, lo_slope, hi_slope = _table_halves(V.table_x, V.table_v)[side]
    out = np.zeros_like(s)
    pos = s > 0
    L = np.log(s[pos])
    logv = interp(L)
    slope = slopes(L)
    below = L < ls[0]
    above = L > ls[-1]
    logv[below] = lv[0] + lo_slope * (L[below] - ls[0])
    slope[below] = lo_slope
    logv[above] = lv[-1] + hi_slope * (L[above] - ls[-1])
    slope[above] = hi_slope
    val = np.exp(logv)
    out[pos] = val if order == 0 else val * slope / s[pos]
    return out


def _half(V: PotentialSpec, s: np.ndarray, side: int, order: int) -> np.ndarray:
    """order-th derivative of the half profile s -> base(side * s), s >= 0 (unscaled)."""
    fam, p = V.family, V.params
    if fam == "tabulated":
        return _tab_half(V, s, side, order)
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam in ("power", "power_asym"):
            d = p[0]
            c = p[1] if (fam == "power_asym" and side < 0) else 1.0
            if order == 0:
                return c * s**d
            return c * _falling(d, order) * s ** (d - order)
        if fam == "two_power":
            d1, d2 = p
            if order == 0:
                return s**d1 + s**d2
            return _falling(d1, order) * s ** (d1 - order) + _falling(d2, order) * s ** (d2 - order)
        # power_logperturbed: V(s) = s^d (1 + eps sin log s); V^(k) = s^(d-k) P_k(log s)
        d, eps = p
        c0, c1, c2 = 1.0, eps, 0.0
        for k in range(order):
            c0, c1, c2 = (d - k) * c0, (d - k) * c1 - c2, (d - k) * c2 + c1
        L = np.log(s)
        val = s ** (d - order) * (c0 + c1 * np.sin(L) + c2 * np.cos(L))
        if order == 0:
            val = np.where(s == 0, 0.0, val)
        return val


def evaluate(V: PotentialSpec, x, order: int = 0):
    """V^(order)(x), vectorized over x."""
    if order < 0 or order > V.derivative_order_available:
        raise UnsupportedOrder(f"order {order} not available for {V.family}")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if order >= 1 and np.any(np.abs(xa) < _GUARD):
        raise DerivativeAtOrigin("derivatives are undefined at the origin")
    u = V.dilation * xa
    out = np.empty_like(u)
    for side in (1, -1):
        m = u * side > 0 if side < 0 else u >= 0
        if np.any(m):
            val = _half(V, np.abs(u[m]), side, order)
            out[m] = val * (side**order)
    out *= V.amplitude * V.dilation**order
    if order == 0:
        out[u == 0] = 0.0
    return float(out[0]) if scalar else out


# -- half potentials and Lagrange ratios ---------------------------------------

@dataclass(frozen=True)
class HalfPotential:
    """W(s) = V(side * s) on (0, inf)."""

    V: PotentialSpec
    side: int = 1

    def __call__(self, s):
        return evaluate(self.V, self.side * np.asarray(s, dtype=float), 0)

    def derivative(self, s):
        return self.side * evaluate(self.V, self.side * np.asarray(s, dtype=float), 1)

    def inverse(self, t: float) -> float:
        return half_inverse(self.V, t, self.side)


def half(V: PotentialSpec, side: int = 1) -> HalfPotential:
    return HalfPotential(V, 1 if side > 0 else -1)


def lagrange_gap(W: Callable, x: float, y: float) -> float:
    """(W(x) - W(y)) / ((W(x)/x)(x - y)) for x >= y > 0."""
    if not (x > 0 and y > 0) or x < y:
        raise NonPositiveInput("need x >= y > 0")
    wx = float(W(x))
    if x == y:
        if hasattr(W, "derivative"):
            return float(x * W.derivative(x) / wx)
        raise NonPositiveInput("x == y needs a derivative")
    return (wx - float(W(y))) / ((wx / x) * (x - y))


# -- sublevel geometry -------------------------------------------------------

def half_inverse(V: PotentialSpec, t: float, side: int = 1) -> float:
    """The s > 0 with V(side * s) = t."""
    if t <= 0:
        raise NonPositiveInput("t must be positive")
    side = 1 if side > 0 else -1
    tt = t / V.amplitude
    if V.family in ("power", "power_asym"):
        d = V.params[0]
        c = V.params[1] if (V.family == "power_asym" and side < 0) else 1.0
        return (tt / c) ** (1.0 / d) / V.dilation

    def g(ls):
        return math.log(float(_half(V, np.array([math.exp(ls)]), side, 0)[0])) - math.log(tt)

    lo, hi = -1.0, 1.0
    for _ in range(400):
        if g(lo) < 0:
            break
        lo -= 2.0
    for _ in range(400):
        if g(hi) > 0:
            break
        hi += 2.0
    ls = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.exp(ls) / V.dilation


def transition_points(V: PotentialSpec, E: float) -> tuple[float, float]:
    """(x_minus, x_plus) with V(-x_minus) = E = V(x_plus)."""
    require_class(V, "P1")
    return half_inverse(V, E, -1), half_inverse(V, E, 1)


def sublevel_measure(V: PotentialSpec, t: float) -> float:
    """Lebesgue measure of {V <= t}."""
    require_class(V, "P1")
    return half_inverse(V, t, 1) + half_inverse(V, t, -1)


# -- certification -----------------------------------------------------------

@dataclass(frozen=True)
class ClassCertificate:
    cls: str
    kappa_hat: float
    verdict: str
    worst_x: float
    theta: float | None = None
    k: int | None = None
    grid_points: int = 0
    omega: tuple[tuple[float, float], ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "class": self.cls,
            "kappa_hat": _finite_or_none(self.kappa_hat),
            "theta": self.theta,
            "verdict": self.verdict,
            "worst_x": _finite_or_none(self.worst_x),
        }


def _finite_or_none(v):
    return float(v) if v is not None and math.isfinite(v) else None


def _ratio_sup(values: np.ndarray, xs: np.ndarray) -> tuple[float, float]:
    bad = ~np.isfinite(values)
    if np.any(bad):
        return math.inf, float(xs[np.argmax(bad)])
    i = int(np.argmax(values))
    return float(values[i]), float(xs[i])


def _kappa_on_grid(V, cls, x, k, theta, h_grid):
    """Tightest constant on the grid and where it is attained."""
    xs = np.concatenate([-x[::-1], x])
    v = evaluate(V, xs)
    vm = evaluate(V, -xs)
    dv = evaluate(V, xs, 1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = xs * dv / v
        cands = [np.where(r > 0, np.maximum(r, 1.0 / r), np.inf), vm / v, np.ones_like(v)]
        if cls == "Pk":
            for ell in range(2, k + 1):
                cands.append(np.abs(xs**ell * evaluate(V, xs, ell)) / v)
        if cls == "P1_holder":
            hh = np.concatenate([-h_grid[::-1], h_grid])
            shifted = evaluate(V, np.outer(xs, np.exp(hh)).ravel(), 1).reshape(len(xs), len(hh))
            ratio = np.abs(shifted - dv[:, None]) / (np.abs(dv[:, None]) * np.abs(hh[None, :]) ** theta)
            cands.append(ratio.max(axis=1))
    stack = np.vstack(cands)
    per_x = np.where(np.all(np.isfinite(stack), axis=0), stack.max(axis=0), np.inf)
    return _ratio_sup(per_x, xs)


def _convex_on_grid(V, x) -> tuple[bool, float]:
    xs = np.concatenate([-x[::-1], x])
    if V.derivative_order_available >= 2:
        d2 = evaluate(V, xs, 2)
        scale_ = np.abs(evaluate(V, xs)) / xs**2
        bad = d2 < -1e-12 * scale_
    else:
        dv = evaluate(V, xs, 1)
        bad = np.zeros_like(xs, dtype=bool)
        bad[1:] = np.diff(dv) < -1e-12 * np.abs(dv[1:])
    if np.any(bad):
        return False, float(xs[np.argmax(bad)])
    return True, float("nan")


def _omega_hat(V, x, t_values):
    """sup |log(V'(±x e^s) / V'(±x))| over the grid and 0 < s <= t, for each t."""
    res = []
    fractions = np.array([0.25, 0.5, 0.75, 1.0])
    with np.errstate(divide="ignore", invalid="ignore"):
        for tv in t_values:
            worst = 0.0
            for side in (1, -1):
                base = np.log(np.abs(evaluate(V, side * x, 1)))
                for sign in (1.0, -1.0):
                    shifted = np.log(np.abs(evaluate(V, side * np.outer(x, np.exp(sign * tv * fractions)).ravel(), 1)))
                    diff = np.abs(shifted.reshape(len(x), -1) - base[:, None])
                    if not np.all(np.isfinite(diff)):
                        return [(float(t), math.inf) for t in t_values]
                    worst = max(worst, float(diff.max()))
            res.append((float(tv), worst))
    return res


def _certify_once(V, cls, grid_points, k, theta):
    x = np.logspace(-6, 6, grid_points)
    h_grid = np.logspace(-6, 0, 25)
    kappa, worst = _kappa_on_grid(V, cls, x, k, theta, h_grid)
    extra = {}
    ok = math.isfinite(kappa)
    if cls == "P1_cv":
        convex, where = _convex_on_grid(V, x)
        if not convex:
            ok, worst = False, where
    if cls == "P1_uc":
        t_values = [2.0**-j for j in range(0, 11)]
        om = _omega_hat(V, x, t_values)
        extra["omega"] = tuple(om)
        w_small, w_big = om[-1][1], om[0][1]
        if not math.isfinite(w_big) or not (w_small <= 1e-12 or w_small <= 0.1 * w_big):
            ok = False
        elif w_small > 1e-12 and w_big > 0:
            # Hoelder exponent of the modulus
            extra["theta"] = min(1.0, math.log(w_big / w_small) / math.log(t_values[0] / t_values[-1]))
    return kappa, worst, ok, extra


def certify(V: PotentialSpec, cls: str = "P1", kappa_max: float = 1e6, grid_points: int = 64,
            k: int = 3, theta: float = 0.5) -> ClassCertificate:
    """Grid certificate of class membership on x in [1e-6, 1e6] (log-spaced, both signs).

    kappa_hat is re-estimated on the nested grid with 2*grid_points - 1 nodes; a change of
    more than 1% raises GridTooCoarse.
    """
    if cls not in CLASSES:
        raise ConfigError(f"unknown class {cls!r}")
    if grid_points < 64:
        raise ConfigError("grid_points must be >= 64")
    if kappa_max < 1:
        raise ConfigError("kappa_max must be >= 1")
    if cls == "Pk" and k > V.derivative_order_available:
        return ClassCertificate(cls, math.inf, "fail", math.nan, k=k, grid_points=grid_points)
    if cls == "P1_cv" and V.derivative_order_available < 2 and V.family != "tabulated":
        raise UnsupportedOrder("convexity check needs derivatives")
    k1, w1, ok1, ex1 = _certify_once(V, cls, grid_points, k, theta)
    k2, w2, ok2, ex2 = _certify_once(V, cls, 2 * grid_points - 1, k, theta)
    if math.isfinite(k1) != math.isfinite(k2) or (
        math.isfinite(k1) and abs(k2 - k1) > 0.01 * k1
    ):
        raise GridTooCoarse(f"kappa_hat moved from {k1} to {k2} under grid doubling")
    verdict = "pass" if (ok2 and k2 <= kappa_max) else "fail"
    th = theta if cls == "P1_holder" else ex2.get("theta")
    return ClassCertificate(
        cls=cls,
        kappa_hat=k2,
        verdict=verdict,
        worst_x=w2,
        theta=th,
        k=k if cls == "Pk" else None,
        grid_points=grid_points,
        omega=ex2.get("omega", ()),
    )


def _base(V: PotentialSpec) -> PotentialSpec:
    return PotentialSpec(V.family, V.params, V.table_x, V.table_v)


@lru_cache(maxsize=256)
def _cached_certificate(V: PotentialSpec, cls: str, k: int) -> ClassCertificate:
    try:
        return certify(V, cls, k=k)
    except GridTooCoarse:
        return ClassCertificate(cls, math.inf, "fail", math.nan, k=k)


def certificate(V: PotentialSpec, cls: str, k: int = 3) -> ClassCertificate:
    """Cached certificate; scaling and dilation never change class membership."""
    return _cached_certificate(_base(V), cls, k)


def require_class(V: PotentialSpec, cls: str, k: int = 3, error=NotCertified) -> ClassCertificate:
    cert = certificate(V, cls, k)
    if not cert.passed:
        raise error(f"{V!r} is not certified {cls}")
    return cert


def certificate_json(cert: ClassCertificate) -> str:
    return json.dumps(cert.to_json(), sort_keys=True)
