"""Kernels of spectral multipliers m(r^2 L) of L = -d_x^2 - V(x) d_y^2 on the plane.

Fourier transform in y turns L into the fiber operators -d_x^2 + xi^2 V, so

    K(x, x', u) = (1/pi) int_0^inf cos(xi u) F(x, x', xi) dxi,
    F = sum_n m(r^2 E_n(xi^2 V)) psi_n(x; xi^2 V) psi_n(x'; xi^2 V),

with u = y - y'.  Only finitely many n contribute at each xi because m is
supported in [1/4, 1].  As xi -> 0 the window moves to ever larger n; the
integrand is switched off towards xi_min (the point where the window would
pass n_cap) by a smooth taper.  All quantities below are
computed for that regularized kernel, consistently on both the u-side and the
xi-side of every identity.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc

from . import potential as pot
from . import schrodinger as sch
from .errors import ConfigError, NotConverged, TailNotConverged, WindowOverflow
from .io import write_csv

SUPPORT = (0.25, 1.0)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


# -- multipliers ----------------------------------------------------------------------

@dataclass(frozen=True)
class MultiplierSpec:
    """m on [0, inf) with support inside [1/4, 1].

    bump: params (center, half_plateau, ramp); 1 on the plateau, smooth ramps.
    riesz_fragment: params (order, j); (1 - lam)_+^order chi(2^j (1 - lam)) with chi a
    smooth bump on [1/2, 2].
    tabulated: PCHIP through (table_x, table_v), zero outside the table.
    zero: m = 0.
    """

    kind: str = "bump"
    params: tuple = (0.5, 0.05, 0.05)
    table_x: tuple = ()
    table_v: tuple = ()

    def __post_init__(self):
        lo, hi = self.support
        if lo < SUPPORT[0] - 1e-12 or hi > SUPPORT[1] + 1e-12:
            raise ConfigError(f"multiplier support [{lo}, {hi}] not inside [1/4, 1]")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "bump":
            c, p, w = self.params
            return c - p - w, c + p + w
        if self.kind == "riesz_fragment":
            _, j = self.params
            return 1.0 - 2.0 ** (1 - j), 1.0 - 2.0 ** (-j - 1)
        if self.kind == "tabulated":
            return min(self.table_x), max(self.table_x)
        if self.kind == "zero":
            return 0.5, 0.5
        raise ConfigError(f"unknown multiplier kind {self.kind!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "tabulated" and not any(self.table_v))

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "bump":
            c, p, w = self.params
            return smooth_step((lam - (c - p - w)) / w) * smooth_step(((c + p + w) - lam) / w)
        if self.kind == "riesz_fragment":
            order, j = self.params
            t = (2.0 ** j) * (1.0 - lam)
            chi = smooth_step((t - 0.5) / 0.5) * smooth_step((2.0 - t) / 1.0)
            return np.where(lam < 1, np.abs(1.0 - lam) ** order, 0.0) * chi
        if self.kind == "tabulated":
            return np.nan_to_num(_table_interp(self.table_x, self.table_v)(lam), nan=0.0)
        return np.zeros_like(lam)

    def to_config(self) -> dict:
        out = {"kind": self.kind, "params": list(self.params)}
        if self.kind == "tabulated":
            out.update(table_x=list(self.table_x), table_v=list(self.table_v))
        return out


@lru_cache(maxsize=32)
def _table_interp(xs: tuple, vs: tuple) -> PchipInterpolator:
    return PchipInterpolator(np.array(xs), np.array(vs), extrapolate=False)


def bump(center: float = 0.5, half_plateau: float = 0.05, ramp: float = 0.05) -> MultiplierSpec:
    return MultiplierSpec("bump", (center, half_plateau, ramp))


def riesz_fragment(order: float, j: int) -> MultiplierSpec:
    if j < 2:
        raise ConfigError("dyadic pieces with j < 2 leave [1/4, 1]")
    return MultiplierSpec("riesz_fragment", (float(order), int(j)))


def tabulated_multiplier(x, v) -> MultiplierSpec:
    return MultiplierSpec("tabulated", (), tuple(map(float, x)), tuple(map(float, v)))


ZERO = MultiplierSpec("zero", ())


def multiplier_from_config(cfg: dict) -> MultiplierSpec:
    kind = cfg.get("kind", "bump")
    if kind == "bump":
        return bump(*cfg.get("params", (0.5, 0.05, 0.05)))
    if kind == "riesz_fragment":
        return riesz_fragment(*cfg["params"])
    if kind == "tabulated":
        return tabulated_multiplier(cfg["table_x"], cfg["table_v"])
    if kind == "zero":
        return ZERO
    raise ConfigError(f"unknown multiplier kind {kind!r}")


def sobolev_norm(m: MultiplierSpec, s: float, samples: int = 4096, pad: int = 8,
                 max_doublings: int = 6, rtol: float = 1e-2) -> float:
    """||m||_{W^{s,2}} = (int (1 + tau^2)^s |m^(tau)|^2 dtau)^(1/2), m^ the unitary Fourier transform.

    m is sampled on [0, 2] and zero-padded; the sample count doubles until two
    successive values agree to rtol.
    """
    if not 0 <= s <= 2:
        raise ValueError("s must lie in [0, 2]")
    if pad < 8:
        raise ValueError("zero-padding factor must be >= 8")
    if m.is_zero:
        return 0.0

    def once(N):
        lam = np.arange(N) * (2.0 / N)
        d = 2.0 / N
        vals = m(lam)
        spec = np.fft.rfft(vals, n=pad * N) * d / math.sqrt(2 * math.pi)
        tau = 2 * math.pi * np.fft.rfftfreq(pad * N, d=d)
        dtau = tau[1] - tau[0]
        w = np.full(tau.size, 2.0)
        w[0] = 1.0
        if (pad * N) % 2 == 0:
            w[-1] = 1.0
        return math.sqrt(float(np.sum(w * (1 + tau ** 2) ** s * np.abs(spec) ** 2) * dtau))

    prev = once(samples)
    N = samples
    for _ in range(max_doublings):
        N *= 2
        cur = once(N)
        if abs(cur - prev) <= rtol * max(cur, 1e-300) and abs(cur - prev) <= 1e-6 * cur + rtol * 1e-4 * cur:
            return cur
        prev = cur
    if abs(cur - prev) <= rtol * cur:
        return cur
    raise NotConverged(f"Sobolev norm of order {s} did not settle under refinement")


# -- fiber data --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberConfig:
    n_cap: int = 60
    panel_log_width: float = 0.005
    panel_nodes: int = 8
    x_points_per_wavelength: int = 24
    u_points_per_scale: int = 16
    u_block: int = 256
    max_u_blocks: int = 400
    tail_rtol: float = 1e-4
    eig: sch.EigenSolveConfig = sch.DEFAULT_CONFIG


DEFAULT_FIBER = FiberConfig()


def _energy_exponent(V):
    d = V.homogeneous_degree
    return None if d is None else 4.0 / (d + 2.0)


def _xi_band(m, V, r, fc: FiberConfig):
    """(xi_min, xi_max): xi_max is where E_1(xi^2 V) leaves supp m / r^2; xi_min where the window reaches n_cap."""
    lo, hi = m.support
    e1 = sch.eigenvalue(V, 1, fc.eig)
    ecap = sch.eigenvalue(V, fc.n_cap, fc.eig)
    p = _energy_exponent(V)
    if p is None:
        from .semiclassics import xi as xi_inv
        # E_n(xi^2 V) = target  <=>  xi^2 = Xi_n(target)
        return (math.sqrt(xi_inv(V, fc.n_cap, hi / r ** 2, fc.eig)),
                math.sqrt(xi_inv(V, 1, hi / r ** 2, fc.eig)))
    return (hi / (r * r * ecap)) ** (1 / p), (hi / (r * r * e1)) ** (1 / p)


def _xi_nodes(xi_min, xi_max, fc: FiberConfig):
    """Gauss-Legendre panels in log xi on [xi_min, xi_max]; weights include the Jacobian."""
    a, b = math.log(xi_min), math.log(xi_max)
    P = max(1, int(math.ceil((b - a) / fc.panel_log_width)))
    t, w = np.polynomial.legendre.leggauss(fc.panel_nodes)
    edges = np.linspace(a, b, P + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    lt = (mid + half * t[None, :]).ravel()
    lw = (half * w[None, :]).ravel()
    xi = np.exp(lt)
    return xi, lw * xi


TAPER_CENTER = 4.0
TAPER_WIDTH = 0.35


def taper(xi, xi_min):
    """Error-function step in log xi centred at 4 xi_min (about 1e-8 at xi_min).

    Its Fourier transform decays like a Gaussian, unlike a compactly supported
    step of the same width, so the kernel has no slowly decaying u-tail.
    """
    t = np.log(np.asarray(xi, dtype=float) / (TAPER_CENTER * xi_min)) / TAPER_WIDTH
    return 0.5 * erfc(-t)


@dataclass
class _Fiber:
    """Window and eigen-data at one xi node."""

    xi: float
    ns: np.ndarray
    weights: np.ndarray  # m(r^2 E_n(xi^2 V)) * taper


class FiberModel:
    """Eigen-data of the fiber operators -d^2 + xi^2 V for a range of xi."""

    def __init__(self, m: MultiplierSpec, V: pot.PotentialSpec, r: float, fc: FiberConfig = DEFAULT_FIBER):
        if r <= 0:
            raise ValueError("r must be positive")
        pot.require_class(V, "P1")
        self.m, self.V, self.r, self.fc = m, V, r, fc
        self.xi_min, self.xi_max = _xi_band(m, V, r, fc)
        self.xi, self.w = _xi_nodes(self.xi_min, self.xi_max * 1.0000001, fc)
        self.p = _energy_exponent(V)
        self.fibers = [self._window(x) for x in self.xi]

    # energies and eigenfunctions of xi^2 V
    def energy(self, n, xi):
        if self.p is not None:
            return xi ** self.p * sch.eigenvalue(self.V, n, self.fc.eig)
        return sch.eigenvalue(pot.scale(self.V, xi * xi), n, self.fc.eig)

    def psi(self, n, xi, x):
        x = np.asarray(x, dtype=float)
        if self.p is not None:
            s = xi ** (self.p / 2)
            return math.sqrt(s) * sch.eigenfunction(self.V, n, self.fc.eig)(s * x)
        return sch.eigenfunction(pot.scale(self.V, xi * xi), n, self.fc.eig)(x)

    def _window(self, xi):
        lo, hi = self.m.support
        ns, ws = [], []
        tp = float(taper(xi, self.xi_min))
        n = 1
        while True:
            e = self.r ** 2 * self.energy(n, xi)
            if e > hi:
                break
            if e >= lo:
                ns.append(n)
                ws.append(float(self.m(e)) * tp)
            n += 1
            if n > self.fc.n_cap + 1:
                raise WindowOverflow(f"xi={xi:.4g} needs n > n_cap={self.fc.n_cap}")
        return _Fiber(xi, np.array(ns, dtype=int), np.array(ws))

    def x_extent(self) -> float:
        """Half-width of the x-region outside which every contributing psi_n is negligible."""
        ext = 0.0
        for f in (self.fibers[0], self.fibers[-1]):
            for n in f.ns[-1:]:
                if self.p is not None:
                    s = f.xi ** (self.p / 2)
                    p = sch.eigenfunction(self.V, int(n), self.fc.eig)
                    reach = _reach(p) / s
                else:
                    reach = _reach(sch.eigenfunction(pot.scale(self.V, f.xi ** 2), int(n), self.fc.eig))
                ext = max(ext, reach)
        return ext if ext > 0 else 4 * self.r

    def x_grid(self, x_prime: float) -> np.ndarray:
        X = max(self.x_extent(), abs(x_prime) + 4 * self.r)
        k = math.sqrt(self.m.support[1]) / self.r
        dx = 2 * math.pi / (k * self.fc.x_points_per_wavelength)
        N = int(math.ceil(2 * X / dx)) + 1
        return np.linspace(-X, X, N)

    def fiber_matrix(self, x: np.ndarray, x_prime: float) -> np.ndarray:
        """F(x_i, x', xi_k) for all grid points and xi nodes."""
        F = np.zeros((x.size, self.xi.size))
        by_n: dict[int, list[int]] = {}
        for k, f in enumerate(self.fibers):
            for n in f.ns:
                by_n.setdefault(int(n), []).append(k)
        for n, ks in by_n.items():
            ks = np.array(ks)
            if self.p is not None:
                s = self.xi[ks] ** (self.p / 2)
                p = sch.eigenfunction(self.V, n, self.fc.eig)
                vals = p((s[None, :] * x[:, None]).ravel()).reshape(x.size, ks.size)
                vp = p(s * x_prime)
                vals = vals * (s * vp)[None, :]
            else:
                vals = np.stack([self.psi(n, self.xi[k], x) * self.psi(n, self.xi[k], x_prime)[0] for k in ks], axis=1)
            wts = np.array([self.fibers[k].weights[np.flatnonzero(self.fibers[k].ns == n)[0]] for k in ks])
            F[:, ks] += vals * wts[None, :]
        return F

    def projector_density(self, x_prime: float) -> np.ndarray:
        """sum_n weight_n^2 psi_n(x'; xi^2 V)^2 at every xi node."""
        out = np.zeros(self.xi.size)
        for k, f in enumerate(self.fibers):
            for n, w in zip(f.ns, f.weights):
                out[k] += w * w * float(self.psi(int(n), f.xi, x_prime)[0]) ** 2
        return out


def _reach(p: sch.EigenPair) -> float:
    """Largest |x| where |psi| exceeds 1e-12 of its maximum."""
    big = np.flatnonzero(np.abs(p.psi) > 1e-12 * p.max_abs)
    return float(max(abs(p.grid[big[0]]), abs(p.grid[big[-1]])))


# -- kernel slices and the weighted Plancherel quantity ------------------------------------------------

@dataclass
class KernelSlice:
    r: float
    x: np.ndarray
    x_prime: float
    u: np.ndarray
    K: np.ndarray  # shape (x.size, u.size)
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        rows = [{"x": float(xi), "u": float(uj), "K": float(self.K[i, j])}
                for i, xi in enumerate(self.x) for j, uj in enumerate(self.u)]
        write_csv(path, ["x", "u", "K"], rows)

    def to_binary(self, path) -> None:
        """Dimensions header (two little-endian uint64) then row-major float64 data."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<QQ", *self.K.shape))
            fh.write(np.ascontiguousarray(self.K, dtype="<f8").tobytes())


def read_binary_grid(path) -> np.ndarray:
    data = Path(path).read_bytes()
    rows, cols = struct.unpack_from("<QQ", data, 0)
    return np.frombuffer(data, dtype="<f8", count=rows * cols, offset=16).reshape(rows, cols).copy()


def _u_step(model: FiberModel, fc: FiberConfig) -> float:
    return min(2 * math.pi * model.r, 2 * math.pi / model.xi_max) / fc.u_points_per_scale


def kernel_slice(m: MultiplierSpec, V: pot.PotentialSpec, r: float, x_prime: float,
                 x=None, u=None, fc: FiberConfig = DEFAULT_FIBER) -> KernelSlice:
    """K(x, x', u) on an x-grid and u-grid (defaults: the quadrature x-grid and |u| <= 8 r max(r, |x'|))."""
    if m.is_zero:
        xs = np.zeros(1) if x is None else np.asarray(x, dtype=float)
        us = np.zeros(1) if u is None else np.asarray(u, dtype=float)
        return KernelSlice(r, xs, x_prime, us, np.zeros((xs.size, us.size)))
    model = FiberModel(m, V, r, fc)
    xs = model.x_grid(x_prime) if x is None else np.asarray(x, dtype=float)
    if u is None:
        du = _u_step(model, fc)
        U = 8 * r * max(r, abs(x_prime))
        us = np.arange(-U, U + du / 2, du)
    else:
        us = np.asarray(u, dtype=float)
    F = model.fiber_matrix(xs, x_prime) * model.w[None, :]
    K = (F @ np.cos(np.outer(model.xi, us))) / math.pi
    diag = {"xi_min": model.xi_min, "xi_max": model.xi_max, "xi_nodes": int(model.xi.size),
            "n_max": int(max((f.ns.max() for f in model.fibers if f.ns.size), default=0))}
    return KernelSlice(r, xs, x_prime, us, K, diag)


def kernel_integrals(m: MultiplierSpec, V: pot.PotentialSpec, r: float, x_prime: float, varthetas,
                     fc: FiberConfig = DEFAULT_FIBER) -> dict:
    """int int |u|^(2 vartheta) |K(x, x', u)|^2 du dx for several vartheta at once.

    K is even in u; blocks of u >= 0 are accumulated until two successive blocks
    each add less than tail_rtol of the running total for every vartheta.
    """
    varthetas = list(varthetas)
    if m.is_zero:
        return {"values": {v: 0.0 for v in varthetas}, "u_max": 0.0, "blocks": 0}
    model = FiberModel(m, V, r, fc)
    x = model.x_grid(x_prime)
    dx = x[1] - x[0]
    F = model.fiber_matrix(x, x_prime) * model.w[None, :] / math.pi
    du = _u_step(model, fc)
    # |K|^2 is band-limited to 2 xi_max, so past the first few blocks a coarser step suffices
    du_tail = max(du, math.pi / (4 * model.xi_max))
    # the discrete xi-sum is periodic in u with period 2 pi / (largest node spacing)
    u_alias = 2 * math.pi / float(np.max(np.diff(model.xi)))
    exps = np.array([2 * v for v in varthetas])[:, None]
    acc = np.zeros(len(varthetas))
    comp = np.zeros(len(varthetas))  # Kahan compensation
    u0, quiet = 0.0, 0
    for b in range(fc.max_u_blocks):
        step = du if b < 4 else du_tail
        u = u0 + np.arange(fc.u_block + 1) * step
        if u[-1] > 0.5 * u_alias:
            break
        K = F @ np.cos(np.outer(model.xi, u))
        col = np.sum(K * K, axis=0) * dx
        wu = np.full(u.size, 2.0 * step)  # factor 2: K is even in u
        wu[0] = wu[-1] = step
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = np.where(u[None, :] > 0, u[None, :] ** exps, np.where(exps == 0, 1.0, 0.0))
        block = weights @ (col * wu)
        y = block - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        u0 = u[-1]
        quiet = quiet + 1 if np.all(block <= fc.tail_rtol * acc) else 0
        if b >= 4 and quiet >= 2:
            return {"values": dict(zip(varthetas, acc.tolist())), "u_max": float(u0), "blocks": b + 1,
                    "x_extent": float(x[-1]), "xi_nodes": int(model.xi.size)}
    raise TailNotConverged(f"u-tail still above {fc.tail_rtol} at u = {u0:.4g}")


def _prefactor(V, r, vartheta, x_prime):
    vmax = max(float(pot.evaluate(V, r)), float(pot.evaluate(V, x_prime)))
    return r ** (2 - 2 * vartheta) * vmax ** (0.5 - vartheta)


def weighted_plancherel_lhs(m: MultiplierSpec, V: pot.PotentialSpec, r: float, vartheta: float, x_prime: float,
                            fc: FiberConfig = DEFAULT_FIBER) -> float:
    """r^(2-2 vartheta) max{V(r), V(x')}^(1/2 - vartheta) int int |u|^(2 vartheta) |K|^2 du dx."""
    if not 0 <= vartheta < 0.5:
        raise ValueError("vartheta must lie in [0, 1/2)")
    I = kernel_integrals(m, V, r, x_prime, [vartheta], fc)["values"][vartheta]
    return _prefactor(V, r, vartheta, x_prime) * I


def fiber_plancherel_lhs(m: MultiplierSpec, V: pot.PotentialSpec, r: float, x_prime: float,
                         fc: FiberConfig = DEFAULT_FIBER) -> float:
    """The vartheta = 0 quantity through Plancherel in u and orthonormality in x:
    r^2 max{V(r), V(x')}^(1/2) (1/pi) int sum_n m(r^2 E_n)^2 psi_n(x')^2 dxi."""
    if m.is_zero:
        return 0.0
    model = FiberModel(m, V, r, fc)
    return _prefactor(V, r, 0.0, x_prime) * float(np.dot(model.w, model.projector_density(x_prime))) / math.pi


SWEEP_COLUMNS = ["r", "x_prime", "vartheta", "lhs", "sobolev_sq", "ratio"]


def plancherel_sweep(m: MultiplierSpec, V: pot.PotentialSpec, varthetas, r_set, x_prime_set, path=None,
                     fc: FiberConfig = DEFAULT_FIBER) -> dict:
    """Table of lhs / ||m||^2_{W^{vartheta,2}} with max/median uniformity per vartheta."""
    varthetas = list(varthetas)
    sob = {v: sobolev_norm(m, v) ** 2 for v in varthetas}
    rows = []
    for r in r_set:
        for xp in x_prime_set:
            vals = kernel_integrals(m, V, r, xp, varthetas, fc)["values"]
            for v in varthetas:
                lhs = _prefactor(V, r, v, xp) * vals[v]
                ratio = lhs / sob[v] if sob[v] > 0 else 0.0
                rows.append({"r": r, "x_prime": xp, "vartheta": v, "lhs": lhs, "sobolev_sq": sob[v], "ratio": ratio})
    uniformity = {}
    for v in varthetas:
        rs = np.array([row["ratio"] for row in rows if row["vartheta"] == v])
        med = float(np.median(rs))
        uniformity[v] = float(rs.max() / med) if med > 0 else 0.0
    if path is not None:
        write_csv(path, SWEEP_COLUMNS, rows)
    return {"rows": rows, "uniformity": uniformity,
            "finite": bool(all(math.isfinite(r_["ratio"]) for r_ in rows))}
