"""Eigenvalues and eigenfunctions of H[V] = -d^2/dx^2 + V on the line.

Shooting with a continued Pruefer angle from both ends of a truncated interval,
matched at the origin.  The Pruefer mismatch is a continuous increasing function
of the trial energy whose value at the n-th eigenvalue is exactly (n - 1) * pi,
which is what certifies the index of every computed level.
"""
from __future__ import annotations

import math
import os
import struct
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import potential as pot
from ._kernels import phase_mismatch, propagate_points, shoot_states
from .errors import BracketFailure, InterlacingViolation, MaxGridExceeded, SolverError

_G1 = 0.5 - math.sqrt(3.0) / 6.0
_G2 = 0.5 + math.sqrt(3.0) / 6.0
_GL4_NODES, _GL4_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class EigenSolveConfig:
    rel_tol_eigenvalue: float = 1e-10
    truncation_factor: float = 25.0
    points_per_wavelength: int = 128
    transition_refinement: int = 128
    min_nodes: int = 4000
    max_grid: int = 4_000_000
    # the interval also ends once exp(-integral of sqrt(V - E)) drops below exp(-decay_exponent)
    decay_exponent: float = 40.0
    origin_nodes_per_efold: float = 8.0

    def __post_init__(self):
        if not 0 < self.rel_tol_eigenvalue <= 1e-4:
            raise ValueError("rel_tol_eigenvalue must lie in (0, 1e-4]")
        if self.truncation_factor < 8:
            raise ValueError("truncation_factor must be >= 8")
        if self.points_per_wavelength < 8:
            raise ValueError("points_per_wavelength must be >= 8")

    @property
    def key(self) -> str:
        return (f"{self.rel_tol_eigenvalue:.3e}-{self.truncation_factor:g}-{self.points_per_wavelength}-"
                f"{self.transition_refinement}-{self.min_nodes}-{self.decay_exponent:g}-{self.origin_nodes_per_efold:g}")


DEFAULT_CONFIG = EigenSolveConfig()


# -- grids ---------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    x: np.ndarray
    origin: int  # index of the node at x = 0
    e_ref: float

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.x)


def _half_nodes(V, side, xt, e_ref, width, cfg, floor_density):
    x_trunc = pot.half_inverse(V, cfg.truncation_factor * e_ref, side)
    s = np.linspace(xt, x_trunc, 4001)
    q = np.sqrt(np.maximum(pot.evaluate(V, side * s) - e_ref, 0.0))
    decay = np.concatenate([[0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * np.diff(s))])
    end = x_trunc if decay[-1] <= cfg.decay_exponent else float(np.interp(cfg.decay_exponent, decay, s))
    eps = 1e-12 * xt
    aux = np.union1d(np.linspace(0.0, end, 20001), np.geomspace(eps, end, 600))
    v = pot.evaluate(V, side * aux)
    rho = cfg.points_per_wavelength * np.sqrt(np.maximum(v, e_ref)) / (2 * math.pi)
    rho = rho + np.where(np.abs(aux - xt) < width, cfg.transition_refinement / (2 * width), 0.0)
    rho = rho + cfg.origin_nodes_per_efold / (aux + eps) + floor_density
    count = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(aux))])
    k = max(int(math.ceil(count[-1])), 8)
    nodes = np.interp(np.linspace(0.0, count[-1], k + 1), count, aux)
    nodes[0], nodes[-1] = 0.0, end
    return nodes


def build_grid(V: pot.PotentialSpec, e_ref: float, n: int = 1, cfg: EigenSolveConfig = DEFAULT_CONFIG) -> Grid:
    """Solver grid adequate for every energy up to e_ref."""
    xm, xp = pot.transition_points(V, e_ref)
    width = max(n, 1) ** (-2.0 / 3.0) * (xm + xp)
    floor_density = cfg.min_nodes / (4.0 * (xm + xp))
    right = _half_nodes(V, 1, xp, e_ref, width, cfg, floor_density)
    left = _half_nodes(V, -1, xm, e_ref, width, cfg, floor_density)
    x = np.concatenate([-left[::-1], right[1:]])
    if x.size > cfg.max_grid:
        raise MaxGridExceeded(f"grid needs {x.size} nodes > max_grid={cfg.max_grid}")
    return Grid(x=x, origin=left.size - 1, e_ref=e_ref)


@lru_cache(maxsize=512)
def _gauss_values(V: pot.PotentialSpec, grid_id: int, xs_bytes: bytes):
    x = np.frombuffer(xs_bytes)
    h = np.diff(x)
    return h, pot.evaluate(V, x[:-1] + _G1 * h), pot.evaluate(V, x[:-1] + _G2 * h)


def _cell_data(V, grid: Grid):
    return _gauss_values(V, id(grid), grid.x.tobytes())


# -- counting and eigenvalues ----------------------------------------------------

def _mismatch(V, grid, energy):
    h, v1, v2 = _cell_data(V, grid)
    return phase_mismatch(h, v1, v2, energy, grid.origin, math.sqrt(grid.e_ref))


def _count_below(V, grid, energy) -> int:
    """Number of eigenvalues strictly below energy on this grid."""
    return int(math.floor(_mismatch(V, grid, energy) / math.pi + 1e-12)) + 1


def rough_phase(V: pot.PotentialSpec, E: float, samples: int = 400) -> float:
    """Cheap trapezoid estimate of the integral of (E - V)_+^(1/2); used only for brackets."""
    w = np.linspace(0.0, 1.0, samples)
    total = 0.0
    for side in (1, -1):
        xt = pot.half_inverse(V, E, side)
        xs = xt * (1 - w * w)
        f = np.sqrt(np.maximum(E - pot.evaluate(V, side * xs), 0.0)) * 2 * xt * w
        total += float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(w)))
    return total


def _energy_for_phase(V, target):
    lo, hi = 1e-3, 1.0
    while rough_phase(V, hi) < target:
        hi *= 4.0
    while rough_phase(V, lo) > target:
        lo /= 4.0
    g = lambda le: rough_phase(V, math.exp(le)) - target
    return math.exp(brentq(g, math.log(lo), math.log(hi), xtol=1e-6))


def _bracket(V, n):
    e_lo = _energy_for_phase(V, max(math.pi * (n - 1) * 0.9 - 1.0, 0.05))
    if n == 1:
        e_lo *= 0.25
    e_hi = _energy_for_phase(V, math.pi * n + 2.0)
    return e_lo, e_hi


def _grid_for_level(V, n, cfg, e_hi):
    return build_grid(V, 1.05 * e_hi, n, cfg)


def _solve_eigenvalue(V, n, cfg):
    e_lo, e_hi = _bracket(V, n)
    grid = _grid_for_level(V, n, cfg, e_hi)
    for _ in range(60):
        c_hi = _count_below(V, grid, e_hi)
        if c_hi >= n:
            break
        e_hi *= 1.5
        grid = _grid_for_level(V, n, cfg, e_hi)
    else:
        raise BracketFailure(f"could not bracket level {n} from above")
    for _ in range(60):
        if _count_below(V, grid, e_lo) <= n - 1:
            break
        e_lo *= 0.5
    else:
        raise BracketFailure(f"could not bracket level {n} from below")
    target = (n - 1) * math.pi
    f = lambda e: _mismatch(V, grid, e) - target
    f_lo, f_hi = f(e_lo), f(e_hi)
    if not (f_lo < 0 < f_hi):
        raise BracketFailure(f"Pruefer mismatch not monotone on [{e_lo}, {e_hi}] (grid too coarse?)")
    energy = brentq(f, e_lo, e_hi, xtol=1e-15 * e_hi, rtol=1e-15, maxiter=400)
    # certify the index on both sides of the root
    delta = max(cfg.rel_tol_eigenvalue, 1e-12) * energy
    if _count_below(V, grid, energy - delta) != n - 1 or _count_below(V, grid, energy + delta) != n:
        raise BracketFailure(f"index certification failed for level {n}")
    return energy, grid


@lru_cache(maxsize=4096)
def _eigenvalue_cached(V, n, cfg):
    return _solve_eigenvalue(V, n, cfg)


def eigenvalue(V: pot.PotentialSpec, n: int, cfg: EigenSolveConfig = DEFAULT_CONFIG) -> float:
    """E_n(V), n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pot.require_class(V, "P1")
    return _eigenvalue_cached(V, int(n), cfg)[0]


def eigenvalue_on_grid(V: pot.PotentialSpec, n: int, grid: Grid) -> float:
    """E_n on a caller-supplied grid (used where several solves must share one discretization)."""
    target = (n - 1) * math.pi
    f = lambda e: _mismatch(V, grid, e) - target
    lo, hi = 1e-6 * grid.e_ref, grid.e_ref
    if not (f(lo) < 0 < f(hi)):
        raise BracketFailure(f"level {n} is not inside the grid's energy range")
    return brentq(f, lo, hi, xtol=1e-15 * hi, rtol=1e-15, maxiter=400)


def spectrum_count(V: pot.PotentialSpec, Lam: float, cfg: EigenSolveConfig = DEFAULT_CONFIG) -> int:
    """#{n : E_n <= Lam}."""
    if Lam <= 0:
        raise ValueError("Lam must be positive")
    pot.require_class(V, "P1")
    n_est = max(1, int(rough_phase(V, Lam) / math.pi) + 1)
    grid = build_grid(V, 1.05 * Lam, n_est, cfg)
    return _count_below(V, grid, Lam * (1 + 1e-14))


# -- eigenfunctions -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenPair:
    """Normalized eigenfunction samples psi, dpsi on grid; psi_n > 0 on the right tail."""

    n: int
    E: float
    grid: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    V: pot.PotentialSpec = field(repr=False)
    residual: float = float("nan")
    norm_defect: float = float("nan")
    origin: int = 0

    def __repr__(self):
        return (f"EigenPair(n={self.n}, E={self.E:.12g}, nodes={self.grid.size}, "
                f"residual={self.residual:.2e}, norm_defect={self.norm_defect:.2e})")

    def __call__(self, x):
        return evaluate(self, x)[0]

    def derivative(self, x):
        return evaluate(self, x)[1]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.psi)))


def evaluate(p: EigenPair, x) -> tuple[np.ndarray, np.ndarray]:
    """(psi, psi') at arbitrary points; zero outside the truncated domain."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = p.grid
    inside = (x >= g[0]) & (x <= g[-1])
    idx = np.clip(np.searchsorted(g, x, side="right") - 1, 0, g.size - 2)
    s = np.where(inside, x - g[idx], 0.0)
    x0 = g[idx]
    v1 = pot.evaluate(p.V, x0 + _G1 * s) if np.any(s) else np.zeros_like(s)
    v2 = pot.evaluate(p.V, x0 + _G2 * s) if np.any(s) else np.zeros_like(s)
    out, dout = propagate_points(x0, p.psi[idx], p.dpsi[idx], s, v1, v2, p.E)
    return np.where(inside, out, 0.0), np.where(inside, dout, 0.0)


def _gauss_points(nodes: np.ndarray, split: int = 1):
    if split > 1:
        t = np.linspace(0.0, 1.0, split + 1)[:-1]
        h = np.diff(nodes)
        nodes = np.append((nodes[:-1, None] + h[:, None] * t[None, :]).ravel(), nodes[-1])
    h = np.diff(nodes)
    pts = nodes[:-1, None] + 0.5 * h[:, None] * (1.0 + _GL4_NODES[None, :])
    wts = 0.5 * h[:, None] * _GL4_WEIGHTS[None, :]
    return pts.ravel(), wts.ravel()


def integrate(p: EigenPair, fn=None, split: int = 1) -> float:
    """Integral of fn(x, psi, dpsi) (default psi^2) by 4-point Gauss on every grid cell."""
    x, w = _gauss_points(p.grid, split)
    psi, dpsi = evaluate(p, x)
    vals = psi * psi if fn is None else fn(x, psi, dpsi)
    return float(np.dot(w, vals))


def inner_product(p: EigenPair, q: EigenPair) -> float:
    """<psi_p, psi_q> on the common refinement of both grids."""
    if p.V != q.V:
        raise ValueError("inner products are only defined between eigenpairs of the same potential")
    nodes = np.union1d(p.grid, q.grid)
    lo, hi = max(p.grid[0], q.grid[0]), min(p.grid[-1], q.grid[-1])
    nodes = nodes[(nodes >= lo) & (nodes <= hi)]
    x, w = _gauss_points(nodes)
    return float(np.dot(w, evaluate(p, x)[0] * evaluate(q, x)[0]))


def _assemble(V, n, energy, grid: Grid):
    h, v1, v2 = _cell_data(V, grid)
    m = grid.origin
    psi_l, dpsi_l, logs_l, psi_r, dpsi_r, logs_r = shoot_states(h, v1, v2, energy, m)
    ls = np.exp(logs_l[: m + 1] - logs_l[m])
    rs = np.exp(logs_r[m:] - logs_r[m])
    left = np.stack([psi_l[: m + 1] * ls, dpsi_l[: m + 1] * ls])
    right = np.stack([psi_r[m:] * rs, dpsi_r[m:] * rs])
    w = math.sqrt(energy)
    ul = np.array([w * left[0, -1], left[1, -1]])
    ur = np.array([w * right[0, 0], right[1, 0]])
    c = float(np.dot(ul, ur) / np.dot(ur, ur))
    psi = np.concatenate([left[0], c * right[0, 1:]])
    dpsi = np.concatenate([left[1], c * right[1, 1:]])
    return psi, dpsi


def _smooth_at_origin(V: pot.PotentialSpec) -> bool:
    if V.family == "power":
        d = V.params[0]
        return float(d).is_integer() and int(d) % 2 == 0
    if V.family == "two_power":
        return all(float(d).is_integer() and int(d) % 2 == 0 for d in V.params[:2])
    return False


def _residual(p: EigenPair, max_points: int = 4000) -> float:
    """Max of |-psi'' + (V - E) psi| / (E max|psi|) over cell midpoints.

    psi'' is a three-point second difference of the dense solution with a stencil
    well below the local wavelength, kept inside one cell (the
    clustered cells at the origin are too narrow and are skipped) (a stencil of
    solver-grid spacing would measure the difference formula's own truncation
    error instead).  Near a cusp of V at 0 the difference quotient cannot resolve
    the fourth derivative of psi, so a core |x| < x_+/100 is skipped there.
    """
    g = p.grid
    x = 0.5 * (g[1:] + g[:-1])
    h = np.diff(g)
    if x.size > max_points:
        sel = np.linspace(0, x.size - 1, max_points).astype(int)
        x, h = x[sel], h[sel]
    core = 0.0 if _smooth_at_origin(p.V) else 1e-2 * pot.half_inverse(p.V, p.E, 1)
    v = pot.evaluate(p.V, x)
    d = 1e-3 / np.sqrt(np.maximum(p.E, v))
    if core:
        d = np.minimum(d, 5e-3 * np.abs(x))
    keep = (np.abs(x) > core) & (h > 4 * d)
    x, v, d = x[keep], v[keep], d[keep]
    f0 = evaluate(p, x)[0]
    fp = evaluate(p, x + d)[0]
    fm = evaluate(p, x - d)[0]
    lap = (fp - 2 * f0 + fm) / (d * d)
    return float(np.max(np.abs(-lap + (v - p.E) * f0)) / (p.E * p.max_abs))


def _build_pair(V, n, energy, grid: Grid) -> EigenPair:
    psi, dpsi = _assemble(V, n, energy, grid)
    raw = EigenPair(n=n, E=energy, grid=grid.x, psi=psi, dpsi=dpsi, V=V, origin=grid.origin)
    norm = math.sqrt(integrate(raw))
    xp = pot.half_inverse(V, energy, 1)
    sign = 1.0 if evaluate(raw, xp)[0][0] >= 0 else -1.0
    psi, dpsi = sign * psi / norm, sign * dpsi / norm
    pair = EigenPair(n=n, E=energy, grid=grid.x, psi=psi, dpsi=dpsi, V=V, origin=grid.origin)
    defect = abs(integrate(pair, split=2) - 1.0)
    return EigenPair(n=n, E=energy, grid=grid.x, psi=psi, dpsi=dpsi, V=V, origin=grid.origin,
                     residual=_residual(pair), norm_defect=defect)


def _tail_ok(p: EigenPair) -> bool:
    m = p.max_abs
    return abs(p.psi[1]) < 1e-9 * m and abs(p.psi[-2]) < 1e-9 * m


@lru_cache(maxsize=2560)
def _eigenfunction_cached(V, n, cfg):
    cached = _disk_load(V, n, cfg)
    if cached is not None:
        return cached
    energy, grid = _eigenvalue_cached(V, n, cfg)
    pair = _build_pair(V, n, energy, grid)
    c = cfg
    for _ in range(4):
        if _tail_ok(pair):
            break
        c = EigenSolveConfig(**{**c.__dict__, "decay_exponent": 1.5 * c.decay_exponent,
                                "truncation_factor": 2 * c.truncation_factor})
        energy, grid = _solve_eigenvalue(V, n, c)
        pair = _build_pair(V, n, energy, grid)
    else:
        raise SolverError(f"eigenfunction {n} does not decay at the domain ends")
    _disk_store(pair, cfg)
    return pair


def eigenfunction(V: pot.PotentialSpec, n: int, cfg: EigenSolveConfig = DEFAULT_CONFIG) -> EigenPair:
    """Normalized eigenpair (E_n, psi_n) with solver diagnostics."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pot.require_class(V, "P1")
    return _eigenfunction_cached(V, int(n), cfg)


def log_abs_profile(p: EigenPair) -> np.ndarray:
    """log|psi_n| at the grid nodes, free of underflow deep in the forbidden region."""
    h, v1, v2 = _gauss_values(p.V, 0, p.grid.tobytes())
    m = p.origin
    psi_l, dpsi_l, logs_l, psi_r, dpsi_r, logs_r = shoot_states(h, v1, v2, p.E, m)
    w = math.sqrt(p.E)
    ul = np.array([w * psi_l[m], dpsi_l[m]])
    ur = np.array([w * psi_r[m], dpsi_r[m]])
    c = abs(float(np.dot(ul, ur) / np.dot(ur, ur)))
    with np.errstate(divide="ignore"):
        left = np.log(np.abs(psi_l[: m + 1])) + logs_l[: m + 1] - logs_l[m]
        right = np.log(np.abs(psi_r[m:])) + logs_r[m:] - logs_r[m] + math.log(c)
    raw = np.concatenate([left, right[1:]])
    k = int(np.argmax(np.abs(p.psi)))
    return raw + (math.log(abs(p.psi[k])) - raw[k])


# -- zeros, extrema, structural facts --------------------------------------------

def _sign_change_roots(p: EigenPair, values: np.ndarray, which: int) -> list[float]:
    g = p.grid
    allowed = pot.evaluate(p.V, g) < p.E
    cand = np.flatnonzero(allowed[:-1] | allowed[1:])
    if cand.size == 0:
        return []
    lo, hi = cand[0], cand[-1] + 1
    seg = values[lo: hi + 1]
    fn = lambda t: float(evaluate(p, t)[which][0])
    roots = []
    sgn = np.sign(seg)
    i = 0
    while i < seg.size - 1:
        if sgn[i] == 0:
            roots.append(float(g[lo + i]))
            i += 1
            continue
        if sgn[i] * sgn[i + 1] < 0:
            roots.append(brentq(fn, g[lo + i], g[lo + i + 1], xtol=1e-14, rtol=1e-14))
        elif sgn[i + 1] == 0 and i + 2 < seg.size and sgn[i] * sgn[i + 2] < 0:
            roots.append(float(g[lo + i + 1]))
            i += 1
        i += 1
    return roots


def zeros(p: EigenPair) -> np.ndarray:
    """Interior zeros of psi_n (all lie in the classical region)."""
    z = np.array(sorted(_sign_change_roots(p, p.psi, 0)))
    if z.size != p.n - 1:
        raise InterlacingViolation(f"psi_{p.n} has {z.size} zeros, expected {p.n - 1}")
    return z


def critical_points(p: EigenPair) -> np.ndarray:
    """Zeros of psi_n' (local extrema of psi_n)."""
    c = np.array(sorted(_sign_change_roots(p, p.dpsi, 1)))
    if c.size != p.n:
        raise InterlacingViolation(f"psi_{p.n}' has {c.size} zeros, expected {p.n}")
    z = zeros(p)
    if z.size and not np.all((c[:-1] < z) & (z < c[1:])):
        raise InterlacingViolation(f"zeros of psi_{p.n} and psi_{p.n}' do not interlace")
    return c


def local_maxima(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values at strict interior local maxima of a sampled sequence on [0, inf)."""
    keep = x >= 0
    v = values[keep]
    i = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])) + 1
    return v[i]


def extrema_facts(p: EigenPair) -> dict:
    """Ordering of the local maxima of psi^2 and psi'^2 on x >= 0 and tail sign facts."""
    crit = critical_points(p)
    z = zeros(p)
    cp = crit[crit >= 0]
    zp = z[z >= 0]
    a = evaluate(p, cp)[0] ** 2
    b = evaluate(p, zp)[1] ** 2
    g = p.grid
    forbidden = (pot.evaluate(p.V, g) >= p.E) & (g != 0)
    tail = g * p.psi * p.dpsi
    bad = forbidden & (tail >= 0) & (np.abs(p.psi) > 1e-12 * p.max_abs)
    return {
        "psi2_maxima": a.tolist(),
        "dpsi2_maxima": b.tolist(),
        "psi2_maxima_increasing": bool(np.all(np.diff(a) > 0)),
        "dpsi2_maxima_decreasing": bool(np.all(np.diff(b) < 0)),
        "tail_sign_ok": not bool(np.any(bad)),
    }


transition_points = pot.transition_points


def spectrum_csv(V: pot.PotentialSpec, ns, path, cfg: EigenSolveConfig = DEFAULT_CONFIG) -> list[dict]:
    rows = []
    for n in ns:
        p = eigenfunction(V, n, cfg)
        rows.append({"n": n, "E": p.E, "residual": p.residual, "norm_defect": p.norm_defect,
                     "zeros_count": len(zeros(p))})
    if path is not None:
        from .io import write_csv
        write_csv(path, ["n", "E", "residual", "norm_defect", "zeros_count"], rows)
    return rows


# -- binary cache ------------------------------------------------------------------
# layout: for each array, a little-endian uint64 length followed by float64 data.
# arrays: header [n, E, residual, norm_defect, origin], grid, psi, dpsi

def _cache_path(V, n, cfg):
    root = os.environ.get("GRUSHIN_LAB_CACHE")
    if not root:
        return None
    return Path(root) / f"{V.key}-{n}-{_cfg_hash(cfg)}.bin"


def _cfg_hash(cfg: EigenSolveConfig) -> str:
    import hashlib
    return hashlib.sha256(cfg.key.encode()).hexdigest()[:12]


def write_arrays(path, arrays) -> None:
    with open(path, "wb") as fh:
        for a in arrays:
            a = np.ascontiguousarray(a, dtype="<f8")
            fh.write(struct.pack("<Q", a.size))
            fh.write(a.tobytes())


def read_arrays(path) -> list[np.ndarray]:
    data = Path(path).read_bytes()
    out, pos = [], 0
    while pos < len(data):
        (k,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        out.append(np.frombuffer(data, dtype="<f8", count=k, offset=pos).astype(float))
        pos += 8 * k
    return out


def _disk_store(p: EigenPair, cfg) -> None:
    path = _cache_path(p.V, p.n, cfg)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}-{threading.get_ident()}")
    write_arrays(tmp, [np.array([p.n, p.E, p.residual, p.norm_defect, p.origin]), p.grid, p.psi, p.dpsi])
    os.replace(tmp, path)


def _disk_load(V, n, cfg):
    path = _cache_path(V, n, cfg)
    if path is None or not path.exists():
        return None
    try:
        head, grid, psi, dpsi = read_arrays(path)
    except (ValueError, struct.error):
        return None
    return EigenPair(n=int(head[0]), E=float(head[1]), grid=grid, psi=psi, dpsi=dpsi, V=V,
                     residual=float(head[2]), norm_defect=float(head[3]), origin=int(head[4]))
