"""``grushin-lab`` command-line frontend.

Every run writes its CSV/JSON artifacts into ``--out`` together with a
``manifest.json`` (config hash, library versions, wall time).  Exit codes:
0 ok, 2 inequality check failed, 1 solver error, 64 bad config, 74 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import grushin as gr
from . import potential as pot
from . import schrodinger as sch
from . import semiclassics as sc
from . import verify as vf
from .errors import (
    ConfigError,
    GridTooCoarse,
    GrushinLabError,
    MissingCertificate,
    NotCertified,
    PreconditionViolated,
    SolverError,
)
from .io import write_csv, write_json

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INEQUALITY = 2
EXIT_CONFIG = 64
EXIT_IO = 74

COMMANDS = ("certify", "spectrum", "bs", "bounds", "projector", "plancherel")
CHECKS = ("pointwise", "envelopes", "sonin", "decay")


class InequalityFailure(GrushinLabError):
    pass


class IoError(GrushinLabError, OSError):
    pass


@dataclass
class RunConfig:
    command: str
    potential_path: str | None = None
    cls: str = "P1"
    n_min: int = 1
    n_max: int = 10
    alpha: float = 0.5
    check: str = "pointwise"
    variant: str = "C3"
    eps: float = 0.1
    delta: float = 1.0
    lambdas: list = field(default_factory=lambda: [10.0, 100.0, 1000.0])
    A: list = field(default_factory=lambda: [1.0])
    varthetas: list = field(default_factory=lambda: [0.0, 0.25])
    r: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    x_prime: list = field(default_factory=lambda: [0.0, 1.0, 4.0])
    multiplier_path: str | None = None
    rel_tol: float = sch.DEFAULT_CONFIG.rel_tol_eigenvalue
    tol: float = 1e-8
    out: str = "."
    threads: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command != "plancherel" and not self.potential_path:
            raise ConfigError("--potential is required")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ConfigError("need 1 <= n_min <= n_max")
        if self.cls not in pot.CLASSES:
            raise ConfigError(f"unknown class {self.cls!r}")
        if self.check not in CHECKS:
            raise ConfigError(f"unknown check {self.check!r}")
        if self.variant not in ("C3", "power"):
            raise ConfigError("variant must be C3 or power")
        if not 0 < self.alpha <= 0.5:
            raise ConfigError("alpha must lie in (0, 1/2]")
        if any(not 0 <= v < 0.5 for v in self.varthetas):
            raise ConfigError("vartheta must lie in [0, 1/2)")
        if any(v <= 0 for v in list(self.lambdas) + list(self.A) + list(self.r)):
            raise ConfigError("lambda, A and r must be positive")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def hashable(self) -> dict:
        """Everything that affects results; out and threads do not."""
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        return d

    @property
    def worker_count(self) -> int:
        return self.threads or os.cpu_count() or 1


def config_hash(cfg: RunConfig) -> str:
    extra = {}
    for key in ("potential_path", "multiplier_path"):
        path = getattr(cfg, key)
        if path:
            extra[key] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    blob = json.dumps({"config": cfg.hashable(), "inputs": extra}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def versions() -> dict:
    import numba
    import scipy

    from . import __version__
    return {"grushin_lab": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _eig_cfg(cfg: RunConfig) -> sch.EigenSolveConfig:
    if cfg.rel_tol == sch.DEFAULT_CONFIG.rel_tol_eigenvalue:
        return sch.DEFAULT_CONFIG
    return sch.EigenSolveConfig(rel_tol_eigenvalue=cfg.rel_tol)


def _load_potential(cfg: RunConfig) -> pot.PotentialSpec:
    try:
        return pot.load(cfg.potential_path)
    except FileNotFoundError as exc:
        raise IoError(str(exc)) from exc


# -- commands ------------------------------------------------------------------

def cmd_certify(cfg, out):
    V = _load_potential(cfg)
    try:
        cert = pot.certify(V, cfg.cls)
    except GridTooCoarse as exc:
        raise InequalityFailure(str(exc)) from exc
    write_json(out / "certificate.json", cert.to_json())
    print(f"{cert.cls} {cert.verdict} kappa_hat={cert.kappa_hat:.9g}")
    if not cert.passed:
        raise InequalityFailure(f"{V!r} fails {cfg.cls}")
    return ["certificate.json"]


def cmd_spectrum(cfg, out):
    V = _load_potential(cfg)
    ec = _eig_cfg(cfg)

    def row(n):
        p = sch.eigenfunction(V, n, ec)
        return {"n": n, "E": p.E, "residual": p.residual, "norm_defect": p.norm_defect,
                "zeros_count": len(sch.zeros(p))}

    rows = _pmap(row, range(cfg.n_min, cfg.n_max + 1), cfg.worker_count)
    write_csv(out / "spectrum.csv", ["n", "E", "residual", "norm_defect", "zeros_count"], rows)
    for r in rows:
        print(f"{r['n']} {r['E']:.9g}")
    bad = [r["n"] for r in rows if r["zeros_count"] != r["n"] - 1]
    if bad:
        raise InequalityFailure(f"zero count wrong at n={bad}")
    return ["spectrum.csv"]


def cmd_bs(cfg, out):
    V = _load_potential(cfg)
    ec = _eig_cfg(cfg)
    rows = _pmap(lambda n: sc.bs_sweep(V, [n], cfg=ec)[0], range(cfg.n_min, cfg.n_max + 1), cfg.worker_count)
    write_csv(out / "bs.csv", sc.BS_COLUMNS, rows)
    for r in rows:
        print(f"{r['n']} {r['err']:.9g}")
    if not all(math.isfinite(r["ratio"]) for r in rows):
        raise InequalityFailure("non-finite Bohr-Sommerfeld ratio")
    return ["bs.csv"]


def cmd_bounds(cfg, out):
    V = _load_potential(cfg)
    ec = _eig_cfg(cfg)
    ns = list(range(max(cfg.n_min, 2) if cfg.check == "sonin" else cfg.n_min, cfg.n_max + 1))
    if cfg.check == "pointwise":
        vf._require_alpha_class(V, cfg.alpha)
        reps = []
        for which in ("psi", "dpsi"):
            vals = _pmap(lambda n: vf.pointwise_ratio(V, n, cfg.alpha, which, ec), ns, cfg.worker_count)
            rep = vf.BoundReport(f"pointwise_{which}", family=V.family, cls=vf._require_alpha_class(V, cfg.alpha),
                                 alpha=cfg.alpha, params={"potential": V.to_config()})
            for n, (ratio, x) in zip(ns, vals):
                rep.add(n, ratio, x)
            reps.append(rep)
        vf.write_long_csv(out / "bounds.csv", reps)
        write_json(out / "bounds.json", {r.inequality_id: r.to_dict() for r in reps})
        for r in reps:
            print(f"{r.inequality_id} C={r.uniform_constant:.6g} trend={r.trend:.4f}")
        return ["bounds.csv", "bounds.json"]
    if cfg.check == "envelopes":
        rows = _pmap(lambda n: {"n": n, **vf.monotone_envelopes(sch.eigenfunction(V, n, ec), cfg.tol)},
                     ns, cfg.worker_count)
        write_csv(out / "bounds.csv", ["n", "g_violations", "h_violations"], rows)
        bad = sum(r["g_violations"] + r["h_violations"] for r in rows)
    elif cfg.check == "sonin":
        rows = _pmap(lambda n: {"n": n, "violations": vf.sonin_profile(
            V, n, cfg.variant, eps=cfg.eps, alpha=cfg.alpha, delta=cfg.delta, tol=cfg.tol, cfg=ec)[0]},
            ns, cfg.worker_count)
        write_csv(out / "bounds.csv", ["n", "violations"], rows)
        bad = sum(r["violations"] for r in rows)
    else:
        rows = []
        for n in ns:
            c, r2 = vf.exp_decay_fit(V, n, ec)
            rows.append({"n": n, "c_fit": c, "r2": r2})
        write_csv(out / "bounds.csv", ["n", "c_fit", "r2"], rows)
        bad = sum(1 for r in rows if not (math.isfinite(r["c_fit"]) and r["c_fit"] > 0))
    print(f"{cfg.check} violations={bad}")
    if bad:
        raise InequalityFailure(f"{bad} {cfg.check} violations")
    return ["bounds.csv"]


def cmd_projector(cfg, out):
    V = _load_potential(cfg)
    ec = _eig_cfg(cfg)
    rep = vf.projector_report(V, cfg.lambdas, cfg.A, cfg=ec)
    write_csv(out / "projector.csv", ["lambda", "A", "x", "sum", "ratio", "window"], rep["cells"])
    gaps = []
    for lam in cfg.lambdas:
        for A in cfg.A:
            g = vf.gap_log_check(V, lam, A, ec)
            for n, gap, ratio in zip(g.window, g.gaps, g.ratios):
                gaps.append({"lambda": lam, "A": A, "n": n, "gap": gap, "ratio": ratio})
    write_csv(out / "gaps.csv", ["lambda", "A", "n", "gap", "ratio"], gaps)
    print(f"max_ratio={rep['max_ratio']:.6g} trend={rep['trend']:.4f}")
    if not rep["finite"]:
        raise InequalityFailure("non-finite projector ratio")
    return ["projector.csv", "gaps.csv"]


def cmd_plancherel(cfg, out):
    V = _load_potential(cfg) if cfg.potential_path else pot.power(2)
    if cfg.multiplier_path:
        try:
            with open(cfg.multiplier_path, encoding="utf-8") as fh:
                m = gr.multiplier_from_config(json.load(fh))
        except FileNotFoundError as exc:
            raise IoError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        m = gr.bump()
    res = gr.plancherel_sweep(m, V, cfg.varthetas, cfg.r, cfg.x_prime, out / "plancherel.csv")
    for v, u in res["uniformity"].items():
        print(f"vartheta={v:g} max/median={u:.4f}")
    if not res["finite"]:
        raise InequalityFailure("non-finite Plancherel ratio")
    return ["plancherel.csv"]


HANDLERS = {
    "certify": cmd_certify,
    "spectrum": cmd_spectrum,
    "bs": cmd_bs,
    "bounds": cmd_bounds,
    "projector": cmd_projector,
    "plancherel": cmd_plancherel,
}


def run(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    out = Path(cfg.out)
    status, message, files = EXIT_OK, "ok", []
    try:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(str(exc)) from exc
        files = HANDLERS[cfg.command](cfg, out)
    except (InequalityFailure, NotCertified, MissingCertificate, PreconditionViolated) as exc:
        status, message = EXIT_INEQUALITY, str(exc)
    except ConfigError as exc:
        status, message = EXIT_CONFIG, str(exc)
    except (IoError, OSError) as exc:
        status, message = EXIT_IO, str(exc)
    except (SolverError, GrushinLabError) as exc:
        status, message = EXIT_SOLVER, f"{type(exc).__name__}: {exc}"
    if status != EXIT_OK:
        print(f"grushin-lab: {message}", file=sys.stderr)
    if status != EXIT_IO:
        try:
            manifest = {
                "command": cfg.command,
                "config": cfg.hashable(),
                "config_hash": config_hash(cfg),
                "versions": versions(),
                "threads": cfg.worker_count,
                "wall_time_s": time.perf_counter() - t0,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "exit_code": status,
                "message": message,
                "outputs": files,
            }
            write_json(out / "manifest.json", manifest)
        except OSError as exc:
            print(f"grushin-lab: {exc}", file=sys.stderr)
            status = EXIT_IO
    return status


# -- argument parsing ------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grushin-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig; command-line flags override it")
    common.add_argument("--potential", dest="potential_path", help="potential JSON file")
    common.add_argument("--out", help="output directory (default: .)")
    common.add_argument("--threads", type=int, help="worker threads (0 = all cores)")
    common.add_argument("--rel-tol", dest="rel_tol", type=float)

    p = sub.add_parser("certify", parents=[common], help="certify class membership")
    p.add_argument("--class", dest="cls", choices=pot.CLASSES)

    for name, text in (("spectrum", "eigenvalues and eigenfunction diagnostics"),
                       ("bs", "Bohr-Sommerfeld phase errors")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--n-min", dest="n_min", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("bounds", parents=[common], help="eigenfunction inequality checks")
    p.add_argument("--check", choices=CHECKS)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--variant", choices=("C3", "power"))
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("projector", parents=[common], help="spectral projector sums")
    p.add_argument("--lambda", dest="lambdas", type=_floats, help="comma-separated")
    p.add_argument("--A", dest="A", type=_floats, help="comma-separated")

    p = sub.add_parser("plancherel", parents=[common], help="weighted Plancherel sweep")
    p.add_argument("--multiplier", dest="multiplier_path")
    p.add_argument("--vartheta", dest="varthetas", type=_floats)
    p.add_argument("--r", dest="r", type=_floats)
    p.add_argument("--x-prime", dest="x_prime", type=_floats)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except FileNotFoundError as exc:
            raise IoError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{ns.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        base.pop("command", None)
    flags = {k: v for k, v in vars(ns).items() if k not in ("config", "version") and v is not None}
    base.update(flags)
    return RunConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.version:
        from . import __version__
        print(__version__)
        return EXIT_OK
    if not ns.command:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"grushin-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(f"grushin-lab: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
