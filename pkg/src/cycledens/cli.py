"""Command-line surface: single evaluations, comparison sweeps, d_TV studies,
bound tables, and grid caching.

CSV schema (fixed column order, 17 significant digits):
    n, r, u, quantity, exact_log, estimate_log, regime, ratio, bound, status
Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import asymptotics, dtv as dtvmod, exactcore, specialfns
from .exactcore import Backend

CSV_COLUMNS = ["n", "r", "u", "quantity", "exact_log", "estimate_log",
               "regime", "ratio", "bound", "status"]

NU_EXACT_CEILING = 10_000_000
KAPPA_EXACT_CEILING = 1_000_000

_GRIDS = {}


@dataclass
class RunConfig:
    command: str
    quantity: str = "nu"
    n_values: list[int] = field(default_factory=list)
    r_values: list[int] = field(default_factory=list)
    backend: Backend = Backend.FLOAT64
    tol: float = 1e-12
    output_format: str = "csv"          # csv | json | pretty
    output_path: str | None = None
    grid_cache_path: str | None = None
    v_max: float = 40.0
    mesh_step: float = specialfns.DEFAULT_MESH_STEP
    jobs: int = 1
    alpha: float | None = None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return f"{x:.17g}"
    return str(x)


def _grids(cfg: RunConfig):
    """Dickman/Buchstab grids, from cache dir when available."""
    cache_dir = cfg.grid_cache_path or os.environ.get("CYCLE_DENSITY_GRID_CACHE")
    key = (cfg.mesh_step, cfg.v_max, cache_dir)
    if key in _GRIDS:
        return _GRIDS[key]
    rho = om = None
    if cache_dir and os.path.isdir(cache_dir):
        for fn, builder in (("dickman", specialfns.build_dickman_grid),
                            ("buchstab", specialfns.build_buchstab_grid)):
            path = os.path.join(cache_dir, specialfns.grid_cache_name(
                specialfns.GridFunction(fn), cfg.mesh_step, cfg.v_max))
            g = None
            if os.path.exists(path):
                try:
                    g = specialfns.load_grid(path)
                except (ValueError, KeyError, json.JSONDecodeError):
                    print(f"warning: rebuilding corrupt grid cache {path}",
                          file=sys.stderr)
            if g is None:
                g = builder(cfg.v_max, cfg.mesh_step)
                specialfns.save_grid(g, path)
            if fn == "dickman":
                rho = g
            else:
                om = g
    if rho is None:
        rho = specialfns.build_dickman_grid(cfg.v_max, cfg.mesh_step)
    if om is None:
        om = specialfns.build_buchstab_grid(cfg.v_max, cfg.mesh_step)
    _GRIDS[key] = (rho, om)
    return rho, om


def _exact_log(quantity: str, n: int, r: int, backend: Backend,
               tol: float) -> float | None:
    if quantity == "nu":
        if n > NU_EXACT_CEILING:
            return None
        if backend is Backend.EXACT_RATIONAL:
            v = exactcore.nu_table(n, r, backend)[n]
            return math.log(float(v)) if v > 0 else -math.inf
        if r <= max(4, int(math.log(n + 1)) + 1) and n > 20000:
            return exactcore.nu_log_values(n, r)[n]
        v = exactcore.nu_table(n, r, backend)[n]
        return math.log(v) if v > 0 else exactcore.nu_log_values(n, r)[n]
    if quantity == "kappa":
        if n > KAPPA_EXACT_CEILING:
            return None
        if r >= n:
            raise ValueError(f"kappa needs r < n, got r={r}, n={n}")
        v = exactcore.kappa_table(n, r, backend, cross_check=False)[n]
        return math.log(float(v))
    if quantity == "dtv":
        res = dtvmod.dtv_exact(n, r, tol, backend)
        return math.log(res.exact) if res.exact > 0 else -math.inf
    raise ValueError(f"unknown quantity {quantity!r}")


def compute_row(cfg: RunConfig, n: int, r: int) -> dict:
    """One sweep row: exact value (if affordable), regime estimate, ratio."""
    row = dict.fromkeys(CSV_COLUMNS)
    row.update(n=n, r=r, u=n / r, quantity=cfg.quantity, status="ok")
    try:
        rho, om = _grids(cfg)
        exact_log = _exact_log(cfg.quantity, n, r, cfg.backend, cfg.tol)
        row["exact_log"] = exact_log
        if cfg.quantity == "dtv":
            h = dtvmod.h_function(n / r, rho, om)
            row["estimate_log"] = math.log(h)
            row["regime"] = "h_limit"
        else:
            est = asymptotics.select_regime(n, r, cfg.quantity, rho, om)
            row["estimate_log"] = est.log_value
            row["regime"] = est.regime.value
        if exact_log is not None and row["estimate_log"] is not None:
            row["ratio"] = math.exp(row["estimate_log"] - exact_log)
        if cfg.quantity == "kappa" and 1 <= r < n / 2:
            alpha = cfg.alpha
            bp = (asymptotics.kappa_explicit_bound(n, r, alpha) if alpha
                  else asymptotics.kappa_explicit_bound_min(n, r))
            row["bound"] = bp.bound
        for key in ("exact_log", "estimate_log", "ratio", "bound"):
            v = row[key]
            if v is not None and isinstance(v, float) and math.isnan(v):
                row["status"] = "nan"
                row[key] = None
    except (ValueError, ArithmeticError, exactcore.CapacityError,
            specialfns.ConvergenceError) as exc:
        row["status"] = f"error: {exc}"
    return row


def _emit(rows: list[dict], cfg: RunConfig) -> int:
    if cfg.output_format == "json":
        text = json.dumps({"schema": CSV_COLUMNS, "rows": rows},
                          indent=2, default=_fmt) + "\n"
    elif cfg.output_format == "pretty":
        widths = {c: max(len(c), max((len(_fmt(r[c])) for r in rows),
                                     default=0)) for c in CSV_COLUMNS}
        lines = ["  ".join(c.ljust(widths[c]) for c in CSV_COLUMNS)]
        for r in rows:
            lines.append("  ".join(_fmt(r[c]).ljust(widths[c])
                                   for c in CSV_COLUMNS))
        text = "\n".join(lines) + "\n"
    else:
        lines = [",".join(CSV_COLUMNS)]
        for r in rows:
            lines.append(",".join(_fmt(r[c]) for c in CSV_COLUMNS))
        text = "\n".join(lines) + "\n"
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.output_path}: {exc}",
                  file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0


def _row_task(args):
    cfg_dict, n, r = args
    cfg = RunConfig(**cfg_dict)
    cfg.backend = Backend(cfg.backend) if isinstance(cfg.backend, str) \
        else cfg.backend
    return compute_row(cfg, n, r)


def cmd_eval(cfg: RunConfig) -> int:
    n, r = cfg.n_values[0], cfg.r_values[0]
    if cfg.quantity == "nu" and cfg.backend is Backend.EXACT_RATIONAL:
        v = exactcore.nu_table(n, r, cfg.backend)[n]
        print(f"nu({n},{r}) = {v} = {float(v):.17g}")
        return 0
    if cfg.quantity == "kappa" and cfg.backend is Backend.EXACT_RATIONAL:
        v = exactcore.kappa_table(n, r, cfg.backend)[n]
        print(f"kappa({n},{r}) = {v} = {float(v):.17g}")
        return 0
    row = compute_row(cfg, n, r)
    if row["status"] != "ok" and row["status"].startswith("error"):
        print(row["status"], file=sys.stderr)
        return 3
    return _emit([row], cfg)


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.n_values or not cfg.r_values:
        print("error: empty sweep range", file=sys.stderr)
        return 1
    pairs = [(n, r) for n in sorted(cfg.n_values)
             for r in sorted(cfg.r_values) if r <= n]
    if not pairs:
        print("error: empty sweep range", file=sys.stderr)
        return 1
    if cfg.jobs > 1:
        cfg_dict = {**cfg.__dict__, "backend": cfg.backend.value}
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_row_task,
                                 [(cfg_dict, n, r) for n, r in pairs]))
    else:
        rows = [compute_row(cfg, n, r) for n, r in pairs]
    code = _emit(rows, cfg)
    if code == 0 and any(str(row["status"]).startswith("error")
                         for row in rows):
        return 3
    return code


def cmd_dtv(cfg: RunConfig) -> int:
    rho, om = _grids(cfg)
    rows = []
    for n in sorted(cfg.n_values):
        for r in sorted(cfg.r_values):
            if r > n:
                continue
            res = dtvmod.dtv_estimate(n, r, rho, om)
            row = dict.fromkeys(CSV_COLUMNS)
            row.update(n=n, r=r, u=n / r, quantity="dtv", status="ok",
                       regime="h_limit",
                       exact_log=math.log(res.exact) if res.exact and
                       res.exact > 0 else None,
                       estimate_log=math.log(res.h_estimate),
                       ratio=res.emrp_ratio)
            rows.append(row)
    if not rows:
        print("error: empty range", file=sys.stderr)
        return 1
    return _emit(rows, cfg)


def cmd_bounds(cfg: RunConfig) -> int:
    rho, _ = _grids(cfg)
    rows = []
    for n in sorted(cfg.n_values):
        for r in sorted(cfg.r_values):
            if not 1 <= r < n:
                continue
            for est in asymptotics.kappa_error_bounds(n, r, rho):
                row = dict.fromkeys(CSV_COLUMNS)
                row.update(n=n, r=r, u=n / r, quantity="kappa_bound",
                           estimate_log=est.log_value, regime=est.regime.value,
                           status="ok" if est.valid else "out_of_range")
                rows.append(row)
    if not rows:
        print("error: empty range", file=sys.stderr)
        return 1
    return _emit(rows, cfg)


def cmd_cache_grids(cfg: RunConfig) -> int:
    cache_dir = (cfg.grid_cache_path
                 or os.environ.get("CYCLE_DENSITY_GRID_CACHE") or ".")
    os.makedirs(cache_dir, exist_ok=True)
    for fn, builder in ((specialfns.GridFunction.DICKMAN,
                         specialfns.build_dickman_grid),
                        (specialfns.GridFunction.BUCHSTAB,
                         specialfns.build_buchstab_grid)):
        grid = builder(cfg.v_max, cfg.mesh_step)
        path = os.path.join(cache_dir, specialfns.grid_cache_name(
            fn, cfg.mesh_step, cfg.v_max))
        try:
            specialfns.save_grid(grid, path)
        except OSError as exc:
            print(f"error: cannot write {path}: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {path} ({len(grid.knots)} knots)")
    return 0


def _parse_range(spec: str) -> list[int]:
    """'10', '10,20,40', or '10:100:10' (start:stop:step, inclusive)."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",")]


def _load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cycledens",
        description="Exact and asymptotic densities of permutations with "
                    "constrained cycle lengths, and the Poisson total "
                    "variation distance.")
    p.add_argument("--config", help="key=value config file (flags win)")
    sub = p.add_subparsers(dest="command", required=True)

    # defaults stay None here so a config file can fill anything a flag
    # does not explicitly set; real defaults are applied in main()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=["float", "rational"])
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=["csv", "json", "pretty"])
    common.add_argument("--output", help="output path (default stdout)")
    common.add_argument("--grid-cache", help="grid cache directory")
    common.add_argument("--v-max", type=float)
    common.add_argument("--mesh-step", type=float)
    common.add_argument("--jobs", type=int)

    pe = sub.add_parser("eval", parents=[common],
                        help="evaluate one (n, r) point")
    pe.add_argument("--quantity", choices=["nu", "kappa", "dtv"], required=True)
    pe.add_argument("--n", type=int, required=True)
    pe.add_argument("--r", type=int, required=True)

    ps = sub.add_parser("sweep", parents=[common],
                        help="exact-vs-asymptotic comparison sweep")
    ps.add_argument("--quantity", choices=["nu", "kappa"], required=True)
    ps.add_argument("--n", required=True, help="range: a,b,c or start:stop:step")
    ps.add_argument("--r", required=True, help="range: a,b,c or start:stop:step")
    ps.add_argument("--alpha", type=float)

    pd = sub.add_parser("dtv", parents=[common], help="d_TV study")
    pd.add_argument("--n", required=True)
    pd.add_argument("--r", required=True)

    pb = sub.add_parser("bounds", parents=[common],
                        help="kappa error-bound envelopes")
    pb.add_argument("--n", required=True)
    pb.add_argument("--r", required=True)

    sub.add_parser("cache-grids", parents=[common],
                   help="build and serialize Dickman/Buchstab grids")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    defaults = {}
    if args.config:
        try:
            defaults = _load_config_file(args.config)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2

    def opt(name, cast=str, flag_val=None, default=None):
        if flag_val is not None:
            return flag_val
        if name in defaults:
            return cast(defaults[name])
        return default

    cfg = RunConfig(
        command=args.command,
        backend=Backend.EXACT_RATIONAL
        if opt("backend", str, getattr(args, "backend", None),
               "float") == "rational"
        else Backend.FLOAT64,
        tol=opt("tol", float, getattr(args, "tol", None), 1e-12),
        output_format=opt("format", str, getattr(args, "format", None), "csv"),
        output_path=opt("output", str, getattr(args, "output", None)),
        grid_cache_path=opt("grid_cache", str,
                            getattr(args, "grid_cache", None)),
        v_max=opt("v_max", float, getattr(args, "v_max", None), 40.0),
        mesh_step=opt("mesh_step", float, getattr(args, "mesh_step", None),
                      specialfns.DEFAULT_MESH_STEP),
        jobs=opt("jobs", int, getattr(args, "jobs", None), 1),
        alpha=getattr(args, "alpha", None),
    )
    if not 0.0 < cfg.tol <= 1e-6:
        print(f"error: tol must be in (0, 1e-6], got {cfg.tol}",
              file=sys.stderr)
        return 1

    try:
        if args.command == "eval":
            cfg.quantity = args.quantity
            cfg.n_values = [args.n]
            cfg.r_values = [args.r]
            return cmd_eval(cfg)
        if args.command == "sweep":
            cfg.quantity = args.quantity
            cfg.n_values = _parse_range(args.n)
            cfg.r_values = _parse_range(args.r)
            return cmd_sweep(cfg)
        if args.command == "dtv":
            cfg.quantity = "dtv"
            cfg.n_values = _parse_range(args.n)
            cfg.r_values = _parse_range(args.r)
            return cmd_dtv(cfg)
        if args.command == "bounds":
            cfg.quantity = "kappa"
            cfg.n_values = _parse_range(args.n)
            cfg.r_values = _parse_range(args.r)
            return cmd_bounds(cfg)
        if args.command == "cache-grids":
            return cmd_cache_grids(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, specialfns.ConvergenceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 1


if __name__ == "__main__":
    sys.exit(main())
