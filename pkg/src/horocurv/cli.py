"""Command-line entry point: `horocurv verify|audit|sweep`.

Subcommands:

* verify CHECK [CHECK ...] -- run named checks against a space/surface.
* audit [det-audit sqrt-audit] -- the standalone matrix inequalities.
* sweep -- per-direction contact records as CSV/JSON.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 bad
configuration (unparseable spec, unknown check, unwritable output).
Reports are byte-stable across reruns except the runtime_ms field.
The env var CCL_THREADS caps the threads used for per-node surface
evaluation (results are reduced in fixed node order regardless).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

from . import verify_harness as vh
from .errors import HorocurvError
from .hypersurface import Hypersurface, parse_grid, parse_surface
from .model_spaces import parse_space

CHECK_NAMES = ("hessian-oracle", "hessian-bounds", "lipschitz",
               "gauss-consistency", "contact", "jacobian", "total-curvature",
               "willmore", "isoperimetric", "det-audit", "sqrt-audit")
SURFACE_CHECKS = {"gauss-consistency", "contact", "jacobian",
                  "total-curvature", "willmore"}


@dataclass
class SuiteConfig:
    """One verification run: what to check, on what, with what knobs."""

    checks: list
    space: str = ""
    surface: str = ""
    grid: str = ""
    seed: int = 42
    samples: int = 0            # 0 = per-check default
    sweep_count: int = vh.SWEEP_COUNT
    radius: float = 1.0
    dim: int = 0                # 0 = per-audit default
    min_nodes: int = 1000
    tolerances: dict = field(default_factory=dict)
    output: str = ""
    format: str = "json"

    def to_text(self) -> str:
        """Key-value serialization; parse_config_text round-trips it."""
        lines = [f"checks = {' '.join(self.checks)}"]
        for f in fields(self):
            if f.name in ("checks", "tolerances"):
                continue
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        for k in sorted(self.tolerances):
            lines.append(f"tol.{k} = {self.tolerances[k]}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> SuiteConfig:
    """Parse the `key = value` config file format (see SuiteConfig.to_text)."""
    raw: dict = {"tolerances": {}}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise HorocurvError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol."):
            raw["tolerances"][key[4:]] = float(val)
        elif key == "checks":
            raw["checks"] = val.split()
        else:
            raw[key] = val
    cfg = SuiteConfig(checks=raw.pop("checks", []))
    tolerances = raw.pop("tolerances")
    for f in fields(SuiteConfig):
        if f.name in raw:
            v = raw.pop(f.name)
            cfg.__dict__[f.name] = f.type(v) if callable(f.type) else v
    if raw:
        raise HorocurvError(f"unknown config keys: {sorted(raw)}")
    cfg.tolerances = tolerances
    cfg.seed = int(cfg.seed)
    cfg.samples = int(cfg.samples)
    cfg.sweep_count = int(cfg.sweep_count)
    cfg.dim = int(cfg.dim)
    cfg.min_nodes = int(cfg.min_nodes)
    cfg.radius = float(cfg.radius)
    return cfg


def _prefetch_forms(M: Hypersurface):
    """Evaluate per-node fundamental forms, optionally in parallel.

    CCL_THREADS caps the worker count; each node is independent and the
    results land in the surface cache, so later integration (fixed node
    order) is deterministic either way.
    """
    threads = int(os.environ.get("CCL_THREADS", "1") or "1")
    if threads <= 1:
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(M.fundamental_forms, range(M.size)))


def _build_surface(cfg: SuiteConfig):
    space = parse_space(cfg.space)
    o = space.origin()
    profile = parse_surface(cfg.surface or "geodesic-sphere:r=1")
    n = space.total_dim - 1
    counts = parse_grid(cfg.grid, n) if cfg.grid else None
    return space, o, Hypersurface(space, o, profile, counts)


def run_suite(cfg: SuiteConfig):
    """Execute the configured checks in declared order; never aborts early."""
    for name in cfg.checks:
        if name not in CHECK_NAMES:
            raise HorocurvError(f"unknown check {name!r}")
    reports = []
    space = o = M = None
    if any(c in SURFACE_CHECKS for c in cfg.checks):
        space, o, M = _build_surface(cfg)
        if {"total-curvature", "willmore"} & set(cfg.checks):
            _prefetch_forms(M)
    elif cfg.space:
        space = parse_space(cfg.space)
        o = space.origin()
    for name in cfg.checks:
        if name in SURFACE_CHECKS and M is None:
            raise HorocurvError(f"check {name!r} needs --space/--surface")
        if name == "hessian-oracle":
            rep = vh.hessian_oracle_check(space, o, cfg.samples or 50,
                                          cfg.seed)
        elif name == "hessian-bounds":
            rep = vh.hessian_bounds_check(space, o, cfg.samples or 1000,
                                          cfg.seed)
        elif name == "lipschitz":
            rep = vh.lipschitz_check(space, o, cfg.samples or 500,
                                     cfg.radius, cfg.seed)
        elif name == "gauss-consistency":
            rep = vh.gauss_consistency_check(M, o, cfg.min_nodes, cfg.seed)
        elif name == "contact":
            rep = vh.contact_check(M, o, cfg.sweep_count, cfg.seed)
        elif name == "jacobian":
            rep = vh.jacobian_sweep_check(M, o, cfg.sweep_count, cfg.seed)
        elif name == "total-curvature":
            rep = vh.total_curvature_check(M, o, cfg.sweep_count, cfg.seed)
        elif name == "willmore":
            rep = vh.willmore_check(M, o)
        elif name == "isoperimetric":
            space = parse_space(cfg.space)
            r = cfg.radius
            if cfg.surface:
                prof = parse_surface(cfg.surface)
                r = prof.base
            counts = (parse_grid(cfg.grid, space.total_dim - 1)
                      if cfg.grid else None)
            rep = vh.isoperimetric_check(space, space.origin(), r,
                                         grid_counts=counts)
        elif name == "det-audit":
            rep = vh.det_comparison_audit(cfg.dim or 6, cfg.samples or 1000,
                                          cfg.seed)
        elif name == "sqrt-audit":
            rep = vh.sqrt_perturbation_audit(cfg.dim or 8, cfg.samples or 1000,
                                             cfg.seed)
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

_CSV_FIELDS = ["check", "space", "surface", "grid", "kappa", "diameter",
               "lhs", "rhs", "margin", "pass", "tolerances", "seed",
               "runtime_ms"]


def render_reports(reports, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports], indent=2,
                          sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            row = r.to_dict()
            row["tolerances"] = json.dumps(row["tolerances"], sort_keys=True)
            w.writerow(row)
        return buf.getvalue()
    raise HorocurvError(f"unknown report format {fmt!r}")


def emit_report(reports, fmt: str, path: str):
    text = render_reports(reports, fmt)
    if not path or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise HorocurvError(f"cannot write report to {path!r}: {e}") from e


def render_sweep_csv(records) -> str:
    """Per-direction contact records as CSV."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction", "c_v", "tie_tol", "s_residual",
                "eig_min_support", "eig_min_hessian", "GK", "jacobian",
                "stencil_ok"])
    for i, rec in enumerate(records):
        cn = rec.representative
        w.writerow([i, repr(rec.c_v), repr(rec.tie_tol), repr(cn.s_residual),
                    repr(cn.eig_min_support), repr(cn.eig_min_hessian),
                    repr(cn.GK),
                    "" if cn.jacobian is None else repr(cn.jacobian),
                    int(cn.stencil_ok)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--space", default="", help="space spec, e.g. "
                   "hyperbolic:3,kappa=1 or spd:3xeuclidean:2")
    p.add_argument("--surface", default="",
                   help="geodesic-sphere:r=R or "
                        "radial-graph:base=R,mode=M,amp=A")
    p.add_argument("--grid", default="", help="LATxLON (n=2) or K^N (n>=3)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=0,
                   help="sample count for sampled checks (0 = default)")
    p.add_argument("--sweep-count", type=int, default=vh.SWEEP_COUNT)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=0,
                   help="matrix dimension for audits (0 = default)")
    p.add_argument("--min-nodes", type=int, default=1000)
    p.add_argument("--output", default="", help="report path ('-' = stdout)")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--config", default="", help="key = value config file")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="horocurv",
        description="verify total-curvature, Willmore and isoperimetric "
                    "inequalities on nonpositively curved symmetric spaces")
    sub = ap.add_subparsers(dest="command", required=True)
    pv = sub.add_parser("verify", help="run named verification checks")
    pv.add_argument("checks", nargs="+", metavar="CHECK",
                    help=f"one of: {', '.join(CHECK_NAMES)}")
    _add_common(pv)
    pa = sub.add_parser("audit", help="standalone matrix inequality audits")
    pa.add_argument("checks", nargs="*", metavar="AUDIT",
                    default=["det-audit", "sqrt-audit"],
                    help="det-audit and/or sqrt-audit (default: both)")
    _add_common(pa)
    ps = sub.add_parser("sweep", help="per-direction contact records")
    ps.add_argument("--count", type=int, default=vh.SWEEP_COUNT)
    ps.add_argument("--jacobian", action="store_true",
                    help="also measure the Gauss-map Jacobian per direction")
    _add_common(ps)
    return ap


def config_from_args(args) -> SuiteConfig:
    cfg = SuiteConfig(checks=list(getattr(args, "checks", []) or []))
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read())
        if getattr(args, "checks", None):
            cfg.checks = list(args.checks)
    defaults = SuiteConfig(checks=[])
    for name in ("space", "surface", "grid", "seed", "samples",
                 "sweep_count", "radius", "dim", "min_nodes", "output",
                 "format"):
        arg = getattr(args, name)
        if arg != getattr(defaults, name) or not args.config:
            setattr(cfg, name, arg)
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "sweep":
            space = parse_space(args.space)
            o = space.origin()
            profile = parse_surface(args.surface or "geodesic-sphere:r=1")
            counts = (parse_grid(args.grid, space.total_dim - 1)
                      if args.grid else None)
            M = Hypersurface(space, o, profile, counts)
            records = vh.contact_sweep(M, o, args.count, args.seed,
                                       measure_jacobian=args.jacobian)
            text = render_sweep_csv(records)
            if not args.output or args.output == "-":
                sys.stdout.write(text)
            else:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            return 0
        cfg = config_from_args(args)
        if not cfg.checks:
            raise HorocurvError("no checks requested")
        reports = run_suite(cfg)
    except HorocurvError as e:
        print(f"horocurv: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"horocurv: error: {e}", file=sys.stderr)
        return 2
    try:
        emit_report(reports, cfg.format, cfg.output)
    except HorocurvError as e:
        print(f"horocurv: error: {e}", file=sys.stderr)
        return 2
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
