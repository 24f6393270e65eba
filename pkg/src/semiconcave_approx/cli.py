"""Command-line driver: ``run``, ``table1``, ``check`` and ``pointcheck``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 invariant failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .checks import DEFAULT_SEED, SCOPES, run_checks
from .chebyshev import interpolate_family
from .errors import DegenerateRegionError
from .metrics import (
    METRIC_NAMES,
    RESULTS_HEADER,
    MetricsReport,
    build_grid,
    compute_metrics,
    evaluate_on_grid,
    table1,
)
from .semiconcave import SemiconcaveApprox
from .testbed import (
    H_LSE_LIMIT,
    LSE_LIMIT_GRAD,
    MOREAU_LIMIT_GRAD,
    POINT,
    exact_solution,
    point_check,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3
METHODS = ("moreau", "lse")
TABLE1_DELTAS = (1e-4, 1e-3, 1e-2, 1e-1)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _methods(text: str) -> List[str]:
    out = [t.strip().lower() for t in text.split(",") if t.strip()]
    bad = [t for t in out if t not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"methods must be a subset of {','.join(METHODS)}")
    return out


@dataclass
class ExperimentConfig:
    degrees: List[int] = field(default_factory=lambda: [2, 4, 6, 8, 10])
    epsilons: List[float] = field(default_factory=lambda: [1e-4, 1e-2, 1e-1])
    deltas: List[float] = field(default_factory=lambda: [0.0, 1e-3, 1e-2, 1e-1])
    methods: List[str] = field(default_factory=lambda: list(METHODS))
    grid: int = 1001
    dim: int = 2
    out: Path = Path("out")
    workers: int = 1
    dc_normalized: bool = False

    def validate(self) -> None:
        if not self.degrees or any(m < 1 for m in self.degrees):
            raise UsageError("degrees must be integers >= 1")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise UsageError("epsilons must be positive")
        if not self.deltas or any(d < 0 for d in self.deltas):
            raise UsageError("deltas must be nonnegative")
        if self.grid < 2:
            raise UsageError("grid must be >= 2")
        if self.dim != 2:
            raise UsageError("the interpolation experiment is two-dimensional; use --dim 2")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def _fmt(x: float) -> str:
    return repr(float(x))


def run_experiment(cfg: ExperimentConfig) -> List[MetricsReport]:
    """All reports in (method, m, epsilon, delta) order."""
    exact = exact_solution(cfg.dim)
    grid = build_grid(cfg.grid, exact, cfg.deltas)
    families = {m: interpolate_family(exact.family, m) for m in cfg.degrees}
    tasks = [(meth, m, eps) for meth in cfg.methods for m in cfg.degrees for eps in cfg.epsilons]

    def work(task):
        meth, m, eps = task
        u = SemiconcaveApprox.build(families[m], meth, eps)
        fld = evaluate_on_grid(u, grid)
        return [compute_metrics(u, grid, d, m=m, normalized_dc=cfg.dc_normalized, field=fld)
                for d in cfg.deltas]

    if cfg.workers == 1:
        chunks = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(work, tasks))
    return [r for chunk in chunks for r in chunk]


def write_results(reports: Sequence[MetricsReport], out: Path) -> None:
    _write_csv(out / "results.csv", RESULTS_HEADER, (r.csv_row() for r in reports))
    degrees = sorted({r.m for r in reports})
    series: Dict[str, Dict[int, MetricsReport]] = {}
    for r in reports:
        key = f"{r.method}_eps={_fmt(r.epsilon)}_delta={_fmt(r.delta)}"
        series.setdefault(key, {})[r.m] = r
    for name in METRIC_NAMES:
        rows = [[m] + [_fmt(getattr(s[m], name)) if m in s else "" for s in series.values()]
                for m in degrees]
        _write_csv(out / f"metric_{name}.csv", ["m"] + list(series), rows)


def cmd_run(args) -> int:
    cfg = ExperimentConfig(args.degrees, args.epsilons, args.deltas, args.methods, args.grid,
                           args.dim, Path(args.out), args.workers, args.dc_normalized)
    cfg.validate()
    try:
        _ensure_dir(cfg.out)
    except OSError as exc:
        print(f"error: cannot create {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        reports = run_experiment(cfg)
    except DegenerateRegionError as exc:
        raise UsageError(f"{exc} on a {cfg.grid}-point grid")
    try:
        write_results(reports, cfg.out)
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(reports)} rows to {cfg.out / 'results.csv'}")
    return EXIT_OK


def cmd_table1(args) -> int:
    if args.grid < 2:
        raise UsageError("grid must be >= 2")
    if any(d < 0 for d in args.deltas):
        raise UsageError("deltas must be nonnegative")
    if args.dim < 1:
        raise UsageError("dim must be >= 1")
    fractions = table1(args.grid, args.deltas, exact_solution(args.dim))
    print(f"{'delta':>10}  fraction")
    for d, f in fractions.items():
        print(f"{d:>10g}  {f:.6f}")
    out = Path(args.out)
    try:
        _ensure_dir(out)
        _write_csv(out / "table1.csv", ["delta", "fraction"],
                   ([_fmt(d), _fmt(f)] for d, f in fractions.items()))
    except OSError as exc:
        print(f"error: cannot write table1.csv: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_check(args, smoothers=None) -> int:
    print(f"# check scope={args.scope} seed={args.seed}")
    results = run_checks(args.scope, args.seed, smoothers)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if r.blocking]
    if failed:
        print(f"invariant failure: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_pointcheck(args) -> int:
    if not args.epsilon > 0:
        raise UsageError("epsilon must be positive")
    r = point_check(args.epsilon)
    vec = lambda a: "(" + ", ".join(f"{x:.12g}" for x in a) + ")"
    print(f"x = {POINT}, epsilon = {r.epsilon:g}")
    print(f"v_d(x)              = {r.value:.12g}   dev from exp(-5/4): {abs(r.value - np.exp(-1.25)):.2e}")
    print(f"grad phi_1          = {vec(r.grad_phi1)}")
    print(f"grad phi_2          = {vec(r.grad_phi2)}")
    print(f"Moreau gradient     = {vec(r.moreau_grad)}   dev from {vec(MOREAU_LIMIT_GRAD)}: {r.moreau_grad_dev:.2e}")
    print(f"LSE gradient        = {vec(r.lse_grad)}   dev from {vec(LSE_LIMIT_GRAD)}: {r.lse_grad_dev:.2e}")
    print(f"H(Moreau grad, v_d) = {r.h_moreau:.6e}   dev from 0: {r.h_moreau_dev:.2e}")
    print(f"H(LSE grad, v_d)    = {r.h_lse:.6e}   dev from -exp(-5/2)/2 = {H_LSE_LIMIT:.6e}: {r.h_lse_dev:.2e}")
    print(f"with smoothed values: H_Moreau = {r.h_moreau_smoothed_value:.6e}, H_LSE = {r.h_lse_smoothed_value:.6e}")
    ok = r.moreau_grad_dev <= 1e-8 and r.lse_grad_dev <= 1e-8 and r.h_moreau_dev <= 1e-6 and r.h_lse_dev <= 1e-4
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semiconcave-approx", description="Smoothed-minimum approximation experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="interpolation experiment; writes results.csv and metric_*.csv")
    run.add_argument("--degrees", type=_ints, default=[2, 4, 6, 8, 10])
    run.add_argument("--epsilons", type=_floats, default=[1e-4, 1e-2, 1e-1])
    run.add_argument("--deltas", type=_floats, default=[0.0, 1e-3, 1e-2, 1e-1])
    run.add_argument("--methods", type=_methods, default=list(METHODS))
    run.add_argument("--grid", type=int, default=1001, help="points per axis")
    run.add_argument("--dim", type=int, default=2)
    run.add_argument("--out", default="out")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--dc-normalized", action="store_true",
                     help="divide D_C by the number of points in the region")
    run.set_defaults(func=cmd_run)

    t1 = sub.add_parser("table1", help="fraction of grid points in Omega_delta")
    t1.add_argument("--grid", type=int, default=1001)
    t1.add_argument("--deltas", type=_floats, default=list(TABLE1_DELTAS))
    t1.add_argument("--dim", type=int, default=2)
    t1.add_argument("--out", default="out")
    t1.set_defaults(func=cmd_table1)

    ck = sub.add_parser("check", help="randomized invariant suites")
    ck.add_argument("scope", nargs="?", default="all", choices=SCOPES)
    ck.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ck.set_defaults(func=cmd_check)

    pc = sub.add_parser("pointcheck", help="closed-form values at x = (-1/2, -1/2)")
    pc.add_argument("--epsilon", type=float, default=1e-3)
    pc.set_defaults(func=cmd_pointcheck)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
