"""Command-line front end.

    sparsesqrt sqrt --input A.mtx --method siai_f --report run.json
    sparsesqrt region --alpha 0.5 --out region.csv
    sparsesqrt bench --family tridiag --sizes 500,1000 --methods siai,db --report bench.csv
    sparsesqrt adjacency --input B.mtx --out A.mtx

Exit status: 0 on success, 2 when a solve does not converge (or every bench
row fails), 1 on bad input.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import relative_residual
from .config import DivergenceError, SolverConfig
from .filtering import scaled_adjacency, siai_f
from .iterations import (
    RegionSpec,
    cr_iteration,
    db_iteration,
    in_iteration,
    naive_newton,
    scan_convergence_region,
    siai,
)
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market
from .sparse import SparseMatrix, bandwidth_l, tridiag

log = logging.getLogger("sparsesqrt")

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2
SPARSE_METHODS = {"siai": siai, "siai_f": siai_f}
DENSE_METHODS = {"db": db_iteration, "in": in_iteration, "cr": cr_iteration, "naive": naive_newton}
METHODS = tuple(SPARSE_METHODS) + tuple(DENSE_METHODS)
THREADS_ENV = "SQRT_SIAI_THREADS"


@dataclass
class RunReport:
    matrix_id: str
    n: int
    nnz_in: int
    method: str
    iterations: int
    relative_residual: float
    wall_time_s: float
    nnz_out: int
    converged: bool = True
    bandwidth_trajectory: list = field(default_factory=list)
    error: str = ""

    CSV_FIELDS = (
        "matrix_id", "n", "nnz_in", "method", "iterations", "relative_residual",
        "wall_time_s", "nnz_out", "converged", "error",
    )

    def csv_row(self):
        d = asdict(self)
        return {k: d[k] for k in self.CSV_FIELDS}


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors here, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def solve(a, method, cfg, matrix_id="A"):
    """Run one method on ``a`` and return ``(root, RunReport)``.

    Solver failures (divergence, singular iterates) come back as a
    non-converged report with ``root=None``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    traj = []
    t0 = time.perf_counter()
    try:
        if method in SPARSE_METHODS:
            res = SPARSE_METHODS[method](a, cfg, callback=lambda st: traj.append(bandwidth_l(st.X)))
        else:
            res = DENSE_METHODS[method](a, cfg)
    except (DivergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        wall = time.perf_counter() - t0
        return None, RunReport(matrix_id, a.nrows, a.nnz, method, 0, math.nan, wall, 0,
                               converged=False, error=f"{type(exc).__name__}: {exc}")
    wall = time.perf_counter() - t0
    root = res.root
    if isinstance(root, SparseMatrix):
        er = relative_residual(root, a)
        nnz_out = root.nnz
    else:
        er = relative_residual(root, a.to_dense())
        nnz_out = int(np.count_nonzero(root))
    report = RunReport(matrix_id, a.nrows, a.nnz, method, res.iterations, float(er), wall,
                       nnz_out, bool(res.converged), traj)
    return root, report


def _config(args):
    return SolverConfig(tol=args.tol, error_mode=args.mode, alpha=args.alpha,
                        max_iters=args.max_iters)


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--mode", choices=("abs", "rel"), default="rel")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=200)


def cmd_sqrt(args):
    try:
        cfg = _config(args)
        a = read_matrix_market(args.input)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    if a.nrows != a.ncols:
        log.error("%s: matrix is %dx%d, not square", args.input, a.nrows, a.ncols)
        return EXIT_INPUT
    root, report = solve(a, args.method, cfg, matrix_id=Path(args.input).stem)
    if root is not None and args.output:
        if not isinstance(root, SparseMatrix):
            root = SparseMatrix.from_dense(root)
        write_matrix_market(root, args.output)
    payload = json.dumps(asdict(report), indent=2)
    if args.report:
        Path(args.report).write_text(payload + "\n")
    else:
        print(payload)
    return EXIT_OK if report.converged else EXIT_NOCONV


def cmd_region(args):
    try:
        spec = RegionSpec(args.alpha, args.grid, args.steps, args.conv_tol)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    re, im, flag = scan_convergence_region(spec).points()
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(("re", "im", "converged"))
        for row in zip(re.tolist(), im.tolist(), flag.tolist()):
            w.writerow((repr(row[0]), repr(row[1]), int(row[2])))
    finally:
        if out is not sys.stdout:
            out.close()
    log.info("alpha=%g: %d of %d in-disk points converge", args.alpha, int(flag.sum()), flag.size)
    return EXIT_OK


def _bench_matrices(args):
    if args.input_dir:
        paths = sorted(Path(args.input_dir).glob("*.mtx"))
        if not paths:
            raise ValueError(f"no .mtx files in {args.input_dir}")
        return [(p.stem, read_matrix_market(p)) for p in paths]
    sizes = [int(s) for s in (args.sizes or "").split(",") if s.strip()]
    if not sizes:
        raise ValueError("no sizes given")
    if any(n < 1 for n in sizes):
        raise ValueError("sizes must be positive")
    return [(f"{args.family}_n{n}", tridiag(n, args.lam)) for n in sizes]


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring %s=%r", THREADS_ENV, raw)
        return 1


def cmd_bench(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        log.error("methods must be a non-empty subset of %s; got %s", ",".join(METHODS), args.methods)
        return EXIT_INPUT
    try:
        cfg = _config(args)
        matrices = _bench_matrices(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT

    jobs = [(mid, a, m) for mid, a in matrices for m in methods]
    # pool.map keeps the report in job order whatever finishes first
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(lambda job: solve(job[1], job[2], cfg, job[0])[1], jobs))

    out = open(args.report, "w", newline="") if args.report else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=RunReport.CSV_FIELDS)
        w.writeheader()
        for r in reports:
            w.writerow(r.csv_row())
    finally:
        if out is not sys.stdout:
            out.close()
    for r in reports:
        log.info("%s %-6s it=%3d er=%.2e t=%.3fs", r.matrix_id, r.method, r.iterations,
                 r.relative_residual, r.wall_time_s)
    if all(not r.converged for r in reports):
        return EXIT_NOCONV
    return EXIT_OK


def cmd_adjacency(args):
    try:
        b = read_matrix_market(args.input)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            a = scaled_adjacency(b, args.rho_iters)
        for w in caught:
            log.warning("%s", w.message)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    write_matrix_market(a, args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="sparsesqrt", description="Sparse principal matrix square roots.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sqrt", help="square root of one Matrix Market file")
    s.add_argument("--input", required=True)
    s.add_argument("--output")
    s.add_argument("--method", choices=METHODS, default="siai_f")
    s.add_argument("--report", help="JSON report path (stdout if omitted)")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_sqrt)

    r = sub.add_parser("region", help="scalar convergence region on the unit disk")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--grid", type=int, default=600)
    r.add_argument("--steps", type=int, default=200)
    r.add_argument("--conv-tol", type=float, default=1e-10)
    r.add_argument("--out")
    r.set_defaults(func=cmd_region)

    b = sub.add_parser("bench", help="time methods over a matrix family or directory")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=("tridiag",))
    src.add_argument("--input-dir")
    b.add_argument("--lambda", dest="lam", type=float, default=-1.0)
    b.add_argument("--sizes")
    b.add_argument("--methods", default="siai,db,in")
    b.add_argument("--report", help="CSV path (stdout if omitted)")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)

    j = sub.add_parser("adjacency", help="write I - B/(2 rho(B)) for an adjacency matrix B")
    j.add_argument("--input", required=True)
    j.add_argument("--out", required=True)
    j.add_argument("--rho-iters", type=int, default=100)
    j.set_defaults(func=cmd_adjacency)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
