"""Command line entry point: ``bench``, ``diagnose`` and ``info`` subcommands."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench, cases, diagnostics
from .extended_system import DENSE_LIMIT, build_extended_system, kernel_dimension
from .subspace_precond import LOCAL_KINDS, make_preconditioner


def int_list(text: str) -> list[int]:
    """Parse ``"3"``, ``"0,1,4"`` or an inclusive range ``"0-4"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list %r" % text)
    return out


def solver_list(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in bench.SOLVERS]
    if bad or not names:
        raise argparse.ArgumentTypeError("solvers must be among %s" % ", ".join(bench.SOLVERS))
    return names


def _add_case_options(p, cases_allowed):
    p.add_argument("--case", choices=cases_allowed)
    p.add_argument("--degree", type=int)
    p.add_argument("--levels", type=int_list, help="L values, e.g. 0-4 or 0,2")
    p.add_argument("--n", type=int_list, help="refinement depth(s), e.g. 2 or 1-3")
    p.add_argument("--trim-mode", choices=("value_zero", "smooth"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subspline",
                                 description="Extended-system spline solvers on overlapping patches.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-solve progress")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a benchmark sweep and write a table")
    b.add_argument("--config", help="JSON file with ExperimentConfig fields")
    _add_case_options(b, cases.CASES)
    b.add_argument("--solver", type=solver_list, help="comma list from CG, PCG-GS, PCG-J")
    b.add_argument("--seed", type=int)
    b.add_argument("--tol", type=float)
    b.add_argument("--max-iters", type=int)
    b.add_argument("--quad-points", type=int)
    b.add_argument("--out", default="-", help="output path, '-' for stdout")
    b.add_argument("--format", choices=("dat", "csv"))

    d = sub.add_parser("diagnose", help="bound constants and spectrum checks on a small case")
    _add_case_options(d, tuple(cases.VERIFICATION_CASES) + cases.CASES)
    d.add_argument("--local-kind", choices=LOCAL_KINDS, default="exact_cholesky")
    d.add_argument("--out", default="-")
    d.add_argument("--format", choices=("text", "csv"), default="text")

    i = sub.add_parser("info", help="print patch spaces and DOF counts")
    _add_case_options(i, tuple(cases.VERIFICATION_CASES) + cases.CASES)
    return ap


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _config_from_args(args) -> bench.ExperimentConfig:
    return bench.ExperimentConfig.load(
        args.config, case=args.case, degree=args.degree, levels=args.levels, n=args.n,
        solvers=args.solver, seed=args.seed, tol=args.tol, max_iters=args.max_iters,
        quad_points=args.quad_points, trim_mode=args.trim_mode)


def cmd_bench(args) -> int:
    config = _config_from_args(args)
    fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "dat")
    rows = bench.run_experiment(config)
    out = _open_out(args.out)
    try:
        bench.write_table(rows, fmt, out, config)
    finally:
        if out is not sys.stdout:
            out.close()
    return 1 if any(r.error for r in rows) else 0


def _configurations(args):
    """Configurations selected by the case options, one per sweep value."""
    name = args.case or "nested_patches"
    if name in cases.VERIFICATION_CASES:
        kw = {} if args.degree is None else {"p": args.degree}
        return [cases.VERIFICATION_CASES[name](**kw)]
    config = bench.ExperimentConfig(case=name, degree=args.degree or 2,
                                    levels=args.levels or [0], n=args.n or [1],
                                    trim_mode=args.trim_mode or "value_zero")
    return [config.build(**kw) for _, kw in config.sweep()]


def cmd_info(args) -> int:
    for cfg in _configurations(args):
        print(cfg.summary())
    return 0


def cmd_diagnose(args) -> int:
    out = _open_out(args.out)
    status = 0
    try:
        for cfg in _configurations(args):
            sys_ = build_extended_system(cfg.spaces, cfg.geometry)
            if sys_.size > DENSE_LIMIT:
                print("%s: %d unknowns exceeds the dense limit %d" % (cfg.name, sys_.size,
                                                                       DENSE_LIMIT), file=sys.stderr)
                status = 2
                continue
            report = diagnostics.verify_bounds(sys_, args.local_kind)
            nker, dimV = kernel_dimension(sys_)
            report.info.update(case=cfg.name, kernel_dim=nker, dim_V=dimV)
            try:
                oracle = diagnostics.build_oracle(sys_)
            except (diagnostics.NotNestedError, ValueError) as exc:
                report.info["oracle"] = "unavailable (%s)" % exc
            else:
                for kind in ("psc", "ssc_symmetric"):
                    prec = make_preconditioner(sys_, kind, "exact_cholesky")
                    ext = diagnostics.spectrum_extended(sys_, prec)
                    orig = diagnostics.spectrum_original(oracle, prec)
                    gap = float(np.max(np.abs(ext - orig))) if ext.size == orig.size else np.inf
                    report.info["spectrum_gap_" + kind] = gap
            out.write(report.to_text() if args.format == "text" else report.to_csv())
            if not report.all_ok:
                status = 1
    finally:
        if out is not sys.stdout:
            out.close()
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return {"bench": cmd_bench, "diagnose": cmd_diagnose, "info": cmd_info}[args.command](args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
