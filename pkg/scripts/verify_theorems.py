"""Dense checks on the small verification cases.

For each case: kernel dimension, spectrum identity for PSC and symmetric SSC
(when a global basis is available), CG/MINRES equivalence, and the bound
report for exact and Jacobi local solvers.
"""
import argparse

import numpy as np

from subspline import cases
from subspline.diagnostics import (NotNestedError, build_oracle, cg_equivalence,
                                   minres_equivalence, spectrum_extended, spectrum_original,
                                   verify_bounds)
from subspline.extended_system import build_extended_system, kernel_dimension
from subspline.subspace_precond import make_preconditioner


def run_case(name, cfg):
    s = build_extended_system(cfg.spaces, cfg.geometry)
    nker, dimV = kernel_dimension(s)
    print("== %s: %d unknowns, kernel %d, dim V %d" % (name, s.size, nker, dimV))
    try:
        oracle = build_oracle(s)
    except (NotNestedError, ValueError) as exc:
        print("   no global basis: %s" % exc)
        oracle = None
    if oracle is not None:
        for kind in ("psc", "ssc_symmetric"):
            P = make_preconditioner(s, kind)
            ext, orig = spectrum_extended(s, P), spectrum_original(oracle, P)
            cgq = cg_equivalence(oracle, P)
            mr = minres_equivalence(oracle, P)
            print("   %-13s spectrum gap %.2e  CG rel gap %.2e (%d steps)  MINRES gap %.2e"
                  % (kind, np.max(np.abs(ext - orig)), cgq.max_relative_gap, cgq.steps,
                     mr.max_gap))
    for local in ("exact_cholesky", "jacobi_diagonal"):
        rep = verify_bounds(s, local)
        print("   " + rep.to_text().replace("\n", "\n   "))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--case", choices=sorted(cases.VERIFICATION_CASES))
    args = ap.parse_args()
    for name, make in cases.VERIFICATION_CASES.items():
        if args.case and name != args.case:
            continue
        run_case(name, make())


if __name__ == "__main__":
    main()
