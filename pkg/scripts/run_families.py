"""Tables for the remaining families: identity square, both diagonal chains, 3D polar."""
import argparse
import logging
from pathlib import Path

from subspline.bench import ExperimentConfig, run_experiment, write_table

SWEEPS = {
    "aniso_identity2d": dict(levels=[0, 1, 2, 3], n=[2]),
    "diagonal_overlap1": dict(n=[0, 1, 2, 3]),
    "diagonal_overlap_p1": dict(n=[0, 1, 2]),
    "aniso_polar3d": dict(levels=[0, 1], n=[1]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--only", choices=sorted(SWEEPS))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for case, sweep in SWEEPS.items():
        if args.only and case != args.only:
            continue
        cfg = ExperimentConfig(case=case, degree=args.degree,
                               solvers=["CG", "PCG-GS", "PCG-J"], **sweep)
        path = outdir / (case + ".dat")
        write_table(run_experiment(cfg), "dat", path, cfg)
        print(path.read_text())


if __name__ == "__main__":
    main()
