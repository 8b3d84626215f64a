"""Iteration table for the 2D polar family: p=2, n=2, L=0..4 with CG, PCG-GS and PCG-J."""
import argparse
import logging
from pathlib import Path

from subspline.bench import ExperimentConfig, run_experiment, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--max-level", type=int, default=4)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--out", default="results/aniso_polar2d.dat")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig(case="aniso_polar2d", degree=args.degree,
                           levels=list(range(args.max_level + 1)), n=[args.n],
                           solvers=["CG", "PCG-GS", "PCG-J"])
    rows = run_experiment(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_table(rows, "dat", out, cfg)
    print(out.read_text())


if __name__ == "__main__":
    main()
