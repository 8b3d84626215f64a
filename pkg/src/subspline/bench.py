"""Benchmark sweeps: build a family of configurations, solve, and write tables.

A table has one row per sweep value (the level ``L``, or the refinement
depth ``n`` for the diagonal families) and, for every solver, the iteration
count and the final residual. Output is either a whitespace ``.dat`` file
with ``# key=value`` headers or a ``.csv`` file with a header row.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import cases
from .assembly import SOURCE_PARTS
from .extended_system import build_extended_system
from .krylov import StoppingRule, pcg
from .subspace_precond import preconditioner_from_name

log = logging.getLogger(__name__)

# table column name -> preconditioner config name
SOLVERS = {"CG": "none", "PCG-GS": "gauss_seidel", "PCG-J": "jacobi"}
L_CASES = ("aniso_polar2d", "aniso_identity2d", "aniso_polar3d")
N_CASES = ("diagonal_overlap1", "diagonal_overlap_p1")


@dataclass
class ExperimentConfig:
    """One benchmark sweep. Exactly one of ``levels``/``n`` may hold several values."""

    case: str = "aniso_polar2d"
    degree: int = 2
    levels: tuple = (0, 1, 2, 3, 4)
    n: tuple = (2,)
    solvers: tuple = ("CG", "PCG-GS")
    tol: float = 1e-11
    max_iters: int = 1000
    seed: int = 0
    trim_mode: str = "value_zero"
    quad_points: int | None = None

    def __post_init__(self):
        self.levels = tuple(int(v) for v in _as_tuple(self.levels))
        self.n = tuple(int(v) for v in _as_tuple(self.n))
        self.solvers = tuple(_as_tuple(self.solvers))
        if self.case not in cases.CASES:
            raise ValueError("unknown case %r; choose from %s" % (self.case, ", ".join(cases.CASES)))
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if not self.n or min(self.n) < 0:
            raise ValueError("n values must be >= 0")
        if self.case in L_CASES:
            if not self.levels or min(self.levels) < 0:
                raise ValueError("levels must be >= 0")
            if len(self.levels) > 1 and len(self.n) > 1:
                raise ValueError("sweep over either levels or n, not both")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad or not self.solvers:
            raise ValueError("solvers must be a nonempty subset of %s" % sorted(SOLVERS))
        StoppingRule(self.tol, self.max_iters)

    @property
    def sweep_variable(self) -> str:
        if self.case in N_CASES or len(self.n) > 1:
            return "n"
        return "h^-1" if self.case == "aniso_identity2d" else "L"

    def sweep(self):
        """``(sweep value, builder kwargs)`` for each row, in output order."""
        if self.sweep_variable == "n":
            L = self.levels[0] if self.levels else 0
            return [(n, dict(L=L, n=n)) for n in self.n]
        return [(2 ** (L + 2) if self.sweep_variable == "h^-1" else L, dict(L=L, n=self.n[0]))
                for L in self.levels]

    def build(self, L: int, n: int) -> cases.Configuration:
        p, trim = self.degree, self.trim_mode
        if self.case == "aniso_polar2d":
            return cases.build_aniso_polar2d(p, L, n, trim)
        if self.case == "aniso_polar3d":
            return cases.build_aniso_polar3d(p, L, n, trim)
        if self.case == "aniso_identity2d":
            return cases.build_aniso_identity2d(p, 1.0 / 2 ** (L + 2), n, trim)
        overlap = "one" if self.case == "diagonal_overlap1" else "p_plus_1"
        return cases.build_diagonal(p, n, overlap, trim)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("levels", "n", "solvers"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**data)

    @classmethod
    def load(cls, path=None, **overrides) -> "ExperimentConfig":
        """Read a JSON config (optional) and apply non-None overrides."""
        data = {}
        if path is not None:
            with open(path) as fh:
                data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)


def _as_tuple(v):
    if v is None:
        return ()
    if isinstance(v, (str, int, float)):
        return (v,)
    return tuple(v)


@dataclass
class SolverResult:
    iterations: int
    residual: float
    converged: bool


@dataclass
class TableRow:
    sweep: float
    dofs: int
    results: dict = field(default_factory=dict)   # solver name -> SolverResult
    error: str | None = None


def run_row(config: ExperimentConfig, L: int, n: int, sweep_value) -> TableRow:
    cfg = config.build(L, n)
    sys = build_extended_system(cfg.spaces, cfg.geometry, quad_points=config.quad_points,
                                seed=config.seed)
    row = TableRow(sweep_value, sys.size)
    stop = StoppingRule(config.tol, config.max_iters)
    for name in config.solvers:
        prec = preconditioner_from_name(sys, SOLVERS[name])
        rep = pcg(sys.matrix, prec, sys.rhs, stop)
        row.results[name] = SolverResult(rep.iterations, rep.final_residual, rep.converged)
        log.info("%s=%s dofs=%d %s: %d iterations, residual %.2e", config.sweep_variable,
                 sweep_value, sys.size, name, rep.iterations, rep.final_residual)
    return row


def run_experiment(config: ExperimentConfig) -> list[TableRow]:
    """Solve once per (sweep value, solver) from a zero initial guess.

    A failure in one row is recorded in ``TableRow.error`` and the sweep
    continues with the next value.
    """
    rows = []
    for value, kw in config.sweep():
        try:
            rows.append(run_row(config, kw["L"], kw["n"], value))
        except Exception as exc:  # noqa: BLE001 - reported in the table
            log.error("row %s=%s failed: %s", config.sweep_variable, value, exc)
            rows.append(TableRow(value, 0, {}, "%s: %s" % (type(exc).__name__, exc)))
    return rows


# -- output -------------------------------------------------------------------

def _num(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def header_lines(config: ExperimentConfig) -> list[str]:
    lines = ["# %s=%s" % (k, json.dumps(v)) for k, v in config.to_dict().items()]
    lines.append("# source=\"piecewise constant, %d^d cells on the V_0 box, PCG64(seed) uniform [0,1)\""
                 % SOURCE_PARTS)
    lines.append("# residual=\"unpreconditioned Euclidean ||b - A x||\"")
    cols = [config.sweep_variable, "DOFs"]
    for s in config.solvers:
        cols += ["%s_iters" % s, "%s_residual" % s]
    lines.append("# columns: " + " ".join(cols))
    return lines


def format_dat(rows, config: ExperimentConfig) -> str:
    lines = header_lines(config)
    for row in rows:
        if row.error:
            lines.append("# failed %s=%s: %s" % (config.sweep_variable, _num(row.sweep), row.error))
            continue
        parts = [_num(row.sweep), str(row.dofs)]
        for s in config.solvers:
            r = row.results[s]
            parts += [str(r.iterations), "%.2e" % r.residual]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _csv_columns(solvers):
    cols = ["sweep", "dofs"]
    for s in solvers:
        cols += ["%s_iters" % s, "%s_residual" % s, "%s_converged" % s]
    return cols + ["error"]


def format_csv(rows, config: ExperimentConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_csv_columns(config.solvers))
    for row in rows:
        rec = [_num(row.sweep), row.dofs]
        for s in config.solvers:
            r = row.results.get(s)
            rec += ["", "", ""] if r is None else [r.iterations, repr(float(r.residual)),
                                                    int(r.converged)]
        w.writerow(rec + [row.error or ""])
    return buf.getvalue()


def write_table(rows, fmt: str, destination, config: ExperimentConfig) -> None:
    """Write rows as ``dat`` or ``csv`` to a path or an open text stream."""
    if fmt == "dat":
        text = format_dat(rows, config)
    elif fmt == "csv":
        text = format_csv(rows, config)
    else:
        raise ValueError("format must be 'dat' or 'csv'")
    if hasattr(destination, "write"):
        destination.write(text)
        return
    Path(destination).write_text(text)


def read_csv(source) -> list[TableRow]:
    """Parse a table written by :func:`format_csv` back into rows."""
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    reader = csv.reader(text.splitlines())
    head = next(reader)
    solvers = [c[:-len("_iters")] for c in head if c.endswith("_iters")]
    rows = []
    for rec in reader:
        d = dict(zip(head, rec))
        sweep = float(d["sweep"])
        row = TableRow(int(sweep) if sweep.is_integer() else sweep, int(d["dofs"]), {},
                       d["error"] or None)
        for s in solvers:
            if d["%s_iters" % s] == "":
                continue
            row.results[s] = SolverResult(int(d["%s_iters" % s]), float(d["%s_residual" % s]),
                                          bool(int(d["%s_converged" % s])))
        rows.append(row)
    return rows



def residual_ok(row: TableRow, tol: float) -> bool:
    """Every converged solver in the row reports a residual below ``tol``."""
    return all(r.residual < tol for r in row.results.values() if r.converged)
