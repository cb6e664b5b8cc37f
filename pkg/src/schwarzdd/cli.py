"""Experiment runner: solve single configurations, reproduce the iteration
tables, run the convergence-theory analysis, and check the algebraic
identities — from a JSON config and/or command-line flags.

The mesh convention ties the domain to the subdomain count: Omega =
[0, 0.2N] x [0, 0.2] meshed with (cells*N) x cells cells (default cells=60),
so weak-scaling runs grow the problem proportionally to N and every vertical
strip is a 0.2 x 0.2 square.
"""

import argparse
import csv
import io
import json
import sys as _sys
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analysis as analysis_mod
from . import krylov, preconditioner
from .decomposition import attach_local_systems, build_geometry
from .mesh import build_rect_mesh
from .problem import FORCINGS, SCENARIOS, assemble_global, build_scenario

CASES = [(1.0, 1.0), (1.0, 0.001), (0.001, 1.0), (0.001, 0.001)]


@dataclass
class RunConfig:
    scenario: str = "rotating"
    c0: float = 1.0
    nu: float = 1.0
    N: int = 5
    overlap_layers: int = 2  # total overlap in layers: delta = overlap_layers * h
    prec: str = "soras"
    partition: str = "strips"
    seed: int = 0
    tol: float = 1e-6
    supg_theta: float = 0.0
    forcing: str = "center"
    init: str = "zero"
    cells: int = 60  # cells per 0.2 of length, each direction
    maxit: int = 300
    with_analysis: bool = False
    n_angles: int = 360
    dense_cap: int = 5000

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.forcing not in FORCINGS:
            raise ValueError(f"unknown forcing {self.forcing!r}")
        if self.prec not in ("soras", "oras"):
            raise ValueError("prec must be 'soras' or 'oras'")
        if self.partition not in ("strips", "greedy"):
            raise ValueError("partition must be 'strips' or 'greedy'")
        if self.init not in ("zero", "random"):
            raise ValueError("init must be 'zero' or 'random'")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.overlap_layers < 2 or self.overlap_layers % 2:
            raise ValueError("overlap_layers is the total overlap and must be even, >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.cells < 1:
            raise ValueError("cells must be >= 1")


def config_from_dict(d):
    unknown = set(d) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(**d)


def build_pipeline(cfg):
    """mesh -> problem -> global system -> decomposition (with local systems)."""
    mesh = build_rect_mesh(0.2 * cfg.N, 0.2, cfg.cells * cfg.N, cfg.cells)
    pd = build_scenario(cfg.scenario, cfg.c0, cfg.nu, cfg.forcing, cfg.supg_theta)
    sys_ = assemble_global(mesh, pd)
    dec = build_geometry(mesh, cfg.N, cfg.overlap_layers // 2, cfg.partition, cfg.seed)
    attach_local_systems(dec, pd)
    return mesh, pd, sys_, dec


def initial_guess(cfg, n):
    if cfg.init == "zero":
        return np.zeros(n)
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-1.0, 1.0, n)


def run_scenario(cfg):
    """Full pipeline for one configuration.  Returns a dict with the solve
    report and, when requested and the size permits, the analysis report."""
    mesh, pd, sys_, dec = build_pipeline(cfg)
    prec = preconditioner.SchwarzPreconditioner(cfg.prec, dec)
    x0 = initial_guess(cfg, mesh.num_vertices)
    rep = krylov.gmres(sys_.A, prec.apply, sys_.rhs, x0, tol=cfg.tol, maxit=cfg.maxit)
    out = {
        "config": cfg,
        "n_dofs": mesh.num_vertices,
        "delta": dec.delta,
        "report": rep,
        "weighted_norm_valid": sys_.weighted_norm_valid,
    }
    if cfg.with_analysis:
        out["analysis"] = analysis_mod.analysis_report(
            sys_, dec, prec=prec if mesh.num_vertices <= cfg.dense_cap else None,
            dense_cap=cfg.dense_cap, n_angles=cfg.n_angles,
        )
    return out


@dataclass
class TableReport:
    table_id: int
    scenario: str
    supg_theta: float
    partition: str
    forcing: str
    init: str
    seed: int
    tol: float
    column_kind: str  # "delta_layers" or "N"
    columns: list
    cases: list  # of (c0, nu)
    soras: list  # rows x columns iteration counts
    oras: list
    qualitative: bool = False


_TABLE_SETUPS = {
    1: dict(scenario="rotating", supg_theta=0.0, partition="strips",
            forcing="center", init="zero", column_kind="delta_layers",
            columns=[2, 4, 6, 8], N=5),
    2: dict(scenario="contracting", supg_theta=0.0, partition="strips",
            forcing="center", init="zero", column_kind="delta_layers",
            columns=[2, 4, 6, 8], N=5),
    3: dict(scenario="horizontal", supg_theta=0.15, partition="strips",
            forcing="center", init="zero", column_kind="delta_layers",
            columns=[2, 4, 6, 8], N=5),
    4: dict(scenario="horizontal", supg_theta=0.15, partition="strips",
            forcing="left", init="random", column_kind="N",
            columns=[2, 4, 8, 16, 32, 64], overlap_layers=4),
    5: dict(scenario="horizontal", supg_theta=0.15, partition="greedy",
            forcing="left", init="random", column_kind="N",
            columns=[2, 4, 8, 16, 32, 64], overlap_layers=4, qualitative=True),
}


def reproduce_table(table_id, **overrides):
    """Run the full iteration-count grid for one of the five tables.
    Overrides: columns (subset), cells, seed, tol, maxit, cases."""
    if table_id not in _TABLE_SETUPS:
        raise ValueError("table_id must be in 1..5")
    setup = dict(_TABLE_SETUPS[table_id])
    qualitative = setup.pop("qualitative", False)
    columns = overrides.pop("columns", setup["columns"])
    cases = overrides.pop("cases", CASES)
    cells = overrides.pop("cells", 60)
    seed = overrides.pop("seed", 0)
    tol = overrides.pop("tol", 1e-6)
    maxit = overrides.pop("maxit", 300)
    if overrides:
        raise ValueError(f"unknown overrides: {sorted(overrides)}")

    soras = [[None] * len(columns) for _ in cases]
    oras = [[None] * len(columns) for _ in cases]
    for ci, col in enumerate(columns):
        if setup["column_kind"] == "delta_layers":
            N, layers = setup["N"], col
        else:
            N, layers = col, setup["overlap_layers"]
        mesh = build_rect_mesh(0.2 * N, 0.2, cells * N, cells)
        dec = build_geometry(mesh, N, layers // 2, setup["partition"], seed)
        for ri, (c0, nu) in enumerate(cases):
            pd = build_scenario(setup["scenario"], c0, nu, setup["forcing"],
                                setup["supg_theta"])
            sys_ = assemble_global(mesh, pd)
            attach_local_systems(dec, pd)
            if setup["init"] == "random":
                x0 = np.random.default_rng(seed).uniform(-1.0, 1.0, mesh.num_vertices)
            else:
                x0 = np.zeros(mesh.num_vertices)
            for kind, grid in (("soras", soras), ("oras", oras)):
                prec = preconditioner.SchwarzPreconditioner(kind, dec)
                rep = krylov.gmres(sys_.A, prec.apply, sys_.rhs, x0, tol=tol, maxit=maxit)
                grid[ri][ci] = rep.iterations

    return TableReport(
        table_id=table_id, scenario=setup["scenario"], supg_theta=setup["supg_theta"],
        partition=setup["partition"], forcing=setup["forcing"], init=setup["init"],
        seed=seed, tol=tol, column_kind=setup["column_kind"], columns=list(columns),
        cases=[tuple(c) for c in cases], soras=soras, oras=oras, qualitative=qualitative,
    )


def _column_label(report, col):
    return f"{col}h" if report.column_kind == "delta_layers" else str(col)


def emit(report, path, fmt="csv"):
    """Write a TableReport (csv or json) or any analysis/report dict (json).
    Output is byte-deterministic for a given report."""
    if fmt == "csv":
        if not isinstance(report, TableReport):
            raise ValueError("csv emission is defined for table reports")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["case", "delta_or_N", "soras_iters", "oras_iters"])
        for ri, (c0, nu) in enumerate(report.cases):
            for ci, col in enumerate(report.columns):
                writer.writerow(
                    [f"c0={c0:g} nu={nu:g}", _column_label(report, col),
                     report.soras[ri][ci], report.oras[ri][ci]]
                )
        data = buf.getvalue()
    elif fmt == "json":
        obj = asdict(report) if isinstance(report, TableReport) else report
        data = json.dumps(analysis_mod._to_jsonable(obj), indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError("format must be 'csv' or 'json'")
    if path is None:
        _sys.stdout.write(data)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(data)


def plot_table(report, png_path):
    """Render the iteration counts to a PNG (one line per case and
    preconditioner) next to the delimited output."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.arange(len(report.columns))
    for ri, (c0, nu) in enumerate(report.cases):
        ax.plot(x, report.soras[ri], marker="o", label=f"SORAS c0={c0:g} nu={nu:g}")
        ax.plot(x, report.oras[ri], marker="s", linestyle="--",
                label=f"ORAS c0={c0:g} nu={nu:g}")
    ax.set_xticks(x, [_column_label(report, c) for c in report.columns])
    ax.set_xlabel("overlap" if report.column_kind == "delta_layers" else "subdomains N")
    ax.set_ylabel("GMRES iterations")
    title = f"table {report.table_id}: {report.scenario}, {report.partition}"
    if report.qualitative:
        title += " (qualitative)"
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _add_config_flags(p):
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--c0", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--overlap-layers", type=int, dest="overlap_layers",
                   help="total overlap in layers (delta = layers*h), even")
    p.add_argument("--prec", choices=["soras", "oras"])
    p.add_argument("--partition", choices=["strips", "greedy"])
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--supg-theta", type=float, dest="supg_theta")
    p.add_argument("--forcing", choices=sorted(FORCINGS))
    p.add_argument("--init", choices=["zero", "random"])
    p.add_argument("--cells", type=int)
    p.add_argument("--maxit", type=int)


def _config_from_args(args):
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    for name in RunConfig.__dataclass_fields__:
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    return config_from_dict(base)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="schwarzdd",
        description="One-level Schwarz (SORAS/ORAS) experiments for "
        "reaction-convection-diffusion",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_solve = sub.add_parser("solve", help="run one preconditioned solve")
    _add_config_flags(p_solve)
    p_solve.add_argument("--out", help="residual history CSV / summary JSON")
    p_solve.add_argument("--format", choices=["csv", "json"], default="csv")

    p_table = sub.add_parser("table", help="reproduce one of the tables 1-5")
    p_table.add_argument("--table", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p_table.add_argument("--cells", type=int, default=60)
    p_table.add_argument("--seed", type=int, default=0)
    p_table.add_argument("--tol", type=float, default=1e-6)
    p_table.add_argument("--columns", help="comma-separated column subset")
    p_table.add_argument("--out")
    p_table.add_argument("--format", choices=["csv", "json"], default="csv")
    p_table.add_argument("--plot", action="store_true",
                         help="also render a PNG figure next to the output")

    p_an = sub.add_parser("analyze", help="convergence-theory analysis report")
    _add_config_flags(p_an)
    p_an.add_argument("--angles", type=int, dest="n_angles")
    p_an.add_argument("--cap", type=int, dest="dense_cap")
    p_an.add_argument("--out")

    p_check = sub.add_parser("check", help="verify the algebraic identities")
    _add_config_flags(p_check)

    args = parser.parse_args(argv)

    if args.verb == "solve":
        cfg = _config_from_args(args)
        res = run_scenario(cfg)
        rep = res["report"]
        status = "converged" if rep.converged else "NOT converged"
        print(
            f"{status} in {rep.iterations} iterations "
            f"(prec={cfg.prec}, N={cfg.N}, delta={cfg.overlap_layers}h, "
            f"dofs={res['n_dofs']})"
        )
        if args.out:
            if args.format == "csv":
                krylov.write_residual_history(rep, args.out)
            else:
                emit({"iterations": rep.iterations, "converged": rep.converged,
                      "residuals": list(rep.residuals), "n_dofs": res["n_dofs"],
                      "config": asdict(cfg)}, args.out, "json")
        return 0

    if args.verb == "table":
        overrides = {"cells": args.cells, "seed": args.seed, "tol": args.tol}
        if args.columns:
            overrides["columns"] = [int(c) for c in args.columns.split(",")]
        report = reproduce_table(args.table, **overrides)
        emit(report, args.out, args.format)
        if args.plot:
            png = (args.out or f"table{args.table}") + ".png"
            if args.out and args.out.endswith(".csv"):
                png = args.out[:-4] + ".png"
            plot_table(report, png)
        return 0

    if args.verb == "analyze":
        cfg = replace(_config_from_args(args), with_analysis=True)
        res = run_scenario(cfg)
        emit(res["analysis"], args.out, "json")
        return 0

    if args.verb == "check":
        cfg = _config_from_args(args)
        mesh, pd, sys_, dec = build_pipeline(cfg)
        rep = analysis_mod.check_assumptions(sys_, dec, dense_cap=cfg.dense_cap)
        checks = [
            ("partition_of_unity", rep.pu_pass, rep.pu_defect),
            ("row_identity_B", rep.row_identity_B_pass, rep.row_identity_B_rel),
            ("row_identity_F", rep.row_identity_F_pass, rep.row_identity_F_rel),
            ("local_coercivity", rep.coercivity_pass, rep.coercivity_min_eig),
            ("symmetric_part_is_F", rep.sym_part_pass, rep.sym_part_rel),
        ]
        for name, ok, val in checks:
            print(f"{'PASS' if ok else 'FAIL'} {name} ({val:.3e})")
        return 0 if rep.all_pass else 1

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
