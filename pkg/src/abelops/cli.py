"""Command-line entry point: configuration, dispatch, and serialization.

Subcommands
-----------
periods      write the period matrix as Omega.json
constants    write the full constants table as constants.json
coeffs       write operator coefficient grids as CSV
reconstruct  write per-x reconstructed coefficient tables as JSON
verify       run the certification suites, write report.json and a chart
scan         write torus theta grids as CSV plus heatmaps

Every artifact is stamped with a hash of the effective configuration, so
outputs of different runs can be matched to their inputs.  Exit codes:
0 success (and, for verify, overall pass), 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

# honor the worker cap before any numerics are loaded
_threads = os.environ.get("ABELOPS_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import numpy as np

from . import verify as verify_mod
from .config import ConfigError, RunConfig, parse_config
from .constants import constants_table, curve_context, table_to_json
from .curve import CurveError, curve_to_json, make_curve, period_data
from .operators import BakerBasis, lemma7_9_coefficients, reconstruct_operator
from .theta import torus_grid
from .verify import config_hash, default_cprime, emit_report


def _c2l(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _csv_writer(path: Path, comment: str, header: list[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="")
    fh.write(comment + "\n")
    writer = csv.writer(fh)
    writer.writerow(header)
    return fh, writer


def _context(cfg: RunConfig):
    cc = curve_context([float(b) for b in cfg.branch])
    return cc


def cmd_periods(cfg: RunConfig) -> int:
    curve = make_curve([float(b) for b in cfg.branch])
    periods = period_data(curve)
    doc = curve_to_json(curve, periods)
    doc["config_hash"] = config_hash(cfg.as_document())
    _write_json(cfg.output_dir / "Omega.json", doc)
    return 0


def cmd_constants(cfg: RunConfig) -> int:
    cc = _context(cfg)
    doc = table_to_json(constants_table(cc))
    doc["config_hash"] = config_hash(cfg.as_document())
    _write_json(cfg.output_dir / "constants.json", doc)
    return 0


#: coefficient fields exported by the coeffs subcommand
_COEFF_FIELDS = ("V", "W", "h11", "h12", "f12", "H11", "H12", "H22")


def cmd_coeffs(cfg: RunConfig) -> int:
    cc = _context(cfg)
    table = constants_table(cc)
    co = lemma7_9_coefficients(
        cc, table.fay, table.exp, verify_mod.DEFAULT_OPERATOR_C
    )
    window = 0.4
    t = np.linspace(-window, window, cfg.grid)
    h = config_hash(cfg.as_document())
    comment = f"# slice=real_x window={window} config={h}"
    header = ["x1", "x2"]
    for name in _COEFF_FIELDS:
        header += [f"{name}_re", f"{name}_im"]
    fh, writer = _csv_writer(cfg.output_dir / "coeffs" / "operator_fields.csv",
                             comment, header)
    with fh:
        for x1 in t:
            for x2 in t:
                x = np.array([x1, x2], dtype=complex)
                row = [f"{x1:.10g}", f"{x2:.10g}"]
                for name in _COEFF_FIELDS:
                    v = co[name].value(x)
                    row += [f"{v.real:.16e}", f"{v.imag:.16e}"]
                writer.writerow(row)
    scalars = {k: _c2l(co[k]) for k in ("g11", "g12", "g22", "f11")}
    scalars["config_hash"] = h
    _write_json(cfg.output_dir / "coeffs" / "constant_coefficients.json", scalars)
    return 0


def cmd_reconstruct(cfg: RunConfig) -> int:
    cc = _context(cfg)
    cprime = (default_cprime(cc.periods.Omega) if cfg.cprime is None
              else np.asarray(cfg.cprime, dtype=complex))
    basis = BakerBasis(cc=cc, kind="section2", c=np.asarray(cfg.c, dtype=complex),
                       cprime=cprime)
    t = np.linspace(-0.3, 0.3, 3)
    tables = []
    for x1 in t:
        for x2 in t:
            x = np.array([x1, x2], dtype=complex)
            rows = reconstruct_operator(basis, (1, 1), x, seed=cfg.seed)
            entry_doc = {}
            for r in (0, 1):
                for (entry, m), v in rows[r].coeffs.items():
                    key = f"{entry[0]}{entry[1]}:{m[0]}{m[1]}"
                    entry_doc[key] = _c2l(v)
            tables.append(
                {
                    "x": [_c2l(x[0]), _c2l(x[1])],
                    "coefficients": entry_doc,
                    "residual": max(rows[0].residual, rows[1].residual),
                    "condition": max(rows[0].cond, rows[1].cond),
                }
            )
    doc = {
        "basis": "section2",
        "spectral_function": "second logarithmic derivative, first coordinate",
        "tables": tables,
        "config_hash": config_hash(cfg.as_document()),
    }
    _write_json(cfg.output_dir / "reconstruct.json", doc)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    cc = _context(cfg)
    results = verify_mod.run_all(
        cc,
        regime=cfg.regime,
        seed=cfg.seed,
        grid=cfg.grid,
        tol_scale=cfg.tol_scale,
        tolerances=cfg.tolerances,
    )
    report = emit_report(results, cfg.as_document())
    _write_json(cfg.output_dir / "report.json", report)
    from .report_plots import render_report_chart

    render_report_chart(report, cfg.output_dir / "report_residuals.png")
    return 0 if report["overall"] else 1


def cmd_scan(cfg: RunConfig) -> int:
    cc = _context(cfg)
    h = config_hash(cfg.as_document())
    from .report_plots import render_scan_heatmap

    for idx in (1, 2, 3, 4):
        T1, T2, vals = torus_grid(cc.ctx, idx, cfg.grid, window=1.0)
        comment = f"# slice=torus_{idx} window=1.0 config={h}"
        fh, writer = _csv_writer(
            cfg.output_dir / "scan" / f"torus_{idx}.csv", comment,
            ["t1", "t2", "re", "im"],
        )
        with fh:
            for i in range(cfg.grid):
                for j in range(cfg.grid):
                    v = vals[i, j]
                    writer.writerow(
                        [f"{T1[i, j]:.10g}", f"{T2[i, j]:.10g}",
                         f"{v.real:.16e}", f"{v.imag:.16e}"]
                    )
        render_scan_heatmap(
            T1, T2, vals, cfg.output_dir / "scan" / f"torus_{idx}.png",
            f"theta magnitude on torus {idx}",
        )
    return 0


_COMMANDS = {
    "periods": cmd_periods,
    "constants": cmd_constants,
    "coeffs": cmd_coeffs,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abelops",
        description="Genus-2 theta geometry and commuting matrix operators",
    )
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--curve", type=float, nargs=5, metavar="Y",
                        help="five increasing real branch points")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="artifact directory")
    parser.add_argument("--grid", type=int)
    parser.add_argument("--tol-scale", type=float, dest="tol_scale")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        if name == "verify":
            sp.add_argument("--regime", choices=("theorem1", "theorem2", "all"))
    return parser


def dispatch(cfg: RunConfig, command: str) -> int:
    try:
        return _COMMANDS[command](cfg)
    except KeyError:
        print(f"unknown subcommand {command!r}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        "branch": args.curve,
        "seed": args.seed,
        "output_dir": args.out,
        "grid": args.grid,
        "tol_scale": args.tol_scale,
        "regime": getattr(args, "regime", None),
    }
    try:
        cfg = parse_config(args.config, overrides)
    except (ConfigError, CurveError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return dispatch(cfg, args.command)


if __name__ == "__main__":
    raise SystemExit(main())
