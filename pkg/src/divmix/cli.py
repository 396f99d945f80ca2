"""Batch command line: run a config-driven experiment, reproduce a reference
table at desk scale, or estimate a data file with a single estimator config.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from .harness import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, ExperimentConfig,
                      TABLES, estimate_file, reproduce_table, run_experiment,
                      _write_tables_csv)
from .numerics import ConfigError, IntegrationError, SingularMatrixError


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    table = run_experiment(cfg)
    out = cfg.outputs.get("table_csv", args.out)
    if out:
        _write_tables_csv([table], out)
        print(f"wrote {out}")
    else:
        _print_table(table)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    tables = reproduce_table(args.table_id, scale=args.scale, seed=args.seed,
                             out_dir=args.out_dir, keep_reports=args.keep_reports)
    for t in tables:
        _print_table(t)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    with open(args.estimator_config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    report = estimate_file(args.data, cfg, out_path=args.out)
    print(report.to_json(indent=1))
    return EXIT_OK


def _cmd_list_tables(args) -> int:
    for name, (_, desc) in sorted(TABLES.items()):
        print(f"{name:45s} {desc}")
    return EXIT_OK


def _print_table(table):
    print(f"[{table.section}]")
    for row in table.rows:
        parts = [f"{q['name']}={q['mean']:.6g} (sd {q['sd']:.3g})"
                 for q in row["quantities"]]
        ref_parts = []
        for q in row["quantities"]:
            ref = table.references.get(f"{row['estimator']}|{q['name']}")
            if ref is not None:
                ref_parts.append(f"{q['name']}*={ref:g}")
        line = f"  {row['estimator']:28s} " + "  ".join(parts)
        if ref_parts:
            line += "   [paper: " + " ".join(ref_parts) + "]"
        if row["degenerate"]:
            line += f"   ({row['degenerate']} degenerate)"
        print(line)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="divmix",
                                description="Divergence-based mixture estimation")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config (JSON)")
    run_p.add_argument("config")
    run_p.add_argument("--out", default=None, help="CSV output path")
    run_p.set_defaults(func=_cmd_run)

    rep_p = sub.add_parser("reproduce", help="reproduce a wired reference table")
    rep_p.add_argument("table_id")
    rep_p.add_argument("--scale", type=float, default=1.0)
    rep_p.add_argument("--seed", type=int, default=0)
    rep_p.add_argument("--out-dir", default=None)
    rep_p.add_argument("--keep-reports", action="store_true")
    rep_p.set_defaults(func=_cmd_reproduce)

    est_p = sub.add_parser("estimate", help="estimate a data file")
    est_p.add_argument("data")
    est_p.add_argument("estimator_config")
    est_p.add_argument("--out", default=None, help="JSON report path")
    est_p.set_defaults(func=_cmd_estimate)

    lst_p = sub.add_parser("list-tables", help="list wired reference tables")
    lst_p.set_defaults(func=_cmd_list_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SingularMatrixError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
