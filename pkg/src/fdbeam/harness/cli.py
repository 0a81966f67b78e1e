"""Command-line entry point: ``fdbeam --config scenario.txt --mode all --sweep ul-power``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from ..protocol import MODES, ConfigError
from .config import FULL_FIDELITY_RUNS, SweepSpec, format_config, load_config
from .csvio import OutputError, write_aggregate_csv, write_trace_csv
from .sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

MODE_FLAGS = {m.replace("_", "-"): m for m in MODES}
SWEEP_FLAGS = {"ul-power": "ul_power_dbm", "dl-power": "dl_power_dbm", "none": "none"}

log = logging.getLogger("fdbeam")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdbeam", description=__doc__)
    p.add_argument("--config", type=Path, help="scenario file (key = value lines)")
    p.add_argument("--mode", choices=[*MODE_FLAGS, "all"], help="protocol to run (default: config 'mode')")
    p.add_argument("--sweep", choices=list(SWEEP_FLAGS), help="swept variable (default: config)")
    p.add_argument("--sweep-values", help='comma-separated sweep values, e.g. "0,5,10"')
    p.add_argument("--runs", type=int, help="Monte Carlo runs per point")
    p.add_argument("--full-fidelity", action="store_true", help=f"use {FULL_FIDELITY_RUNS} runs")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--trace", action="store_true", help="also write per-slot traces")
    p.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _sweep_from_args(args, sweep: SweepSpec) -> SweepSpec:
    changes = {}
    if args.sweep is not None:
        changes["variable"] = SWEEP_FLAGS[args.sweep]
    if args.sweep_values is not None:
        try:
            changes["values"] = tuple(float(s) for s in args.sweep_values.split(",") if s.strip())
        except ValueError:
            raise ConfigError("sweep_values", f"cannot parse {args.sweep_values!r}") from None
    if args.runs is not None:
        changes["runs"] = args.runs
    if args.full_fidelity:
        changes["runs"] = FULL_FIDELITY_RUNS
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if changes.get("variable") == "none":
        changes["values"] = ()
    return replace(sweep, **changes)


def trace_filename(variable: str, value) -> str:
    if value is None:
        return "traces.csv"
    return f"traces_{variable}_{format(value, 'g')}.csv"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, sweep = load_config(args.config)
        sweep = _sweep_from_args(args, sweep)
        if args.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if args.mode == "all":
            modes = MODES
        else:
            modes = (MODE_FLAGS[args.mode],) if args.mode else (cfg.mode,)
            cfg = replace(cfg, mode=modes[0])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO

    if args.print_config:
        sys.stdout.write(format_config(cfg, sweep))
        return EXIT_OK

    result = run_sweep(cfg, sweep, modes, workers=args.workers, keep_traces=args.trace)
    try:
        os.makedirs(args.out, exist_ok=True)
        (args.out / "config.txt").write_text(format_config(cfg, sweep))
        write_aggregate_csv(result.rows, args.out / "aggregate.csv")
        if args.trace:
            for value in sweep.points():
                traces = {m: result.traces[(value, m)] for m in modes}
                write_trace_csv(traces, args.out / trace_filename(sweep.variable, value))
    except (OutputError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for row in result.rows:
        value = "" if row.sweep_value is None else f" {row.sweep_variable}={row.sweep_value:g}"
        print(f"{row.mode:13s}{value}  doa_mse={row.doa_mse_rad2:.4e} rad^2  "
              f"rate={row.mean_effective_rate:.4f} b/cu  saturation={row.saturation_rate:.3f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
