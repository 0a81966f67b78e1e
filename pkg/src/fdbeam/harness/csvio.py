"""CSV persistence for slot traces and aggregates."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from ..protocol import SlotOutcome
from .sweep import AggregateRow

TRACE_COLUMNS = (
    "mode", "run", "slot", "theta_true_rad", "theta_hat_rad", "doa_error_rad", "beam_index",
    "rate_estimated", "rate_realized", "effective_rate", "residual_si_ue_mw", "saturated", "doa_updated",
)
AGGREGATE_COLUMNS = (
    "mode", "sweep_variable", "sweep_value", "doa_mse_rad2", "mean_effective_rate", "saturation_rate", "runs",
)


class OutputError(OSError):
    pass


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def trace_rows(mode: str, per_run: list[list[SlotOutcome]]) -> Iterable[list[str]]:
    for run, outcomes in enumerate(per_run):
        for o in outcomes:
            yield [
                mode, str(run), str(o.slot_index), fmt_float(o.theta_true), fmt_float(o.theta_hat),
                fmt_float(o.doa_error), str(o.beam_index), fmt_float(o.rate_estimated),
                fmt_float(o.rate_realized), fmt_float(o.effective_rate), fmt_float(o.residual_si_ue),
                str(int(o.saturated)), str(int(o.doa_updated)),
            ]


def aggregate_rows(rows: Iterable[AggregateRow]) -> Iterable[list[str]]:
    for r in rows:
        yield [
            r.mode, r.sweep_variable, "" if r.sweep_value is None else fmt_float(r.sweep_value),
            fmt_float(r.doa_mse_rad2), fmt_float(r.mean_effective_rate), fmt_float(r.saturation_rate),
            str(r.runs),
        ]


def _write(path: Path, header, rows) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_trace_csv(traces: dict[str, list[list[SlotOutcome]]], path) -> None:
    """``traces`` maps mode -> per-run outcome lists; modes are written in insertion order."""
    rows = (row for mode, per_run in traces.items() for row in trace_rows(mode, per_run))
    _write(path, TRACE_COLUMNS, rows)


def write_aggregate_csv(rows: Iterable[AggregateRow], path) -> None:
    _write(path, AGGREGATE_COLUMNS, aggregate_rows(rows))


def write_csv(result, path) -> None:
    """Dispatch on payload: a list of :class:`AggregateRow` or a mode -> traces mapping."""
    if isinstance(result, dict):
        write_trace_csv(result, path)
    else:
        write_aggregate_csv(getattr(result, "rows", result), path)
