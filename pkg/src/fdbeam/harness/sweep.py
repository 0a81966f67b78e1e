"""Monte Carlo orchestration over sweep points, modes and runs."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..protocol import MODES, ConfigError, ScenarioConfig, SlotOutcome, channel_trajectory, make_streams, run_mode
from .config import SweepSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregateRow:
    mode: str
    sweep_variable: str
    sweep_value: float | None
    doa_mse_rad2: float
    doa_median_mse_rad2: float
    mean_effective_rate: float
    saturation_rate: float
    runs: int


@dataclass
class AggregateResult:
    rows: list[AggregateRow] = field(default_factory=list)
    # (sweep_value, mode) -> per-run slot outcomes, indexed by run
    traces: dict[tuple[float | None, str], list[list[SlotOutcome]]] = field(default_factory=dict)

    def row(self, mode: str, value: float | None = None) -> AggregateRow:
        for r in self.rows:
            if r.mode == mode and r.sweep_value == value:
                return r
        raise KeyError((mode, value))


def point_config(cfg: ScenarioConfig, sweep: SweepSpec, value: float | None) -> ScenarioConfig:
    if value is None:
        return cfg
    return replace(cfg, **{sweep.field_name: float(value)})


def simulate_run(cfg: ScenarioConfig, modes: tuple[str, ...], master_seed: int,
                 run_index: int) -> dict[str, list[SlotOutcome]]:
    """All requested modes on one shared channel trajectory.

    Every mode gets fresh noise/data/estimation streams so its output does
    not depend on which other modes were requested.
    """
    trajectory = channel_trajectory(cfg, make_streams(master_seed, run_index).channel)
    return {m: run_mode(cfg, m, make_streams(master_seed, run_index), trajectory) for m in modes}


def _task(args):
    cfg, modes, seed, run = args
    return simulate_run(cfg, modes, seed, run)


def aggregate(mode: str, sweep: SweepSpec, value, per_run: list[list[SlotOutcome]]) -> AggregateRow:
    err2 = np.array([[o.doa_error ** 2 for o in run] for run in per_run])
    rate = np.array([o.effective_rate for run in per_run for o in run])
    sat = np.array([o.saturated for run in per_run for o in run], dtype=float)
    return AggregateRow(
        mode=mode,
        sweep_variable=sweep.variable,
        sweep_value=value,
        doa_mse_rad2=float(np.mean(err2.ravel())),
        doa_median_mse_rad2=float(np.median(np.mean(err2, axis=1))),
        mean_effective_rate=float(np.mean(rate)),
        saturation_rate=float(np.mean(sat)),
        runs=len(per_run),
    )


def run_sweep(cfg: ScenarioConfig, sweep: SweepSpec, modes=MODES, workers: int = 1,
              keep_traces: bool = True) -> AggregateResult:
    """Run every sweep point x mode x run and reduce by run index.

    Output is a pure function of ``(cfg, sweep)``; ``workers`` only changes
    wall-clock time.
    """
    modes = tuple(modes)
    for m in modes:
        if m not in MODES:
            raise ConfigError("mode", f"unknown mode {m!r}")
    points = sweep.points()
    tasks = [(point_config(cfg, sweep, v), modes, sweep.master_seed, r)
             for v in points for r in range(sweep.runs)]
    log.info("running %d tasks (%d points x %d runs, modes=%s) on %d worker(s)",
             len(tasks), len(points), sweep.runs, ",".join(modes), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_task(t) for t in tasks]

    out = AggregateResult()
    for i, value in enumerate(points):
        chunk = results[i * sweep.runs:(i + 1) * sweep.runs]
        for m in modes:
            per_run = [res[m] for res in chunk]
            out.rows.append(aggregate(m, sweep, value, per_run))
            if keep_traces:
                out.traces[(value, m)] = per_run
    return out
