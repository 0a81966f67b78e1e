"""Flat ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored. Keys are the
:class:`~fdbeam.protocol.ScenarioConfig` field names (units in the suffix)
plus the sweep keys ``sweep_variable``, ``sweep_values``, ``runs`` and
``master_seed``. Anything unspecified keeps its default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from ..protocol import ConfigError, ScenarioConfig

SWEEP_VARIABLES = {"ul_power_dbm": "p_u_dbm", "dl_power_dbm": "p_b_dbm", "none": None}
DEFAULT_RUNS = 100
FULL_FIDELITY_RUNS = 1000


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "none"
    values: tuple[float, ...] = ()
    runs: int = DEFAULT_RUNS
    master_seed: int = 0

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep_variable", f"must be one of {sorted(SWEEP_VARIABLES)}")
        if self.variable != "none":
            if not self.values:
                raise ConfigError("sweep_values", "a sweep needs at least one value")
            if list(self.values) != sorted(self.values):
                raise ConfigError("sweep_values", "values must be sorted ascending")
            if not all(math.isfinite(v) for v in self.values):
                raise ConfigError("sweep_values", "values must be finite")
        if self.runs < 1:
            raise ConfigError("runs", "must be >= 1")

    @property
    def field_name(self) -> str | None:
        return SWEEP_VARIABLES[self.variable]

    def points(self) -> list[float | None]:
        return [None] if self.variable == "none" else list(self.values)


_SCENARIO_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_SWEEP_KEYS = ("sweep_variable", "sweep_values", "runs", "master_seed")


def _parse_value(key: str, kind: str, raw: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config(text: str) -> tuple[ScenarioConfig, SweepSpec]:
    scenario: dict = {}
    sweep: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _SCENARIO_TYPES:
            scenario[key] = _parse_value(key, _SCENARIO_TYPES[key], raw)
        elif key == "sweep_variable":
            sweep["variable"] = raw
        elif key == "sweep_values":
            items = [s.strip() for s in raw.split(",") if s.strip()]
            sweep["values"] = tuple(_parse_value(key, "float", s) for s in items)
        elif key in ("runs", "master_seed"):
            sweep[key] = _parse_value(key, "int", raw)
        else:
            raise ConfigError(key, "unknown configuration key")
    return ScenarioConfig(**scenario), SweepSpec(**sweep)


def load_config(path: str | Path | None) -> tuple[ScenarioConfig, SweepSpec]:
    """Read and validate a scenario file; ``None`` gives the default scenario."""
    if path is None:
        return ScenarioConfig(), SweepSpec()
    return parse_config(Path(path).read_text())


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: ScenarioConfig, sweep: SweepSpec) -> str:
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}" for f in fields(cfg)]
    lines.append(f"sweep_variable = {sweep.variable}")
    if sweep.values:
        lines.append("sweep_values = " + ", ".join(_fmt(float(v)) for v in sweep.values))
    lines.append(f"runs = {sweep.runs}")
    lines.append(f"master_seed = {sweep.master_seed}")
    return "\n".join(lines) + "\n"
