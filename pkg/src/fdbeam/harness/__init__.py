from .config import SweepSpec, format_config, load_config, parse_config
from .csvio import write_aggregate_csv, write_csv, write_trace_csv
from .sweep import AggregateResult, AggregateRow, run_sweep

__all__ = [
    "AggregateResult", "AggregateRow", "SweepSpec", "format_config", "load_config", "parse_config",
    "run_sweep", "write_aggregate_csv", "write_csv", "write_trace_csv",
]
