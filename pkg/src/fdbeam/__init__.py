"""DoA-assisted analog beam management for full-duplex mmWave massive MIMO links."""

from .protocol import MODES, ScenarioConfig, SlotOutcome, make_streams, run_mode

__version__ = "0.1.0"
__all__ = ["MODES", "ScenarioConfig", "SlotOutcome", "make_streams", "run_mode"]
