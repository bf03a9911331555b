"""lampfleet: deterministic streetlight-fleet simulator, wire protocol,
control-room service and tariff cost model."""

__version__ = "0.1.0"

from .core import (
    FAULT_LAMP_DARK,
    FaultRecord,
    LampState,
    LampStatus,
    SensorFrame,
    clamp_brightness,
    lamp_power_watts,
)

__all__ = [
    "FAULT_LAMP_DARK",
    "FaultRecord",
    "LampState",
    "LampStatus",
    "SensorFrame",
    "clamp_brightness",
    "lamp_power_watts",
    "__version__",
]
