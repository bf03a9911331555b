"""Shared vocabulary types for the streetlight fleet.

Everything here is a plain immutable value plus a couple of pure
functions; the simulator, the wire protocol and the cost model all build
on these.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

FAULT_LAMP_DARK = "lamp_dark"


def clamp_brightness(raw: int) -> int:
    """Clamp an integer to the valid brightness range 0..100."""
    return min(max(int(raw), 0), 100)


class LampStatus(NamedTuple):
    """One logged lamp cell: on/off bit plus a 0..100 level.

    The level is the commanded brightness while the lamp is on and the
    last measured feedback while it is off (the lamp-facing light sensor
    keeps reading ambient light).
    """

    state_bit: int
    level: int


@dataclass(frozen=True)
class LampState:
    """Commanded state of a single lamp plus its measured feedback.

    ``brightness`` keeps the last commanded level even while the lamp is
    off; ``feedback_pct`` is a measurement and may diverge freely from
    the command. That divergence is what fault detection inspects.
    """

    commanded: bool = False
    brightness: int = 50
    feedback_pct: int = 0

    def with_command(self, on: bool, brightness: Optional[int] = None) -> "LampState":
        if brightness is None:
            return replace(self, commanded=on)
        return replace(self, commanded=on, brightness=clamp_brightness(brightness))

    def with_feedback(self, feedback_pct: int) -> "LampState":
        return replace(self, feedback_pct=clamp_brightness(feedback_pct))

    def to_status(self) -> LampStatus:
        if self.commanded:
            return LampStatus(1, self.brightness)
        return LampStatus(0, self.feedback_pct)


@dataclass(frozen=True)
class SensorFrame:
    """One node's instantaneous readings, as reported over the wire.

    ``amps`` is in milliamps: the prototype logs values like 99..133 mA
    against a 5.00 V supply, which only makes sense as mA.
    """

    node_id: str
    sim_time: int
    volts: str  # fixed 2-decimal text, e.g. "5.00"
    amps: int
    temp_c: int
    sun_pct: int
    lamps: tuple[LampStatus, ...]


@dataclass
class FaultRecord:
    """An open or cleared lamp fault. At most one open record per
    (node, lamp, kind)."""

    node_id: str
    lamp_index: int
    kind: str = FAULT_LAMP_DARK
    onset: int = 0
    cleared: Optional[int] = None

    @property
    def is_open(self) -> bool:
        return self.cleared is None


def lamp_power_watts(rated_watts, state: LampState):
    """Electrical power drawn by a lamp, linear in brightness.

    A lamp at 50% brightness draws half its rated power; an off lamp
    draws nothing. The return type follows ``rated_watts`` (float,
    Decimal and Fraction all work), so exact-arithmetic callers stay
    exact.
    """
    if not state.commanded:
        return rated_watts * 0
    return rated_watts * state.brightness / 100
