"""Sensor and actuator emulation for one node, with fault injection.

Feedback follows the commanded brightness unless an injection breaks
the chain: a burned-out lamp keeps drawing power but emits no light (a
dead LED behind a live driver, matching the prototype's "damaged, yet
the light is on" demo); a covered feedback sensor reads 0 outright.
Current draw is the lamp load over a fixed 5 V supply plus a constant
controller baseline, in whole milliamps like the admin-panel log.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

from ..core import LampState, SensorFrame, clamp_brightness, lamp_power_watts
from .environment import ConfigError, EnvSample
from . import prng

INJECT_BURNED_OUT = "burned_out"
INJECT_FEEDBACK_COVERED = "feedback_covered"


@dataclass
class NodeConfig:
    lamp_count: int = 6
    rated_watts: str = "0.05"  # per-lamp rated power, decimal text
    volts: str = "5.00"
    baseline_ma: int = 95  # controller + radio draw with all lamps off
    feedback_noise_pct: int = 0
    ambient_bleed_pct: int = 75  # share of sunlight the lamp sensor sees
    ambient_jitter_pct: int = 0
    amp_jitter_ma: int = 0

    def validate(self) -> None:
        if self.lamp_count < 1:
            raise ConfigError("lamp_count must be >= 1")
        try:
            if Decimal(self.rated_watts) < 0:
                raise ConfigError("rated_watts must be >= 0")
        except ArithmeticError:
            raise ConfigError(f"bad rated_watts {self.rated_watts!r}") from None
        if self.baseline_ma < 0:
            raise ConfigError("baseline_ma must be >= 0")
        for name in ("feedback_noise_pct", "ambient_bleed_pct", "ambient_jitter_pct"):
            if not 0 <= getattr(self, name) <= 100:
                raise ConfigError(f"{name} must be in 0..100")


@dataclass(frozen=True)
class FaultInjection:
    """Scripted hardware failure, active for start <= t < end."""

    lamp: int
    kind: str
    start: int
    end: Optional[int] = None
    node_index: int = 0

    def active(self, t: int) -> bool:
        return self.start <= t and (self.end is None or t < self.end)

    def validate(self, lamp_count: int, node_count: int) -> None:
        if self.kind not in (INJECT_BURNED_OUT, INJECT_FEEDBACK_COVERED):
            raise ConfigError(f"unknown injection kind {self.kind!r}")
        if not 0 <= self.lamp < lamp_count:
            raise ConfigError(f"injection lamp {self.lamp} out of range")
        if not 0 <= self.node_index < node_count:
            raise ConfigError(f"injection node index {self.node_index} out of range")
        if self.start < 0 or (self.end is not None and self.end <= self.start):
            raise ConfigError(f"injection window [{self.start}, {self.end}) is invalid")


def sensor_emulate(
    cfg: NodeConfig,
    node_id: str,
    node_index: int,
    t: int,
    lamps: list[LampState],
    env: EnvSample,
    injections: tuple[FaultInjection, ...],
    seed: int,
) -> tuple[SensorFrame, list[LampState]]:
    """Measure one tick: returns the frame and lamp states with fresh
    feedback readings."""
    burned = {inj.lamp for inj in injections if inj.kind == INJECT_BURNED_OUT and inj.active(t)}
    covered = {
        inj.lamp for inj in injections if inj.kind == INJECT_FEEDBACK_COVERED and inj.active(t)
    }

    updated: list[LampState] = []
    for i, lamp in enumerate(lamps):
        light = lamp.brightness if (lamp.commanded and i not in burned) else 0
        ambient = (env.sun_pct * cfg.ambient_bleed_pct + 50) // 100
        if cfg.ambient_jitter_pct:
            ambient += prng.rand_int(
                seed, -cfg.ambient_jitter_pct, cfg.ambient_jitter_pct,
                prng.STREAM_AMBIENT, node_index, t, i,
            )
        feedback = max(light, ambient)
        if cfg.feedback_noise_pct:
            feedback += prng.rand_int(
                seed, -cfg.feedback_noise_pct, cfg.feedback_noise_pct,
                prng.STREAM_FEEDBACK_NOISE, node_index, t, i,
            )
        if i in covered:
            feedback = 0
        updated.append(lamp.with_feedback(clamp_brightness(feedback)))

    rated = Decimal(cfg.rated_watts)
    watts = sum((lamp_power_watts(rated, lamp) for lamp in updated), Decimal(0))
    ma_draw = (watts / Decimal(cfg.volts) * 1000).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    amps = cfg.baseline_ma + int(ma_draw)
    if cfg.amp_jitter_ma:
        amps += prng.rand_int(
            seed, -cfg.amp_jitter_ma, cfg.amp_jitter_ma, prng.STREAM_AMP_NOISE, node_index, t
        )
    frame = SensorFrame(
        node_id=node_id,
        sim_time=t,
        volts=cfg.volts,
        amps=max(amps, 0),
        temp_c=env.temp_c,
        sun_pct=env.sun_pct,
        lamps=tuple(lamp.to_status() for lamp in updated),
    )
    return frame, updated
