"""Deterministic environment model: sunlight, temperature, traffic.

The default sun curve is a sine-table day arc (0% at night, ~100% at
solar noon) evaluated with integer arithmetic only, so identical
scenarios sample identically on every platform. Traffic is either a
scripted event list or per-tick Bernoulli detections driven by an
hourly rate table and the counter-based generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..num import lerp_int
from . import prng

DAY_S = 24 * 3600

# sin(k*pi/8) scaled to percent; interpolated linearly between knots.
_SUN_SHAPE = (0, 38, 71, 92, 100, 92, 71, 38, 0)

# Expected traffic detections per lamp per hour; low from midnight to
# dawn, peaks around the commute hours.
DEFAULT_HOURLY_RATE = (
    6, 4, 3, 3, 4, 10,
    30, 80, 120, 90, 70, 60,
    60, 60, 70, 80, 120, 150,
    160, 120, 80, 40, 20, 10,
)

TRAFFIC_SCRIPTED = "scripted"
TRAFFIC_STOCHASTIC = "stochastic"


class ConfigError(ValueError):
    """A scenario or controller configuration violates an invariant."""


@dataclass(frozen=True)
class ScriptedEvent:
    """One traffic presence window: lamp sees traffic for
    start <= t < start + duration."""

    start: int
    lamp: int
    duration: int


@dataclass
class EnvironmentConfig:
    sunrise_s: int = 6 * 3600
    sunset_s: int = 18 * 3600
    # Optional explicit curve: (time-of-day s, sun %) knots, sorted,
    # linearly interpolated, wrapping over midnight.
    sun_points: tuple[tuple[int, int], ...] | None = None
    temp_day_c: int = 30
    temp_night_c: int = 21
    traffic_model: str = TRAFFIC_STOCHASTIC
    hourly_rate: tuple[float, ...] = DEFAULT_HOURLY_RATE
    scripted_events: tuple[ScriptedEvent, ...] = ()
    rng_seed: int = 0

    def validate(self) -> None:
        if not 0 <= self.sunrise_s < self.sunset_s <= DAY_S:
            raise ConfigError(
                f"need 0 <= sunrise < sunset <= 86400, got {self.sunrise_s}/{self.sunset_s}"
            )
        if self.traffic_model not in (TRAFFIC_SCRIPTED, TRAFFIC_STOCHASTIC):
            raise ConfigError(f"unknown traffic model {self.traffic_model!r}")
        if self.traffic_model == TRAFFIC_STOCHASTIC:
            if len(self.hourly_rate) != 24:
                raise ConfigError("hourly_rate needs exactly 24 entries")
            if any(r < 0 for r in self.hourly_rate):
                raise ConfigError("hourly_rate entries must be >= 0")
        if self.sun_points is not None:
            pts = list(self.sun_points)
            if not pts:
                raise ConfigError("sun_points must not be empty")
            if any(not (0 <= tod <= DAY_S and 0 <= pct <= 100) for tod, pct in pts):
                raise ConfigError("sun_points entries out of range")
            if pts != sorted(pts, key=lambda p: p[0]):
                raise ConfigError("sun_points must be sorted by time of day")
        last = None
        for ev in self.scripted_events:
            if ev.duration <= 0 or ev.start < 0 or ev.lamp < 0:
                raise ConfigError(f"bad scripted event {ev}")
            if last is not None and ev.start < last:
                raise ConfigError("scripted events must be time-ordered")
            last = ev.start


@dataclass(frozen=True)
class EnvSample:
    sun_pct: int
    temp_c: int
    traffic: tuple[bool, ...]


def _sun_shape_pct(env: EnvironmentConfig, tod: int) -> int:
    if env.sun_points is not None:
        return _interp_points(env.sun_points, tod)
    if not env.sunrise_s < tod < env.sunset_s:
        return 0
    span = env.sunset_s - env.sunrise_s
    # position within the arc, scaled onto the 8-segment sine table
    x = (tod - env.sunrise_s) * 8
    seg = min(x // span, 7)
    seg_start = seg * span
    return lerp_int(0, _SUN_SHAPE[seg], span, _SUN_SHAPE[seg + 1], x - seg_start)


def _interp_points(points: tuple[tuple[int, int], ...], tod: int) -> int:
    if len(points) == 1:
        return points[0][1]
    prev = None
    for x, y in points:
        if x == tod:
            return y
        if x > tod:
            if prev is None:
                # wrap backwards over midnight
                lx, ly = points[-1]
                return lerp_int(lx - DAY_S, ly, x, y, tod)
            return lerp_int(prev[0], prev[1], x, y, tod)
        prev = (x, y)
    # wrap forwards over midnight
    fx, fy = points[0]
    return lerp_int(prev[0], prev[1], fx + DAY_S, fy, tod)


def _traffic_at(
    env: EnvironmentConfig, t: int, lamp_count: int, node_index: int
) -> tuple[bool, ...]:
    if env.traffic_model == TRAFFIC_SCRIPTED:
        present = [False] * lamp_count
        for ev in env.scripted_events:
            if ev.lamp < lamp_count and ev.start <= t < ev.start + ev.duration:
                present[ev.lamp] = True
        return tuple(present)
    hour = (t % DAY_S) // 3600
    p = env.hourly_rate[hour] / 3600.0
    return tuple(
        prng.unit(env.rng_seed, prng.STREAM_TRAFFIC, node_index, t, lamp) < p
        for lamp in range(lamp_count)
    )


def env_sample(
    env: EnvironmentConfig, t: int, lamp_count: int = 6, node_index: int = 0
) -> EnvSample:
    """Sample the environment at sim second ``t``.

    Pure in (env, t, lamp_count, node_index); stochastic traffic comes
    from the counter-based generator, so sampling order is irrelevant.
    """
    if t < 0:
        raise ValueError(f"negative sim time {t}")
    tod = t % DAY_S
    shape = _sun_shape_pct(env, tod)
    temp = env.temp_night_c + lerp_int(
        0, 0, 100, env.temp_day_c - env.temp_night_c, shape
    )
    return EnvSample(
        sun_pct=min(max(shape, 0), 100),
        temp_c=temp,
        traffic=_traffic_at(env, t, lamp_count, node_index),
    )
