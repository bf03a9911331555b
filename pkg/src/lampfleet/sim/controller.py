"""Per-node control logic: day/night gating, traffic boost, fault watch.

Three concerns run in parallel each tick, mirroring the hardware
prototype: monitoring (the telemetry frame), error detection (feedback
vs command with a debounce), and light control (sunlight hysteresis
plus traffic-driven brightness).

Fault detection inspects the *previous* tick's measurements: the
controller reads its sensors at the top of the loop, then issues this
tick's commands. A lamp covered at tick t therefore opens its fault at
t + debounce * tick.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..core import FAULT_LAMP_DARK, FaultRecord, LampState, clamp_brightness
from .environment import ConfigError, EnvSample

MODE_DAY = "day"
MODE_NIGHT_DIM = "dim"
MODE_NIGHT_BOOST = "boost"

EV_NIGHT_BEGIN = "night_begin"
EV_NIGHT_END = "night_end"
EV_BOOST_START = "boost_start"
EV_BOOST_END = "boost_end"
EV_FAULT_OPEN = "fault_open"
EV_FAULT_CLEAR = "fault_clear"
EV_OVERRIDE_SET = "override_set"
EV_OVERRIDE_CLEARED = "override_cleared"
EV_OVERRIDE_EXPIRED = "override_expired"


@dataclass
class ControllerConfig:
    sun_on_threshold_pct: int = 40
    sun_off_threshold_pct: int = 55
    dim_level_pct: int = 50
    boost_level_pct: int = 100
    boost_hold_s: int = 30
    fault_feedback_threshold_pct: int = 15
    fault_debounce_ticks: int = 3
    tick_s: int = 1

    def validate(self) -> None:
        if not self.sun_on_threshold_pct < self.sun_off_threshold_pct:
            raise ConfigError(
                "sun_on_threshold_pct must be below sun_off_threshold_pct "
                f"({self.sun_on_threshold_pct} >= {self.sun_off_threshold_pct})"
            )
        if not 0 < self.dim_level_pct <= self.boost_level_pct <= 100:
            raise ConfigError(
                f"need 0 < dim <= boost <= 100, got {self.dim_level_pct}/{self.boost_level_pct}"
            )
        if self.boost_hold_s < 0:
            raise ConfigError("boost_hold_s must be >= 0")
        if self.fault_debounce_ticks < 1:
            raise ConfigError("fault_debounce_ticks must be >= 1")
        if self.tick_s < 1:
            raise ConfigError("tick_s must be >= 1")
        if not 0 <= self.fault_feedback_threshold_pct <= 100:
            raise ConfigError("fault_feedback_threshold_pct must be in 0..100")


@dataclass(frozen=True)
class Override:
    """Operator-forced lamp state with a mandatory expiry."""

    lamp: Union[int, str]  # 0-based index or "ALL"
    state_on: bool
    brightness: int
    expiry_t: int

    def covers(self, lamp_index: int) -> bool:
        return self.lamp == "ALL" or self.lamp == lamp_index

    def desc(self) -> str:
        state = "on" if self.state_on else "off"
        return f"{self.lamp}:{state}:{self.brightness}:{self.expiry_t}"


@dataclass
class LampAuto:
    """Automatic-control bookkeeping for a single lamp."""

    mode: str = MODE_DAY
    boost_deadline: int = 0  # last traffic detection + hold
    dark_streak: int = 0
    open_fault: Optional[FaultRecord] = None
    burned_out: bool = False  # injected hardware failure flag


@dataclass
class NodeState:
    lamps: list[LampState]
    auto: list[LampAuto]
    night_active: bool = False
    override: Optional[Override] = None

    @classmethod
    def initial(cls, lamp_count: int, dim_level_pct: int = 50) -> "NodeState":
        return cls(
            lamps=[LampState(False, dim_level_pct, 0) for _ in range(lamp_count)],
            auto=[LampAuto() for _ in range(lamp_count)],
        )


@dataclass(frozen=True)
class SimEvent:
    t: int
    node_id: str
    kind: str
    lamp: Optional[int] = None
    data: dict = field(default_factory=dict)


def detect_fault(
    cfg: ControllerConfig, lamp: LampState, streak: int, fault_open: bool = False
) -> tuple[int, Optional[str]]:
    """Advance the dark-lamp debounce for one sample.

    Returns the new streak and "open"/"clear"/None. A fault opens
    exactly when the streak reaches the debounce count with no fault
    already open; it clears on the first non-qualifying sample.
    """
    qualifies = lamp.commanded and lamp.feedback_pct < cfg.fault_feedback_threshold_pct
    if qualifies:
        streak += 1
        if streak == cfg.fault_debounce_ticks and not fault_open:
            return streak, "open"
        return streak, None
    if fault_open:
        return 0, "clear"
    return 0, None


def controller_step(
    cfg: ControllerConfig,
    st: NodeState,
    env: EnvSample,
    t: int,
    node_id: str = "N01",
) -> list[SimEvent]:
    """Run one control tick; updates ``st`` in place (commands land in
    ``st.lamps``) and returns the events this tick emitted."""
    events: list[SimEvent] = []

    # -- error detection on last tick's measurements -----------------------
    for i, (lamp, auto) in enumerate(zip(st.lamps, st.auto)):
        streak, change = detect_fault(cfg, lamp, auto.dark_streak, auto.open_fault is not None)
        auto.dark_streak = streak
        if change == "open":
            auto.open_fault = FaultRecord(node_id, i, FAULT_LAMP_DARK, onset=t)
            events.append(
                SimEvent(t, node_id, EV_FAULT_OPEN, lamp=i, data={"onset": t})
            )
        elif change == "clear":
            rec = auto.open_fault
            rec.cleared = t
            auto.open_fault = None
            events.append(
                SimEvent(
                    t, node_id, EV_FAULT_CLEAR, lamp=i,
                    data={"onset": rec.onset, "cleared": t},
                )
            )

    # -- override expiry ----------------------------------------------------
    if st.override is not None and t >= st.override.expiry_t:
        events.append(
            SimEvent(t, node_id, EV_OVERRIDE_EXPIRED, data={"desc": st.override.desc()})
        )
        st.override = None

    # -- sunlight hysteresis -------------------------------------------------
    was_night = st.night_active
    if env.sun_pct < cfg.sun_on_threshold_pct:
        st.night_active = True
    elif env.sun_pct > cfg.sun_off_threshold_pct:
        st.night_active = False
    if st.night_active != was_night:
        events.append(
            SimEvent(
                t,
                node_id,
                EV_NIGHT_BEGIN if st.night_active else EV_NIGHT_END,
                data={"sun_pct": env.sun_pct},
            )
        )

    # -- per-lamp light control ----------------------------------------------
    for i, auto in enumerate(st.auto):
        if env.traffic[i]:
            # traffic memory is kept even during the day so a detection
            # just before nightfall still boosts at turn-on
            auto.boost_deadline = t + cfg.boost_hold_s

        if not st.night_active:
            mode = MODE_DAY
        elif env.traffic[i] or t < auto.boost_deadline:
            mode = MODE_NIGHT_BOOST
        else:
            mode = MODE_NIGHT_DIM

        if mode != auto.mode:
            if mode == MODE_NIGHT_BOOST:
                events.append(SimEvent(t, node_id, EV_BOOST_START, lamp=i))
            elif auto.mode == MODE_NIGHT_BOOST:
                events.append(SimEvent(t, node_id, EV_BOOST_END, lamp=i))
            auto.mode = mode

        if mode == MODE_DAY:
            st.lamps[i] = st.lamps[i].with_command(False)
        elif mode == MODE_NIGHT_BOOST:
            st.lamps[i] = st.lamps[i].with_command(True, cfg.boost_level_pct)
        else:
            st.lamps[i] = st.lamps[i].with_command(True, cfg.dim_level_pct)

        ovr = st.override
        if ovr is not None and ovr.covers(i):
            st.lamps[i] = st.lamps[i].with_command(ovr.state_on, ovr.brightness)

    return events


def set_override(
    st: NodeState,
    t: int,
    node_id: str,
    lamp: Union[int, str],
    state_on: bool,
    brightness: int,
    expiry_s: int,
) -> SimEvent:
    if expiry_s <= 0:
        raise ValueError("override expiry must be positive")
    ovr = Override(lamp, state_on, clamp_brightness(brightness), t + expiry_s)
    st.override = ovr
    return SimEvent(t, node_id, EV_OVERRIDE_SET, data={"desc": ovr.desc()})


def clear_override(st: NodeState, t: int, node_id: str) -> Optional[SimEvent]:
    if st.override is None:
        return None
    desc = st.override.desc()
    st.override = None
    return SimEvent(t, node_id, EV_OVERRIDE_CLEARED, data={"desc": desc})
