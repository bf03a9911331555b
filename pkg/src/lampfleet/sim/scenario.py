"""Scenario files and the deterministic fleet simulation loop.

A scenario is a YAML document (key/value sections plus tables) fully
describing environment, controller tuning, node hardware and fault
injections. ``simulate`` is a pure function of the scenario: equal
scenarios, including the seed, produce byte-identical wire output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import yaml

from ..core import FAULT_LAMP_DARK, lamp_power_watts
from ..num import fraction_to_decimal_str
from ..protocol import Fault, Telemetry, TelemetryRow, encode_message, wall_label
from .controller import (
    EV_FAULT_CLEAR,
    EV_FAULT_OPEN,
    ControllerConfig,
    NodeState,
    SimEvent,
    clear_override,
    controller_step,
    set_override,
)
from .environment import (
    ConfigError,
    EnvironmentConfig,
    ScriptedEvent,
    TRAFFIC_SCRIPTED,
    env_sample,
)
from .sensors import FaultInjection, NodeConfig, sensor_emulate

DEFAULT_EPOCH = datetime(2022, 2, 13, 0, 0, 0)
EPOCH_FORMAT = "%d/%m/%Y %H:%M:%S"


@dataclass
class Scenario:
    name: str = "default"
    seed: int = 1
    duration_s: int = 24 * 3600
    report_every_s: int = 30
    node_count: int = 1
    epoch: datetime = DEFAULT_EPOCH
    env: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    node: NodeConfig = field(default_factory=NodeConfig)
    injections: tuple[FaultInjection, ...] = ()

    def node_id(self, index: int) -> str:
        return f"N{index + 1:02d}"

    @property
    def node_ids(self) -> list[str]:
        return [self.node_id(i) for i in range(self.node_count)]

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be > 0")
        if self.node_count < 1:
            raise ConfigError("node_count must be >= 1")
        self.controller.validate()
        tick = self.controller.tick_s
        if self.report_every_s < tick or self.report_every_s % tick != 0:
            raise ConfigError(
                f"report_every_s must be a positive multiple of tick_s "
                f"({self.report_every_s} vs {tick})"
            )
        self.env.rng_seed = self.seed
        self.env.validate()
        self.node.validate()
        for inj in self.injections:
            inj.validate(self.node.lamp_count, self.node_count)


# -- YAML loading -----------------------------------------------------------


def _section(data: dict, name: str, allowed: set[str]) -> dict:
    raw = data.get(name) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return raw


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from None
    return parse_scenario(text)


def parse_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad scenario YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("scenario file must be a mapping of sections")
    unknown = set(data) - {"scenario", "environment", "controller", "node", "injections"}
    if unknown:
        raise ConfigError(f"unknown top-level sections: {sorted(unknown)}")

    meta = _section(
        data, "scenario",
        {"name", "seed", "duration_s", "report_every_s", "node_count", "epoch"},
    )
    sc = Scenario(
        name=str(meta.get("name", "scenario")),
        seed=int(meta.get("seed", 1)),
        duration_s=int(meta.get("duration_s", 24 * 3600)),
        report_every_s=int(meta.get("report_every_s", 30)),
        node_count=int(meta.get("node_count", 1)),
    )
    if "epoch" in meta:
        try:
            sc.epoch = datetime.strptime(str(meta["epoch"]), EPOCH_FORMAT)
        except ValueError:
            raise ConfigError(
                f"bad epoch {meta['epoch']!r}, expected DD/MM/YYYY HH:MM:SS"
            ) from None

    env_raw = _section(
        data, "environment",
        {"sunrise_s", "sunset_s", "sun_points", "temp_day_c", "temp_night_c", "traffic"},
    )
    env = EnvironmentConfig()
    for key in ("sunrise_s", "sunset_s", "temp_day_c", "temp_night_c"):
        if key in env_raw:
            setattr(env, key, int(env_raw[key]))
    if "sun_points" in env_raw:
        env.sun_points = tuple((int(x), int(y)) for x, y in env_raw["sun_points"])
    traffic = env_raw.get("traffic") or {}
    if traffic:
        unknown = set(traffic) - {"model", "hourly_rate", "events"}
        if unknown:
            raise ConfigError(f"unknown keys in traffic: {sorted(unknown)}")
        env.traffic_model = str(traffic.get("model", env.traffic_model))
        if "hourly_rate" in traffic:
            env.hourly_rate = tuple(float(r) for r in traffic["hourly_rate"])
        if "events" in traffic:
            env.scripted_events = tuple(
                ScriptedEvent(start=int(e[0]), lamp=int(e[1]), duration=int(e[2]))
                for e in traffic["events"]
            )

    ctl_raw = _section(
        data, "controller",
        {
            "sun_on_threshold_pct", "sun_off_threshold_pct", "dim_level_pct",
            "boost_level_pct", "boost_hold_s", "fault_feedback_threshold_pct",
            "fault_debounce_ticks", "tick_s",
        },
    )
    controller = ControllerConfig(**{k: int(v) for k, v in ctl_raw.items()})

    node_raw = _section(
        data, "node",
        {
            "lamp_count", "rated_watts", "volts", "baseline_ma",
            "feedback_noise_pct", "ambient_bleed_pct", "ambient_jitter_pct",
            "amp_jitter_ma",
        },
    )
    node = NodeConfig()
    for key, value in node_raw.items():
        if key in ("rated_watts", "volts"):
            setattr(node, key, str(value))
        else:
            setattr(node, key, int(value))

    injections = []
    for raw in data.get("injections") or []:
        unknown = set(raw) - {"lamp", "kind", "start_s", "end_s", "node"}
        if unknown:
            raise ConfigError(f"unknown keys in injection: {sorted(unknown)}")
        try:
            injections.append(
                FaultInjection(
                    lamp=int(raw["lamp"]),
                    kind=str(raw["kind"]),
                    start=int(raw["start_s"]),
                    end=int(raw["end_s"]) if "end_s" in raw and raw["end_s"] is not None else None,
                    node_index=int(raw.get("node", 0)),
                )
            )
        except KeyError as exc:
            raise ConfigError(f"injection missing key {exc}") from None

    sc.env = env
    sc.controller = controller
    sc.node = node
    sc.injections = tuple(injections)
    sc.validate()
    return sc


def dump_scenario(sc: Scenario) -> str:
    doc = {
        "scenario": {
            "name": sc.name,
            "seed": sc.seed,
            "duration_s": sc.duration_s,
            "report_every_s": sc.report_every_s,
            "node_count": sc.node_count,
            "epoch": sc.epoch.strftime(EPOCH_FORMAT),
        },
        "environment": {
            "sunrise_s": sc.env.sunrise_s,
            "sunset_s": sc.env.sunset_s,
            "temp_day_c": sc.env.temp_day_c,
            "temp_night_c": sc.env.temp_night_c,
            "traffic": (
                {
                    "model": TRAFFIC_SCRIPTED,
                    "events": [[e.start, e.lamp, e.duration] for e in sc.env.scripted_events],
                }
                if sc.env.traffic_model == TRAFFIC_SCRIPTED
                else {"model": sc.env.traffic_model, "hourly_rate": list(sc.env.hourly_rate)}
            ),
        },
        "controller": {
            "sun_on_threshold_pct": sc.controller.sun_on_threshold_pct,
            "sun_off_threshold_pct": sc.controller.sun_off_threshold_pct,
            "dim_level_pct": sc.controller.dim_level_pct,
            "boost_level_pct": sc.controller.boost_level_pct,
            "boost_hold_s": sc.controller.boost_hold_s,
            "fault_feedback_threshold_pct": sc.controller.fault_feedback_threshold_pct,
            "fault_debounce_ticks": sc.controller.fault_debounce_ticks,
            "tick_s": sc.controller.tick_s,
        },
        "node": {
            "lamp_count": sc.node.lamp_count,
            "rated_watts": sc.node.rated_watts,
            "volts": sc.node.volts,
            "baseline_ma": sc.node.baseline_ma,
            "feedback_noise_pct": sc.node.feedback_noise_pct,
            "ambient_bleed_pct": sc.node.ambient_bleed_pct,
            "ambient_jitter_pct": sc.node.ambient_jitter_pct,
            "amp_jitter_ma": sc.node.amp_jitter_ma,
        },
        "injections": [
            {
                "lamp": inj.lamp,
                "kind": inj.kind,
                "start_s": inj.start,
                **({"end_s": inj.end} if inj.end is not None else {}),
                "node": inj.node_index,
            }
            for inj in sc.injections
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False)


# -- simulation loop ----------------------------------------------------------


class NodeRunner:
    """Steps one node through the control/sense loop and frames its
    wire messages. Shared by batch simulation and the live node client."""

    def __init__(self, sc: Scenario, index: int):
        self.sc = sc
        self.index = index
        self.node_id = sc.node_id(index)
        self.state = NodeState.initial(sc.node.lamp_count, sc.controller.dim_level_pct)
        self.injections = tuple(inj for inj in sc.injections if inj.node_index == index)
        self.frame = None  # latest SensorFrame
        self.tick_watts = Fraction(0)  # this tick's electrical power, exact
        self._tele_seq = 0
        self._fault_seq = 0
        self._ack_seq = 0
        self._rated_frac = Fraction(sc.node.rated_watts)

    def step(self, t: int) -> list[SimEvent]:
        env = env_sample(self.sc.env, t, self.sc.node.lamp_count, self.index)
        events = controller_step(self.sc.controller, self.state, env, t, self.node_id)
        self.frame, self.state.lamps = sensor_emulate(
            self.sc.node, self.node_id, self.index, t,
            self.state.lamps, env, self.injections, self.sc.seed,
        )
        self.tick_watts = sum(
            (lamp_power_watts(self._rated_frac, lamp) for lamp in self.state.lamps),
            Fraction(0),
        )
        return events

    def telemetry(self, t: int) -> Telemetry:
        self._tele_seq += 1
        date, time_label = wall_label(self.sc.epoch, t)
        frame = self.frame
        row = TelemetryRow(
            date=date,
            time=time_label,
            volt=frame.volts,
            amp=frame.amps,
            temp=frame.temp_c,
            sun=frame.sun_pct,
            lamps=frame.lamps,
        )
        ovr = self.state.override
        return Telemetry(
            seq=self._tele_seq,
            node_id=self.node_id,
            sim_time=t,
            rated_watts=self.sc.node.rated_watts,
            override_desc=ovr.desc() if ovr is not None else "-",
            row=row,
        )

    def fault_message(self, ev: SimEvent) -> Fault:
        self._fault_seq += 1
        return Fault(
            seq=self._fault_seq,
            node_id=self.node_id,
            sim_time=ev.t,
            lamp_index=ev.lamp,
            fault_kind=FAULT_LAMP_DARK,
            onset=ev.data["onset"],
            cleared=ev.data.get("cleared"),
        )

    def next_ack_seq(self) -> int:
        self._ack_seq += 1
        return self._ack_seq

    def apply_override(self, t, lamp, state_on, brightness, expiry_s) -> SimEvent:
        return set_override(self.state, t, self.node_id, lamp, state_on, brightness, expiry_s)

    def apply_clear(self, t) -> Optional[SimEvent]:
        return clear_override(self.state, t, self.node_id)


@dataclass
class SimResult:
    scenario: Scenario
    lines: list[str]  # wire frames in emission order
    frames: list[Telemetry]
    faults: list[Fault]
    events: list[SimEvent]
    energy_ws: Fraction

    @property
    def kwh(self) -> Fraction:
        return self.energy_ws / 3_600_000

    def summary(self) -> dict:
        opened = sum(1 for e in self.events if e.kind == EV_FAULT_OPEN)
        cleared = sum(1 for e in self.events if e.kind == EV_FAULT_CLEAR)
        return {
            "scenario": self.scenario.name,
            "nodes": self.scenario.node_count,
            "frames": len(self.frames),
            "faults_opened": opened,
            "faults_cleared": cleared,
            "kwh": fraction_to_decimal_str(self.kwh, max_places=6),
        }


def simulate(sc: Scenario) -> SimResult:
    """Run the scenario to completion; pure in the scenario contents."""
    sc.validate()
    runners = [NodeRunner(sc, i) for i in range(sc.node_count)]
    tick = sc.controller.tick_s
    lines: list[str] = []
    frames: list[Telemetry] = []
    faults: list[Fault] = []
    events: list[SimEvent] = []
    energy_ws = Fraction(0)
    for t in range(0, sc.duration_s, tick):
        for runner in runners:
            evs = runner.step(t)
            events.extend(evs)
            for ev in evs:
                if ev.kind in (EV_FAULT_OPEN, EV_FAULT_CLEAR):
                    msg = runner.fault_message(ev)
                    faults.append(msg)
                    lines.append(encode_message(msg))
            energy_ws += runner.tick_watts * tick
            if t % sc.report_every_s == 0:
                msg = runner.telemetry(t)
                frames.append(msg)
                lines.append(encode_message(msg))
    return SimResult(sc, lines, frames, faults, events, energy_ws)
