"""Deterministic streetlight node simulation."""

from .controller import ControllerConfig, NodeState, SimEvent, controller_step, detect_fault
from .environment import ConfigError, EnvironmentConfig, EnvSample, ScriptedEvent, env_sample
from .node_client import LiveNode, run_fleet
from .scenario import (
    NodeRunner,
    Scenario,
    SimResult,
    dump_scenario,
    load_scenario,
    parse_scenario,
    simulate,
)
from .sensors import FaultInjection, NodeConfig, sensor_emulate

__all__ = [
    "ConfigError",
    "ControllerConfig",
    "EnvSample",
    "EnvironmentConfig",
    "FaultInjection",
    "LiveNode",
    "NodeConfig",
    "NodeRunner",
    "NodeState",
    "Scenario",
    "ScriptedEvent",
    "SimEvent",
    "SimResult",
    "controller_step",
    "detect_fault",
    "dump_scenario",
    "env_sample",
    "load_scenario",
    "parse_scenario",
    "run_fleet",
    "sensor_emulate",
    "simulate",
]
