"""Control-room service: ingest, log, snapshot, commands, HTTP API."""

from .service import ControlRoom, UnknownNode
from .store import InvalidRange, LogStore, frame_power_watts
from .server import ControlRoomServer

__all__ = [
    "ControlRoom",
    "ControlRoomServer",
    "InvalidRange",
    "LogStore",
    "UnknownNode",
    "frame_power_watts",
]
