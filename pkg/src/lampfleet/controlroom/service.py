"""Control-room state machine: ingest, live snapshot, commands, alerts.

All mutations are serialized under one lock; readers get plain dicts
built under that lock, so any visible snapshot corresponds to a prefix
of the ingest stream. Ingest never raises on bad input: malformed
frames are counted and dropped, duplicates are counted and ignored.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Union

from ..num import fraction_to_decimal_str
from ..protocol import (
    ACTION_CLEAR_OVERRIDE,
    ACTION_REQUEST_SNAPSHOT,
    ACTION_SET_OVERRIDE,
    Ack,
    Command,
    Fault,
    ProtocolError,
    Telemetry,
    decode_message,
    encode_message,
)
from .store import InvalidRange, LogStore, frame_power_watts

log = logging.getLogger(__name__)

LOG_FILENAME = "telemetry.log"


class UnknownNode(KeyError):
    """Command targeted a node the room has never heard of."""


@dataclass
class _NodeView:
    node_id: str
    last: Optional[Telemetry] = None
    frames: int = 0
    duplicates: int = 0
    gaps: int = 0


@dataclass
class _Pending:
    done: threading.Event = field(default_factory=threading.Event)
    status: Optional[str] = None


class ControlRoom:
    """Ingests node frames, keeps fleet state, dispatches commands."""

    def __init__(self, data_dir: Optional[Union[str, Path]], ack_timeout: float = 5.0):
        self.ack_timeout = ack_timeout
        self._lock = threading.RLock()
        self._nodes: dict[str, _NodeView] = {}
        self._last_seq: dict[tuple[str, str], int] = {}
        self._open_faults: dict[tuple[str, int, str], dict] = {}
        self._fault_history: list[dict] = []
        self._malformed = 0
        self._senders: dict[str, Callable[[str], None]] = {}
        self._pending: dict[int, _Pending] = {}
        self._cmd_seq = 0
        self._audits: list[dict] = []
        self._subs: list[queue.Queue] = []

        path = Path(data_dir) / LOG_FILENAME if data_dir is not None else None
        self.store = LogStore(path)
        for line in self.store.existing_lines():
            self._ingest(line, persist=False)
        self.store.open_append()

    def close(self) -> None:
        self.store.close()

    # -- ingest --------------------------------------------------------------

    def ingest_line(self, raw: str):
        """Ingest one frame line. Returns the decoded message, or None
        if the frame was malformed or a duplicate."""
        return self._ingest(raw, persist=True)

    def _ingest(self, raw: str, persist: bool):
        raw = raw.rstrip("\r\n")
        if not raw:
            return None
        with self._lock:
            try:
                msg = decode_message(raw)
            except ProtocolError as exc:
                self._malformed += 1
                log.debug("dropped malformed frame: %s", exc)
                return None

            if msg.kind != "command":
                key = (msg.node_id, msg.kind)
                last = self._last_seq.get(key)
                if last is not None and msg.seq <= last:
                    view = self._nodes.get(msg.node_id)
                    if view is not None:
                        view.duplicates += 1
                    return None
                if last is not None and msg.seq > last + 1:
                    self._record_gap(msg, last)
                self._last_seq[key] = msg.seq

            # persist before any state reflects the frame
            if persist:
                self.store.persist(raw)
            self._apply(msg)
            return msg

    def _record_gap(self, msg, last_seq: int) -> None:
        view = self._view(msg.node_id)
        missed = msg.seq - last_seq - 1
        view.gaps += missed
        t = msg.sim_time if hasattr(msg, "sim_time") else self._max_t()
        self.store.index_record(
            t,
            {
                "kind": "gap",
                "node": msg.node_id,
                "t": t,
                "stream": msg.kind,
                "after_seq": last_seq,
                "got_seq": msg.seq,
                "missed": missed,
            },
        )
        self._publish({"event": "gap", "node": msg.node_id, "missed": missed})

    def _view(self, node_id: str) -> _NodeView:
        view = self._nodes.get(node_id)
        if view is None:
            view = _NodeView(node_id)
            self._nodes[node_id] = view
        return view

    def _apply(self, msg) -> None:
        if isinstance(msg, Telemetry):
            self._apply_telemetry(msg)
        elif isinstance(msg, Fault):
            self._apply_fault(msg)
        elif isinstance(msg, Ack):
            self._apply_ack(msg)
        elif isinstance(msg, Command):
            # room-originated, replayed from the log: index only
            self.store.index_record(self._max_t(), self._command_record(msg))

    def _apply_telemetry(self, msg: Telemetry) -> None:
        view = self._view(msg.node_id)
        prev = view.last
        view.last = msg
        view.frames += 1
        self.store.index_telemetry(msg)
        self.store.index_record(
            msg.sim_time,
            {
                "kind": "telemetry",
                "node": msg.node_id,
                "t": msg.sim_time,
                "seq": msg.seq,
                "date": msg.row.date,
                "time": msg.row.time,
                "volt": msg.row.volt,
                "amp": msg.row.amp,
                "temp": msg.row.temp,
                "sun": msg.row.sun,
                "lamps": [[c.state_bit, c.level] for c in msg.row.lamps],
            },
        )
        if prev is not None and len(prev.row.lamps) == len(msg.row.lamps):
            for i, (a, b) in enumerate(zip(prev.row.lamps, msg.row.lamps)):
                if a.state_bit != b.state_bit:
                    what = "lamp_on" if b.state_bit == 1 else "lamp_off"
                    self.store.index_record(
                        msg.sim_time,
                        {
                            "kind": "transition",
                            "node": msg.node_id,
                            "t": msg.sim_time,
                            "lamp": i,
                            "what": what,
                        },
                    )
        self._publish(
            {
                "event": "frame",
                "node": msg.node_id,
                "t": msg.sim_time,
                "sun": msg.row.sun,
                "volt": msg.row.volt,
                "amp": msg.row.amp,
                "temp": msg.row.temp,
                "lamps": [[c.state_bit, c.level] for c in msg.row.lamps],
                "override": None if msg.override_desc == "-" else msg.override_desc,
            }
        )

    def _apply_fault(self, msg: Fault) -> None:
        self._view(msg.node_id)
        key = (msg.node_id, msg.lamp_index, msg.fault_kind)
        record = {
            "kind": "fault",
            "node": msg.node_id,
            "t": msg.sim_time,
            "lamp": msg.lamp_index,
            "fault_kind": msg.fault_kind,
            "onset": msg.onset,
            "cleared": msg.cleared,
        }
        self.store.index_record(msg.sim_time, record)
        self._fault_history.append(record)
        if msg.cleared is None:
            self._open_faults[key] = record
            self._publish(
                {"event": "fault_open", "node": msg.node_id, "lamp": msg.lamp_index,
                 "fault_kind": msg.fault_kind, "onset": msg.onset}
            )
        else:
            self._open_faults.pop(key, None)
            self._publish(
                {"event": "fault_clear", "node": msg.node_id, "lamp": msg.lamp_index,
                 "fault_kind": msg.fault_kind, "onset": msg.onset, "cleared": msg.cleared}
            )

    def _apply_ack(self, msg: Ack) -> None:
        t = self._max_t()
        self.store.index_record(
            t,
            {
                "kind": "ack",
                "node": msg.node_id,
                "t": t,
                "ack_seq": msg.ack_seq,
                "status": msg.status,
            },
        )
        pending = self._pending.get(msg.ack_seq)
        if pending is not None:
            pending.status = msg.status
            pending.done.set()
        self._publish(
            {"event": "ack", "node": msg.node_id, "seq": msg.ack_seq, "status": msg.status}
        )

    def _max_t(self) -> int:
        times = [v.last.sim_time for v in self._nodes.values() if v.last is not None]
        return max(times) if times else 0

    # -- snapshot --------------------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            nodes = {}
            total_watts = Fraction(0)
            frames = 0
            gaps = 0
            for node_id in sorted(self._nodes):
                view = self._nodes[node_id]
                frames += view.frames
                gaps += view.gaps
                open_faults = sorted(
                    (
                        {"lamp": r["lamp"], "fault_kind": r["fault_kind"], "onset": r["onset"]}
                        for (n, _, _), r in self._open_faults.items()
                        if n == node_id
                    ),
                    key=lambda r: (r["lamp"], r["fault_kind"]),
                )
                faulted = {r["lamp"] for r in open_faults}
                entry: dict = {
                    "frames": view.frames,
                    "gaps": view.gaps,
                    "open_faults": open_faults,
                }
                msg = view.last
                if msg is not None:
                    total_watts += frame_power_watts(msg)
                    entry["last"] = {
                        "t": msg.sim_time,
                        "seq": msg.seq,
                        "date": msg.row.date,
                        "time": msg.row.time,
                        "volt": msg.row.volt,
                        "amp": msg.row.amp,
                        "temp": msg.row.temp,
                        "sun": msg.row.sun,
                    }
                    entry["rated_watts"] = msg.rated_watts
                    entry["lamps"] = [
                        {"state": c.state_bit, "level": c.level, "fault": i in faulted}
                        for i, c in enumerate(msg.row.lamps)
                    ]
                    entry["override"] = (
                        None if msg.override_desc == "-" else msg.override_desc
                    )
                nodes[node_id] = entry
            times = [v.last.sim_time for v in self._nodes.values() if v.last is not None]
            # session counters (duplicates, malformed) live in stats():
            # they are observations about this process, not log-derived
            # state, and must not break replay/restart snapshot identity
            return {
                "snapshot_time": max(times) if times else None,
                "aggregate": {
                    "total_watts": fraction_to_decimal_str(total_watts),
                    "frames": frames,
                    "gaps": gaps,
                    "open_faults": len(self._open_faults),
                },
                "nodes": nodes,
            }

    def stats(self) -> dict:
        with self._lock:
            return {
                "duplicates": sum(v.duplicates for v in self._nodes.values()),
                "malformed": self._malformed,
            }

    def snapshot_json(self) -> bytes:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":")).encode()

    # -- queries ----------------------------------------------------------------

    def query_log(
        self,
        node: Optional[str],
        t1: int,
        t2: int,
        kinds: Optional[set[str]] = None,
        offset: int = 0,
        limit: Optional[int] = None,
    ) -> tuple[list[dict], int]:
        with self._lock:
            return self.store.query(node, t1, t2, kinds, offset=offset, limit=limit)

    def faults(self, open_only: bool = False) -> list[dict]:
        with self._lock:
            if open_only:
                return sorted(
                    self._open_faults.values(),
                    key=lambda r: (r["node"], r["lamp"], r["onset"]),
                )
            return list(self._fault_history)

    def energy(self, t1: int, t2: int, tariff) -> dict:
        with self._lock:
            return self.store.energy(t1, t2, tariff)

    def audits(self) -> list[dict]:
        with self._lock:
            return [dict(a) for a in self._audits]

    # -- commands -----------------------------------------------------------------

    def register_sender(self, node_id: str, send: Callable[[str], None]) -> None:
        with self._lock:
            self._senders[node_id] = send

    def unregister_sender(self, node_id: str, send: Callable[[str], None]) -> None:
        with self._lock:
            if self._senders.get(node_id) is send:
                del self._senders[node_id]

    def issue_command(
        self,
        node_id: str,
        lamp: Union[int, str],
        action: str,
        state_on: Optional[bool] = None,
        brightness: Optional[int] = None,
        expiry_s: Optional[int] = None,
        issuer: str = "api",
        timeout: Optional[float] = None,
    ) -> dict:
        """Frame, log and dispatch a command, then wait for the ack.

        The returned audit entry records acked / timed-out; the fleet
        snapshot only reflects an override once the node's next frame
        confirms it.
        """
        if action == ACTION_SET_OVERRIDE:
            if state_on is None or brightness is None or expiry_s is None:
                raise ValueError("set_override needs state, brightness and expiry_s")
            if not 0 <= brightness <= 100:
                raise ValueError(f"brightness out of range: {brightness}")
            if expiry_s <= 0:
                raise ValueError(f"expiry_s must be positive: {expiry_s}")
        elif action not in (ACTION_CLEAR_OVERRIDE, ACTION_REQUEST_SNAPSHOT):
            raise ValueError(f"unknown action {action!r}")

        with self._lock:
            if node_id not in self._nodes and node_id not in self._senders:
                raise UnknownNode(node_id)
            self._cmd_seq += 1
            msg = Command(
                seq=self._cmd_seq,
                node_id=node_id,
                lamp=lamp,
                action=action,
                state_on=state_on,
                brightness=brightness,
                expiry_s=expiry_s,
            )
            line = encode_message(msg)
            audit = {
                "seq": msg.seq,
                "issuer": issuer,
                "received": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "command": self._command_fields(msg),
                "result": "pending",
            }
            self._audits.append(audit)
            self.store.persist(line)
            self.store.index_record(self._max_t(), self._command_record(msg))
            pending = _Pending()
            self._pending[msg.seq] = pending
            sender = self._senders.get(node_id)
        self._publish({"event": "command", "node": node_id, "seq": msg.seq})

        delivered = False
        if sender is not None:
            try:
                sender(line + "\n")
                delivered = True
            except OSError as exc:
                log.warning("send to %s failed: %s", node_id, exc)

        wait = self.ack_timeout if timeout is None else timeout
        got_ack = pending.done.wait(wait) if delivered else False
        with self._lock:
            self._pending.pop(msg.seq, None)
            if got_ack and pending.status is not None and pending.status.startswith("ok"):
                audit["result"] = "acked"
            elif got_ack:
                audit["result"] = f"rejected:{pending.status}"
            else:
                audit["result"] = "timed_out"
            outcome = dict(audit)
        self._publish({"event": "audit", "seq": msg.seq, "result": outcome["result"]})
        return outcome

    @staticmethod
    def _command_fields(msg: Command) -> dict:
        return {
            "node": msg.node_id,
            "lamp": msg.lamp,
            "action": msg.action,
            "state": None if msg.state_on is None else ("on" if msg.state_on else "off"),
            "brightness": msg.brightness,
            "expiry_s": msg.expiry_s,
        }

    def _command_record(self, msg: Command) -> dict:
        rec = {"kind": "command", "t": self._max_t(), "seq": msg.seq}
        rec.update(self._command_fields(msg))
        return rec

    # -- event stream ----------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subs.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subs:
                self._subs.remove(q)

    def _publish(self, event: dict) -> None:
        for q in list(self._subs):
            q.put(event)


__all__ = ["ControlRoom", "UnknownNode", "InvalidRange"]
