"""Live simulated node: runs the control loop against a real control
room over the node socket, full duplex.

Frames go out exactly as the batch simulator would emit them, so a
command-free live run and a replay of the matching dump are
indistinguishable to the room. Operator commands arriving on the same
socket are applied at the next tick boundary and acknowledged.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time

from ..protocol import (
    ACTION_CLEAR_OVERRIDE,
    ACTION_REQUEST_SNAPSHOT,
    ACTION_SET_OVERRIDE,
    Ack,
    Command,
    ProtocolError,
    decode_message,
    encode_message,
)
from .controller import EV_FAULT_CLEAR, EV_FAULT_OPEN
from .scenario import NodeRunner, Scenario

log = logging.getLogger(__name__)


class LiveNode:
    """One scenario node streaming to a control room.

    ``speed`` scales virtual against wall time (ticks per second is
    speed / tick_s); 0 means free-running, as fast as possible.
    """

    def __init__(self, sc: Scenario, index: int, host: str, port: int, speed: float = 0.0):
        self.sc = sc
        self.runner = NodeRunner(sc, index)
        self.host = host
        self.port = port
        self.speed = speed
        self._commands: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._sock: socket.socket | None = None

    def stop(self) -> None:
        self._stop.set()

    def run(self) -> None:
        sock = socket.create_connection((self.host, self.port))
        self._sock = sock
        reader = threading.Thread(target=self._read_commands, args=(sock,), daemon=True)
        reader.start()
        try:
            self._loop(sock)
        finally:
            self._stop.set()
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()

    def _read_commands(self, sock: socket.socket) -> None:
        try:
            with sock.makefile("r", encoding="utf-8", newline="\n") as rfile:
                for line in rfile:
                    try:
                        msg = decode_message(line)
                    except ProtocolError as exc:
                        log.debug("node %s ignoring bad line: %s", self.runner.node_id, exc)
                        continue
                    if isinstance(msg, Command) and msg.node_id == self.runner.node_id:
                        self._commands.put(msg)
        except OSError:
            pass

    def _send(self, sock: socket.socket, line: str) -> None:
        sock.sendall(line.encode("utf-8") + b"\n")

    def _loop(self, sock: socket.socket) -> None:
        sc = self.sc
        tick = sc.controller.tick_s
        for t in range(0, sc.duration_s, tick):
            if self._stop.is_set():
                return
            force_frame = self._apply_commands(sock, t)
            events = self.runner.step(t)
            for ev in events:
                if ev.kind in (EV_FAULT_OPEN, EV_FAULT_CLEAR):
                    self._send(sock, encode_message(self.runner.fault_message(ev)))
            if t % sc.report_every_s == 0 or force_frame:
                self._send(sock, encode_message(self.runner.telemetry(t)))
            if self.speed > 0:
                time.sleep(tick / self.speed)

    def _apply_commands(self, sock: socket.socket, t: int) -> bool:
        force_frame = False
        while True:
            try:
                cmd = self._commands.get_nowait()
            except queue.Empty:
                return force_frame
            status = "ok"
            if cmd.action == ACTION_SET_OVERRIDE:
                if cmd.state_on is None or cmd.brightness is None or cmd.expiry_s is None:
                    status = "error: set_override needs state, brightness, expiry"
                elif isinstance(cmd.lamp, int) and not 0 <= cmd.lamp < self.sc.node.lamp_count:
                    status = f"error: no lamp {cmd.lamp}"
                else:
                    self.runner.apply_override(
                        t, cmd.lamp, cmd.state_on, cmd.brightness, cmd.expiry_s
                    )
            elif cmd.action == ACTION_CLEAR_OVERRIDE:
                self.runner.apply_clear(t)
            elif cmd.action == ACTION_REQUEST_SNAPSHOT:
                force_frame = True
            else:
                status = f"error: unsupported action {cmd.action}"
            ack = Ack(
                seq=self.runner.next_ack_seq(),
                node_id=self.runner.node_id,
                ack_seq=cmd.seq,
                status=status,
            )
            self._send(sock, encode_message(ack))


def run_fleet(sc: Scenario, host: str, port: int, speed: float = 0.0) -> list[LiveNode]:
    """Start every scenario node on its own thread; returns the nodes
    (threads are daemons, use node.stop() to end early)."""
    nodes = []
    for index in range(sc.node_count):
        node = LiveNode(sc, index, host, port, speed)
        thread = threading.Thread(target=node.run, daemon=True, name=f"node-{node.runner.node_id}")
        thread.start()
        node.thread = thread
        nodes.append(node)
    return nodes
