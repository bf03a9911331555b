"""Network front of the control room: node stream socket plus HTTP API.

Node side: plain TCP, one wire-protocol frame per line, full duplex
(commands go back down the same connection). Operator side: a JSON HTTP
API plus a server-sent-event stream of snapshot deltas and fault
alerts, and optional static serving of the admin panel.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import queue
import socketserver
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from ..protocol import Telemetry, Fault, Ack
from .service import ControlRoom, InvalidRange, UnknownNode

log = logging.getLogger(__name__)

SSE_KEEPALIVE_S = 15.0


class NodeConnectionHandler(socketserver.StreamRequestHandler):
    """One node (or replay) connection feeding the ingest loop."""

    def handle(self) -> None:
        room: ControlRoom = self.server.room  # type: ignore[attr-defined]
        write_lock = threading.Lock()
        registered: list[str] = []

        def send(line: str) -> None:
            with write_lock:
                self.wfile.write(line.encode("utf-8"))
                self.wfile.flush()

        try:
            for raw in self.rfile:
                msg = room.ingest_line(raw.decode("utf-8", errors="replace"))
                if msg is not None and isinstance(msg, (Telemetry, Fault, Ack)):
                    if msg.node_id not in registered:
                        room.register_sender(msg.node_id, send)
                        registered.append(msg.node_id)
        except (ConnectionError, OSError):
            pass
        finally:
            for node_id in registered:
                room.unregister_sender(node_id, send)


class NodeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, room: ControlRoom):
        super().__init__(addr, NodeConnectionHandler)
        self.room = room


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def room(self) -> ControlRoom:
        return self.server.room  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # quiet by default
        log.debug("http: " + fmt, *args)

    # -- helpers -----------------------------------------------------------

    def _json(self, obj, status: int = 200) -> None:
        body = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._json({"error": message}, status=status)

    def _query(self) -> dict[str, str]:
        return {k: v[-1] for k, v in parse_qs(urlparse(self.path).query).items()}

    # -- routes ------------------------------------------------------------

    def do_GET(self) -> None:
        path = urlparse(self.path).path
        try:
            if path == "/api/snapshot":
                body = self.room.snapshot_json()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(body)
            elif path == "/api/log":
                self._get_log()
            elif path == "/api/faults":
                params = self._query()
                open_only = params.get("open", "").lower() in ("1", "true", "yes")
                self._json({"faults": self.room.faults(open_only=open_only)})
            elif path == "/api/energy":
                self._get_energy()
            elif path == "/api/audits":
                self._json({"audits": self.room.audits()})
            elif path == "/api/stats":
                self._json(self.room.stats())
            elif path == "/api/stream":
                self._stream()
            else:
                self._static(path)
        except InvalidRange as exc:
            self._error(400, str(exc))
        except BrokenPipeError:
            pass

    def _get_log(self) -> None:
        params = self._query()
        try:
            t1 = int(params.get("from", 0))
            t2 = int(params.get("to", 2**62))
            offset = int(params.get("offset", 0))
            limit = int(params["limit"]) if "limit" in params else None
        except ValueError:
            self._error(400, "from/to/offset/limit must be integers")
            return
        kinds = None
        if params.get("kinds"):
            kinds = {k.strip() for k in params["kinds"].split(",") if k.strip()}
        rows, total = self.room.query_log(
            params.get("node"), t1, t2, kinds, offset=offset, limit=limit
        )
        self._json({"rows": rows, "total": total, "offset": offset})

    def _get_energy(self) -> None:
        params = self._query()
        try:
            t1 = int(params["from"])
            t2 = int(params["to"])
        except (KeyError, ValueError):
            self._error(400, "energy needs integer from/to")
            return
        tariff = params.get("tariff", "7.70")
        try:
            report = self.room.energy(t1, t2, tariff)
        except (ArithmeticError, ValueError) as exc:
            if isinstance(exc, InvalidRange):
                raise
            self._error(400, f"bad tariff: {tariff!r}")
            return
        self._json(report)

    def _stream(self) -> None:
        q = self.room.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(b": connected\n\n")
            self.wfile.flush()
            while True:
                try:
                    event = q.get(timeout=SSE_KEEPALIVE_S)
                except queue.Empty:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                name = event.get("event", "message")
                data = json.dumps(event, sort_keys=True, separators=(",", ":"))
                self.wfile.write(f"event: {name}\ndata: {data}\n\n".encode())
                self.wfile.flush()
        except (ConnectionError, OSError):
            pass
        finally:
            self.room.unsubscribe(q)

    def _static(self, path: str) -> None:
        panel_dir: Optional[Path] = self.server.panel_dir  # type: ignore[attr-defined]
        if panel_dir is None:
            if path == "/":
                self._json({"service": "lampfleet control room", "api": [
                    "/api/snapshot", "/api/log", "/api/faults", "/api/command",
                    "/api/energy", "/api/stream"]})
            else:
                self._error(404, f"no such path {path}")
            return
        rel = path.lstrip("/") or "index.html"
        target = (panel_dir / rel).resolve()
        try:
            target.relative_to(panel_dir.resolve())
        except ValueError:
            self._error(404, "bad path")
            return
        if not target.is_file():
            self._error(404, f"no such file {rel}")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:
        path = urlparse(self.path).path
        if path != "/api/command":
            self._error(404, f"no such path {path}")
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            self._error(400, "body must be JSON")
            return
        try:
            lamp = payload.get("lamp", "ALL")
            if lamp != "ALL":
                lamp = int(lamp)
            state = payload.get("state")
            audit = self.room.issue_command(
                node_id=str(payload["node"]),
                lamp=lamp,
                action=str(payload.get("action", "set_override")),
                state_on=None if state is None else state == "on",
                brightness=payload.get("brightness"),
                expiry_s=payload.get("expiry_s"),
                issuer=str(payload.get("issuer", "api")),
            )
        except UnknownNode as exc:
            self._error(404, f"unknown node {exc.args[0]}")
            return
        except (KeyError, TypeError, ValueError) as exc:
            self._error(400, f"bad command: {exc}")
            return
        self._json({"audit": audit})


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, addr, room: ControlRoom, panel_dir: Optional[Path] = None):
        super().__init__(addr, ApiHandler)
        self.room = room
        self.panel_dir = panel_dir


class ControlRoomServer:
    """Owns the room plus both listeners; start() returns once bound."""

    def __init__(
        self,
        data_dir,
        node_listen: tuple[str, int] = ("127.0.0.1", 0),
        http_listen: tuple[str, int] = ("127.0.0.1", 0),
        panel_dir: Optional[Path] = None,
        ack_timeout: float = 5.0,
    ):
        self.room = ControlRoom(data_dir, ack_timeout=ack_timeout)
        self.node_server = NodeServer(node_listen, self.room)
        self.http_server = ApiServer(http_listen, self.room, panel_dir)
        self._threads: list[threading.Thread] = []

    @property
    def node_address(self) -> tuple[str, int]:
        return self.node_server.server_address[:2]

    @property
    def http_address(self) -> tuple[str, int]:
        return self.http_server.server_address[:2]

    def start(self) -> None:
        for server, name in ((self.node_server, "nodes"), (self.http_server, "http")):
            thread = threading.Thread(target=server.serve_forever, daemon=True, name=f"serve-{name}")
            thread.start()
            self._threads.append(thread)
        log.info(
            "control room up: nodes on %s:%d, http on %s:%d",
            *self.node_address, *self.http_address,
        )

    def stop(self) -> None:
        self.node_server.shutdown()
        self.http_server.shutdown()
        self.node_server.server_close()
        self.http_server.server_close()
        for thread in self._threads:
            thread.join(timeout=5)
        self.room.close()
