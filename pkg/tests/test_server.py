"""End-to-end server tests: node socket, HTTP API, SSE, live overrides."""

import json
import socket
import threading
import time

import httpx
import pytest

from lampfleet.controlroom import ControlRoomServer
from lampfleet.sim import ControllerConfig, EnvironmentConfig, LiveNode, Scenario
from lampfleet.sim.environment import TRAFFIC_SCRIPTED

from .conftest import rows_to_stream


@pytest.fixture
def server(tmp_path):
    srv = ControlRoomServer(tmp_path / "data", ack_timeout=3.0)
    srv.start()
    yield srv
    srv.stop()


def api(srv) -> str:
    host, port = srv.http_address
    return f"http://{host}:{port}"


def push_lines(srv, lines):
    host, port = srv.node_address
    with socket.create_connection((host, port)) as sock:
        for line in lines:
            sock.sendall(line.encode() + b"\n")
        sock.shutdown(socket.SHUT_WR)
        sock.recv(16)  # wait for orderly close so ingest finished


def wait_for(predicate, timeout=5.0, interval=0.02):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(interval)
    raise AssertionError("condition not met in time")


def night_scenario(duration=4000, report_every=2):
    return Scenario(
        name="live",
        seed=2,
        duration_s=duration,
        report_every_s=report_every,
        env=EnvironmentConfig(
            sun_points=((0, 0),), traffic_model=TRAFFIC_SCRIPTED, scripted_events=()
        ),
        controller=ControllerConfig(),
    )


def test_snapshot_and_log_endpoints(server, fig8_stream):
    push_lines(server, fig8_stream)
    wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] == 8)
    with httpx.Client(base_url=api(server)) as client:
        snap = client.get("/api/snapshot").json()
        assert snap["aggregate"]["frames"] == 8
        assert snap["nodes"]["N01"]["last"]["sun"] == 68

        rows = client.get("/api/log", params={"node": "N01", "kinds": "telemetry"}).json()
        assert rows["total"] == 8
        assert [r["t"] for r in rows["rows"]] == [0, 8, 31, 48, 65, 80, 141, 156]

        page = client.get(
            "/api/log", params={"kinds": "telemetry", "offset": 2, "limit": 3}
        ).json()
        assert [r["t"] for r in page["rows"]] == [31, 48, 65]

        bad = client.get("/api/log", params={"from": 10, "to": 5})
        assert bad.status_code == 400

        stats = client.get("/api/stats").json()
        assert stats == {"duplicates": 0, "malformed": 0}


def test_energy_endpoint_over_synthetic_100w_log(server):
    # one 100 W lamp at 100% for 12 hours
    from lampfleet.core import LampStatus
    from lampfleet.protocol import Telemetry, TelemetryRow, encode_message

    lines = []
    for i in range(13):
        row = TelemetryRow("13/02/2022", "06:00:00pm", "5.00", 100, 21, 0, (LampStatus(1, 100),))
        lines.append(encode_message(Telemetry(i + 1, "G01", i * 3600, "100", "-", row)))
    push_lines(server, lines)
    wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] == 13)
    with httpx.Client(base_url=api(server)) as client:
        report = client.get(
            "/api/energy", params={"from": 0, "to": 43200, "tariff": "7.70"}
        ).json()
        assert report["kwh"] == "1.2"
        assert report["cost_tk"] == "9.24"
        assert client.get("/api/energy", params={"from": 99, "to": 1}).status_code == 400


def test_faults_endpoint(server, fig8_rows):
    from lampfleet.protocol import Fault, encode_message

    lines = rows_to_stream(fig8_rows[:1]) + [
        encode_message(Fault(1, "N01", 7203, 3, "lamp_dark", 7203, None))
    ]
    push_lines(server, lines)
    wait_for(lambda: server.room.faults(open_only=True))
    with httpx.Client(base_url=api(server)) as client:
        open_faults = client.get("/api/faults", params={"open": "true"}).json()["faults"]
        assert open_faults == [
            {"kind": "fault", "node": "N01", "t": 7203, "lamp": 3,
             "fault_kind": "lamp_dark", "onset": 7203, "cleared": None}
        ]


def test_command_to_unknown_node_is_404(server):
    with httpx.Client(base_url=api(server)) as client:
        resp = client.post("/api/command", json={"node": "X9", "action": "request_snapshot"})
        assert resp.status_code == 404


def test_bad_command_body_is_400(server, fig8_stream):
    push_lines(server, fig8_stream[:1])
    wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] == 1)
    with httpx.Client(base_url=api(server)) as client:
        resp = client.post(
            "/api/command",
            json={"node": "N01", "action": "set_override", "state": "on",
                  "brightness": 150, "expiry_s": 60},
        )
        assert resp.status_code == 400


def test_live_node_override_round_trip(server):
    sc = night_scenario()
    host, port = server.node_address
    node = LiveNode(sc, 0, host, port, speed=200.0)  # 100 ticks/s at tick 2... speed=virtual s per wall s
    thread = threading.Thread(target=node.run, daemon=True)
    thread.start()
    try:
        wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] >= 2)
        with httpx.Client(base_url=api(server), timeout=10.0) as client:
            # automatic night state first: all dim
            snap = wait_for(lambda: client.get("/api/snapshot").json()["nodes"].get("N01"))
            assert [l["level"] for l in snap["lamps"]] == [50] * 6

            resp = client.post(
                "/api/command",
                json={"node": "N01", "lamp": "ALL", "action": "set_override",
                      "state": "on", "brightness": 100, "expiry_s": 3000},
            )
            assert resp.status_code == 200
            audit = resp.json()["audit"]
            assert audit["result"] == "acked"

            def all_boosted():
                node_view = client.get("/api/snapshot").json()["nodes"]["N01"]
                lamps = node_view.get("lamps", [])
                return lamps and all(l["state"] == 1 and l["level"] == 100 for l in lamps)

            wait_for(all_boosted)
            # override visible in snapshot only via the confirming frame
            node_view = client.get("/api/snapshot").json()["nodes"]["N01"]
            assert node_view["override"].startswith("ALL:on:100:")

            clear = client.post(
                "/api/command", json={"node": "N01", "action": "clear_override"}
            ).json()["audit"]
            assert clear["result"] == "acked"

            def back_to_dim():
                lamps = client.get("/api/snapshot").json()["nodes"]["N01"]["lamps"]
                return all(l["level"] == 50 for l in lamps)

            wait_for(back_to_dim)
    finally:
        node.stop()
        thread.join(timeout=5)


def test_request_snapshot_forces_frame(server):
    sc = night_scenario(report_every=1000)  # frames would be rare
    host, port = server.node_address
    node = LiveNode(sc, 0, host, port, speed=100.0)
    thread = threading.Thread(target=node.run, daemon=True)
    thread.start()
    try:
        wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] >= 1)
        before = server.room.snapshot()["aggregate"]["frames"]
        with httpx.Client(base_url=api(server)) as client:
            audit = client.post(
                "/api/command", json={"node": "N01", "action": "request_snapshot"}
            ).json()["audit"]
        assert audit["result"] == "acked"
        wait_for(lambda: server.room.snapshot()["aggregate"]["frames"] > before)
    finally:
        node.stop()
        thread.join(timeout=5)


def test_sse_stream_delivers_frame_events(server, fig8_stream):
    host, port = server.http_address
    received = []

    def listen():
        with httpx.Client(timeout=10.0) as client:
            with client.stream("GET", f"http://{host}:{port}/api/stream") as resp:
                for line in resp.iter_lines():
                    if line.startswith("data: "):
                        received.append(json.loads(line[6:]))
                        if len(received) >= 3:
                            return

    thread = threading.Thread(target=listen, daemon=True)
    thread.start()
    time.sleep(0.3)  # let the subscription attach
    push_lines(server, fig8_stream[:3])
    thread.join(timeout=5)
    assert len(received) == 3
    assert all(e["event"] == "frame" and e["node"] == "N01" for e in received)


def test_restart_reproduces_snapshot(tmp_path, fig8_stream):
    srv = ControlRoomServer(tmp_path / "data", ack_timeout=0.2)
    srv.start()
    push_lines(srv, fig8_stream)
    wait_for(lambda: srv.room.snapshot()["aggregate"]["frames"] == 8)
    with httpx.Client(base_url=api(srv)) as client:
        before = client.get("/api/snapshot").content
    srv.stop()

    srv2 = ControlRoomServer(tmp_path / "data", ack_timeout=0.2)
    srv2.start()
    with httpx.Client(base_url=api(srv2)) as client:
        after = client.get("/api/snapshot").content
    srv2.stop()
    assert after == before
