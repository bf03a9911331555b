from __future__ import annotations

from pathlib import Path

import pytest

from lampfleet.protocol import (
    Telemetry,
    TelemetryRow,
    decode_row,
    encode_message,
    row_wall_seconds,
)

DATA_DIR = Path(__file__).parent / "data"

_acceptance_results: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): records a pass/fail line per acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        name = marker.args[0] if marker.args else item.name
        _acceptance_results.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        mark = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}")


@pytest.fixture(scope="session")
def fig8_lines() -> list[str]:
    text = (DATA_DIR / "fig8_rows.txt").read_text(encoding="utf-8")
    return [line for line in text.split("\n") if line]


@pytest.fixture(scope="session")
def fig8_rows(fig8_lines) -> list[TelemetryRow]:
    return [decode_row(line) for line in fig8_lines]


def rows_to_stream(rows: list[TelemetryRow], node_id: str = "N01",
                   rated_watts: str = "0.05") -> list[str]:
    """Wrap raw rows into telemetry frames; sim times taken from the
    wall-clock deltas so the first row lands at t=0."""
    base = row_wall_seconds(rows[0])
    lines = []
    for seq, row in enumerate(rows, start=1):
        msg = Telemetry(
            seq=seq,
            node_id=node_id,
            sim_time=row_wall_seconds(row) - base,
            rated_watts=rated_watts,
            override_desc="-",
            row=row,
        )
        lines.append(encode_message(msg))
    return lines


@pytest.fixture(scope="session")
def fig8_stream(fig8_rows) -> list[str]:
    return rows_to_stream(fig8_rows)
