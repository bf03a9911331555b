"""Append-only persistence and time-indexed queries for the control room.

The log file is the single source of truth: one wire-protocol frame per
line, appended before any in-memory state reflects it. Every index here
is a pure fold over those lines, which is what makes crash recovery a
plain replay.
"""

from __future__ import annotations

import threading
from bisect import bisect_right, insort
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from ..num import fraction_to_decimal_str
from ..protocol import Telemetry

WH_PER_KWH = 3_600_000  # watt-seconds per kWh


class InvalidRange(ValueError):
    """Query window with t1 > t2."""


def frame_power_watts(msg: Telemetry) -> Fraction:
    """Instantaneous electrical power of a logged frame, exactly.

    Lit cells carry commanded brightness, so power is
    rated * level / 100 summed over lit lamps; off cells draw nothing.
    """
    rated = Fraction(msg.rated_watts)
    total = Fraction(0)
    for cell in msg.row.lamps:
        if cell.state_bit == 1:
            total += rated * cell.level / 100
    return total


class LogStore:
    """Telemetry rows plus event records, persisted and queryable.

    Records are immutable once written; queries over [t1, t2] return
    exactly the records with t1 <= t <= t2, ordered by (t, arrival).
    """

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._fh = None
        self._io_lock = threading.Lock()
        # per-node telemetry kept sorted by (sim_time, seq) for the integrator
        self._telemetry: dict[str, list[tuple[int, int, Telemetry]]] = {}
        self._records: list[tuple[int, int, dict]] = []  # (t, arrival, record)
        self._arrival = 0

    # -- persistence -------------------------------------------------------

    def existing_lines(self) -> list[str]:
        if self.path is None or not self.path.exists():
            return []
        with self.path.open("r", encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]

    def open_append(self) -> None:
        if self.path is not None and self._fh is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("a", encoding="utf-8")

    def persist(self, line: str) -> None:
        if self._fh is None:
            return
        with self._io_lock:
            self._fh.write(line + "\n")
            self._fh.flush()

    def close(self) -> None:
        with self._io_lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    # -- indexing ----------------------------------------------------------

    def index_telemetry(self, msg: Telemetry) -> None:
        insort(self._telemetry.setdefault(msg.node_id, []), (msg.sim_time, msg.seq, msg))

    def index_record(self, t: int, record: dict) -> None:
        self._records.append((t, self._arrival, record))
        self._arrival += 1

    # -- queries -----------------------------------------------------------

    def nodes(self) -> list[str]:
        return sorted(self._telemetry)

    def telemetry_for(self, node_id: str) -> list[Telemetry]:
        return [m for _, _, m in self._telemetry.get(node_id, [])]

    def query(
        self,
        node: Optional[str],
        t1: int,
        t2: int,
        kinds: Optional[Iterable[str]] = None,
        offset: int = 0,
        limit: Optional[int] = None,
    ) -> tuple[list[dict], int]:
        """Time-windowed records, ordered by (t, arrival). Returns the
        selected page and the total matching count."""
        if t1 > t2:
            raise InvalidRange(f"t1 {t1} > t2 {t2}")
        wanted = set(kinds) if kinds else None
        hits = [
            rec
            for t, _, rec in sorted(self._records, key=lambda r: (r[0], r[1]))
            if t1 <= t <= t2
            and (wanted is None or rec["kind"] in wanted)
            and (node is None or rec.get("node") == node)
        ]
        total = len(hits)
        page = hits[offset:] if limit is None else hits[offset : offset + limit]
        return page, total

    # -- energy ------------------------------------------------------------

    def energy(self, t1: int, t2: int, tariff) -> dict:
        """Integrate logged power over [t1, t2] with piecewise-constant
        hold between frames; exact rational arithmetic throughout."""
        if t1 > t2:
            raise InvalidRange(f"t1 {t1} > t2 {t2}")
        total_ws = Fraction(0)
        for node in self.nodes():
            entries = self._telemetry[node]
            times = [e[0] for e in entries]
            i = bisect_right(times, t1) - 1
            prev_t = t1
            prev_p = frame_power_watts(entries[i][2]) if i >= 0 else Fraction(0)
            for j in range(i + 1, len(entries)):
                t, _, msg = entries[j]
                if t > t2:
                    break
                total_ws += prev_p * (t - prev_t)
                prev_p = frame_power_watts(msg)
                prev_t = t
            total_ws += prev_p * (t2 - prev_t)
        kwh = total_ws / WH_PER_KWH
        rate = Fraction(str(tariff))
        return {
            "from": t1,
            "to": t2,
            "tariff": str(tariff),
            "kwh": fraction_to_decimal_str(kwh),
            "cost_tk": fraction_to_decimal_str(kwh * rate),
        }
