"""Line-oriented wire protocol between nodes and the control room.

Two layers:

* the telemetry *row*: the tab-separated record shape used by the admin
  panel log (``Date Time Volt Amp Temp Sun Light 01..N`` with lamp cells
  like ``1@43``), which must round-trip byte-identically;
* the *frame*: one newline-terminated message per line, kind tag first,
  carrying telemetry rows, fault events, operator commands and acks.
  Every frame has a per-sender, per-kind sequence number; telemetry
  streams must be strictly increasing.

Free-text fields are backslash-escaped so payload text can never forge
the tab/newline framing. Row fields are strictly validated instead
(none of them may contain separators), which keeps logged rows exactly
as the panel displays them.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Optional, Union

from .core import LampStatus

TAG_TELEMETRY = "T"
TAG_FAULT = "F"
TAG_COMMAND = "C"
TAG_ACK = "A"

ACTION_SET_OVERRIDE = "set_override"
ACTION_CLEAR_OVERRIDE = "clear_override"
ACTION_REQUEST_SNAPSHOT = "request_snapshot"

_DATE_RE = re.compile(r"^\d{2}/\d{2}/\d{4}$")
_TIME_RE = re.compile(r"^\d{2}:\d{2}:\d{2}(?:am|pm)$")
_VOLT_RE = re.compile(r"^\d+\.\d{2}$")
_CELL_RE = re.compile(r"^([01])@(\d{1,3})$")
_NODE_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_WATTS_RE = re.compile(r"^\d+(?:\.\d+)?$")

ROW_HEADER_FIELDS = 6  # date, time, volt, amp, temp, sun


class ProtocolError(ValueError):
    """Base class for anything the codec refuses to handle."""


class ParseError(ProtocolError):
    """Malformed telemetry row. Carries the offending field and its
    character position within the line."""

    def __init__(self, message: str, column: int, pos: int):
        super().__init__(f"{message} (field {column}, char {pos})")
        self.column = column
        self.pos = pos


class FrameError(ProtocolError):
    """Malformed frame: unknown tag, wrong arity, truncation."""


class SequenceRegression(FrameError):
    """A frame arrived with a sequence number not above the last one
    seen on the same (sender, kind) stream. The decoded message is
    attached so callers can still count or log it."""

    def __init__(self, message: "Message", last_seq: int):
        super().__init__(
            f"sequence regression on ({message.node_id}, {message.kind}): "
            f"{message.seq} after {last_seq}"
        )
        self.message = message
        self.last_seq = last_seq


# --- field escaping ------------------------------------------------------

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(text: str) -> str:
    out = []
    for ch in text:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def unescape_field(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise FrameError("dangling escape at end of field")
            nxt = text[i + 1]
            if nxt not in _UNESCAPES:
                raise FrameError(f"unknown escape sequence \\{nxt}")
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# --- telemetry rows ------------------------------------------------------


@dataclass(frozen=True)
class TelemetryRow:
    """One Fig-8-shaped log record.

    ``date``, ``time`` and ``volt`` are kept as validated text so a
    decoded row re-serializes to the identical byte string (``5.00``
    must not collapse to ``5.0``). Timestamps are opaque wall-clock
    labels; all control logic runs on sim time.
    """

    date: str
    time: str
    volt: str
    amp: int
    temp: int
    sun: int
    lamps: tuple[LampStatus, ...]


def encode_lamp_cell(state_bit: int, level: int) -> str:
    if state_bit not in (0, 1):
        raise ProtocolError(f"state bit must be 0 or 1, got {state_bit!r}")
    if not 0 <= level <= 100:
        raise ProtocolError(f"lamp level out of range: {level!r}")
    return f"{state_bit}@{level}"


def decode_lamp_cell(cell: str) -> LampStatus:
    m = _CELL_RE.match(cell)
    if not m:
        raise ProtocolError(f"bad lamp cell {cell!r}")
    level = int(m.group(2))
    if level > 100:
        raise ProtocolError(f"lamp level out of range in cell {cell!r}")
    return LampStatus(int(m.group(1)), level)


def encode_row(row: TelemetryRow) -> str:
    _validate_row(row)
    fields = [row.date, row.time, row.volt, str(row.amp), str(row.temp), str(row.sun)]
    fields.extend(encode_lamp_cell(c.state_bit, c.level) for c in row.lamps)
    return "\t".join(fields)


def decode_row(line: str, lamp_count: int = 6) -> TelemetryRow:
    fields = line.split("\t")
    expected = ROW_HEADER_FIELDS + lamp_count
    if len(fields) != expected:
        raise ParseError(
            f"expected {expected} fields for {lamp_count} lamps, got {len(fields)}",
            column=len(fields),
            pos=len(line),
        )

    pos = 0
    positions = []
    for f in fields:
        positions.append(pos)
        pos += len(f) + 1

    def fail(idx: int, why: str) -> ParseError:
        return ParseError(why, column=idx, pos=positions[idx])

    if not _DATE_RE.match(fields[0]):
        raise fail(0, f"bad date {fields[0]!r}")
    if not _TIME_RE.match(fields[1]):
        raise fail(1, f"bad time {fields[1]!r}")
    if not _VOLT_RE.match(fields[2]):
        raise fail(2, f"bad volt {fields[2]!r}")
    try:
        amp = int(fields[3])
    except ValueError:
        raise fail(3, f"bad amp {fields[3]!r}") from None
    if amp < 0:
        raise fail(3, f"negative amp {amp}")
    try:
        temp = int(fields[4])
    except ValueError:
        raise fail(4, f"bad temp {fields[4]!r}") from None
    try:
        sun = int(fields[5])
    except ValueError:
        raise fail(5, f"bad sun {fields[5]!r}") from None
    if not 0 <= sun <= 100:
        raise fail(5, f"sun out of range: {sun}")

    lamps = []
    for i, cell in enumerate(fields[ROW_HEADER_FIELDS:]):
        try:
            lamps.append(decode_lamp_cell(cell))
        except ProtocolError as exc:
            raise fail(ROW_HEADER_FIELDS + i, str(exc)) from None
    return TelemetryRow(fields[0], fields[1], fields[2], amp, temp, sun, tuple(lamps))


def _validate_row(row: TelemetryRow) -> None:
    if not _DATE_RE.match(row.date):
        raise ProtocolError(f"bad date {row.date!r}")
    if not _TIME_RE.match(row.time):
        raise ProtocolError(f"bad time {row.time!r}")
    if not _VOLT_RE.match(row.volt):
        raise ProtocolError(f"bad volt {row.volt!r}")
    if row.amp < 0:
        raise ProtocolError(f"negative amp {row.amp}")
    if not 0 <= row.sun <= 100:
        raise ProtocolError(f"sun out of range: {row.sun}")
    if not row.lamps:
        raise ProtocolError("row has no lamp cells")


def row_wall_seconds(row: TelemetryRow) -> int:
    """Seconds since the Unix epoch for the row's wall-clock label."""
    stamp = datetime.strptime(f"{row.date} {row.time}", "%d/%m/%Y %I:%M:%S%p")
    return int(stamp.timestamp())


def wall_label(epoch: datetime, sim_time: int) -> tuple[str, str]:
    """Map sim seconds onto a (date, time) label pair for logged rows."""
    stamp = epoch + timedelta(seconds=sim_time)
    return stamp.strftime("%d/%m/%Y"), stamp.strftime("%I:%M:%S%p").lower()


# --- messages ------------------------------------------------------------


@dataclass(frozen=True)
class Telemetry:
    seq: int
    node_id: str
    sim_time: int
    rated_watts: str  # decimal text, per-lamp rated power
    override_desc: str  # "-" when no override is active
    row: TelemetryRow
    kind = "telemetry"


@dataclass(frozen=True)
class Fault:
    seq: int
    node_id: str
    sim_time: int
    lamp_index: int
    fault_kind: str
    onset: int
    cleared: Optional[int]
    kind = "fault"


@dataclass(frozen=True)
class Command:
    seq: int
    node_id: str
    lamp: Union[int, str]  # 0-based index or "ALL"
    action: str
    state_on: Optional[bool] = None
    brightness: Optional[int] = None
    expiry_s: Optional[int] = None
    kind = "command"


@dataclass(frozen=True)
class Ack:
    seq: int
    node_id: str
    ack_seq: int
    status: str
    kind = "ack"


Message = Union[Telemetry, Fault, Command, Ack]


def _check_node(node_id: str) -> str:
    if not _NODE_RE.match(node_id):
        raise ProtocolError(f"bad node id {node_id!r}")
    return node_id


def encode_message(msg: Message) -> str:
    """Serialize a message to one (unterminated) frame line."""
    if isinstance(msg, Telemetry):
        if not _WATTS_RE.match(msg.rated_watts):
            raise ProtocolError(f"bad rated watts {msg.rated_watts!r}")
        head = [
            TAG_TELEMETRY,
            str(msg.seq),
            escape_field(_check_node(msg.node_id)),
            str(msg.sim_time),
            msg.rated_watts,
            escape_field(msg.override_desc),
        ]
        return "\t".join(head) + "\t" + encode_row(msg.row)
    if isinstance(msg, Fault):
        return "\t".join(
            [
                TAG_FAULT,
                str(msg.seq),
                escape_field(_check_node(msg.node_id)),
                str(msg.sim_time),
                str(msg.lamp_index),
                escape_field(msg.fault_kind),
                str(msg.onset),
                "-" if msg.cleared is None else str(msg.cleared),
            ]
        )
    if isinstance(msg, Command):
        return "\t".join(
            [
                TAG_COMMAND,
                str(msg.seq),
                escape_field(_check_node(msg.node_id)),
                str(msg.lamp),
                msg.action,
                "-" if msg.state_on is None else ("on" if msg.state_on else "off"),
                "-" if msg.brightness is None else str(msg.brightness),
                "-" if msg.expiry_s is None else str(msg.expiry_s),
            ]
        )
    if isinstance(msg, Ack):
        return "\t".join(
            [
                TAG_ACK,
                str(msg.seq),
                escape_field(_check_node(msg.node_id)),
                str(msg.ack_seq),
                escape_field(msg.status),
            ]
        )
    raise ProtocolError(f"cannot encode {type(msg).__name__}")


def decode_message(line: str) -> Message:
    """Parse one frame line (without its newline) into a message."""
    line = line.rstrip("\r\n")
    if not line:
        raise FrameError("empty frame")
    fields = line.split("\t")
    tag = fields[0]

    def seq_of(raw: str) -> int:
        try:
            seq = int(raw)
        except ValueError:
            raise FrameError(f"bad sequence number {raw!r}") from None
        if seq < 1:
            raise FrameError(f"sequence number must be >= 1, got {seq}")
        return seq

    if tag == TAG_TELEMETRY:
        if len(fields) < 6 + ROW_HEADER_FIELDS + 1:
            raise FrameError(f"truncated telemetry frame ({len(fields)} fields)")
        node = _check_node(unescape_field(fields[2]))
        if not _WATTS_RE.match(fields[4]):
            raise FrameError(f"bad rated watts {fields[4]!r}")
        lamp_count = len(fields) - 6 - ROW_HEADER_FIELDS
        row = decode_row("\t".join(fields[6:]), lamp_count=lamp_count)
        return Telemetry(
            seq=seq_of(fields[1]),
            node_id=node,
            sim_time=_int_field(fields[3], "sim time"),
            rated_watts=fields[4],
            override_desc=unescape_field(fields[5]),
            row=row,
        )
    if tag == TAG_FAULT:
        if len(fields) != 8:
            raise FrameError(f"fault frame needs 8 fields, got {len(fields)}")
        return Fault(
            seq=seq_of(fields[1]),
            node_id=_check_node(unescape_field(fields[2])),
            sim_time=_int_field(fields[3], "sim time"),
            lamp_index=_int_field(fields[4], "lamp index"),
            fault_kind=unescape_field(fields[5]),
            onset=_int_field(fields[6], "onset"),
            cleared=None if fields[7] == "-" else _int_field(fields[7], "cleared"),
        )
    if tag == TAG_COMMAND:
        if len(fields) != 8:
            raise FrameError(f"command frame needs 8 fields, got {len(fields)}")
        lamp: Union[int, str]
        lamp = "ALL" if fields[3] == "ALL" else _int_field(fields[3], "lamp selector")
        action = fields[4]
        if action not in (ACTION_SET_OVERRIDE, ACTION_CLEAR_OVERRIDE, ACTION_REQUEST_SNAPSHOT):
            raise FrameError(f"unknown command action {action!r}")
        state_on = None
        if fields[5] != "-":
            if fields[5] not in ("on", "off"):
                raise FrameError(f"bad override state {fields[5]!r}")
            state_on = fields[5] == "on"
        brightness = None if fields[6] == "-" else _int_field(fields[6], "brightness")
        if brightness is not None and not 0 <= brightness <= 100:
            raise FrameError(f"brightness out of range: {brightness}")
        expiry = None if fields[7] == "-" else _int_field(fields[7], "expiry")
        if expiry is not None and expiry <= 0:
            raise FrameError(f"expiry must be positive, got {expiry}")
        return Command(
            seq=seq_of(fields[1]),
            node_id=_check_node(unescape_field(fields[2])),
            lamp=lamp,
            action=action,
            state_on=state_on,
            brightness=brightness,
            expiry_s=expiry,
        )
    if tag == TAG_ACK:
        if len(fields) != 5:
            raise FrameError(f"ack frame needs 5 fields, got {len(fields)}")
        return Ack(
            seq=seq_of(fields[1]),
            node_id=_check_node(unescape_field(fields[2])),
            ack_seq=_int_field(fields[3], "acked sequence"),
            status=unescape_field(fields[4]),
        )
    raise FrameError(f"unknown frame tag {tag!r}")


def _int_field(raw: str, what: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise FrameError(f"bad {what} {raw!r}") from None


class StreamDecoder:
    """Decode a frame stream while enforcing per-(sender, kind) sequence
    monotonicity.

    ``feed`` returns the decoded message, raises :class:`SequenceRegression`
    when a sequence number fails to advance (the message is attached to
    the exception), and records gaps (skipped sequence numbers) in
    ``gaps`` without failing: gaps are reported, not repaired.
    """

    def __init__(self) -> None:
        self._last: dict[tuple[str, str], int] = {}
        self.gaps: list[tuple[str, str, int, int]] = []  # node, kind, after, got

    def feed(self, line: str) -> Message:
        msg = decode_message(line)
        key = (msg.node_id, msg.kind)
        last = self._last.get(key)
        if last is not None and msg.seq <= last:
            raise SequenceRegression(msg, last)
        if last is not None and msg.seq > last + 1:
            self.gaps.append((msg.node_id, msg.kind, last, msg.seq))
        self._last[key] = msg.seq
        return msg


# --- CSV export ----------------------------------------------------------


def csv_header(lamp_count: int) -> list[str]:
    return ["Date", "Time", "Volt", "Amp", "Temp", "Sun"] + [
        f"Light {i + 1:02d}" for i in range(lamp_count)
    ]


def rows_to_csv(rows: Iterable[TelemetryRow]) -> str:
    """Render rows as CSV in the admin-panel column order."""
    rows = list(rows)
    lamp_count = len(rows[0].lamps) if rows else 6
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(lamp_count))
    for row in rows:
        writer.writerow(
            [row.date, row.time, row.volt, row.amp, row.temp, row.sun]
            + [encode_lamp_cell(c.state_bit, c.level) for c in row.lamps]
        )
    return buf.getvalue()


def csv_to_rows(text: str) -> list[TelemetryRow]:
    """Parse CSV produced by :func:`rows_to_csv` back into rows."""
    reader = csv.reader(io.StringIO(text))
    records = [rec for rec in reader if rec]
    if not records:
        return []
    lamp_count = len(records[0]) - ROW_HEADER_FIELDS
    out = []
    for rec in records[1:]:
        out.append(decode_row("\t".join(rec), lamp_count=lamp_count))
    return out
