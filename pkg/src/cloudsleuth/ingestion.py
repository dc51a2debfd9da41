"""Parsers for cloud telemetry exports.

Three sources are supported, all file based (formats mirror what the cloud
portals export, not live APIs):

* performance-counter rows (CSV or JSON Lines, Azure Monitor ``Perf`` shape)
* event-log rows (CSV or JSON Lines, Azure Monitor ``Event`` shape)
* CloudTrail-style JSON Lines events, optionally carrying ground-truth labels

Timestamps are accepted in RFC 3339 or the portal export form
``M/D/YYYY, h:mm:ss.fff AM/PM`` and normalized to UTC. Parsers are single
pass, keep input order, and never silently drop malformed rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Literal, Optional, Sequence, TypeVar, Union

from .errors import EmptyInput, FormatError, MissingColumn
from .labels import ClassificationLabel

Format = Literal["csv", "json_lines"]

# Azure portal export inventory of counter names. Advisory only: unknown
# counters are accepted and merely reported by summarize_perf().
KNOWN_COUNTERS = frozenset({
    "Thread Count",
    "% Free Space",
    "Working Set - Private",
    "Processor Frequency",
    "Packets Received Errors",
    "Packets Outbound Errors",
    "Working Set",
    "Free Megabytes",
    "Pool Nonpaged Bytes",
    "Pool Paged Bytes",
    "Available Bytes",
    "% Committed Bytes In Use",
    "Processor Queue Length",
    "Processes",
    "Committed Bytes",
    "Handle Count",
    "Cache Bytes",
    "System Up Time",
    "Avg. Disk Write Queue Length",
    "Avg. Disk Queue Length",
    "Disk Writes/sec",
    "% User Time",
    "Disk Transfers/sec",
    "Disk Reads/sec",
    "Avg. Disk Read Queue Length",
    "Context Switches/sec",
    "% Privileged Time",
    "Avg. Disk sec/Read",
    "% Processor Time",
    "Bytes Sent/sec",
    "Bytes Received/sec",
    "Packets/sec",
    "Bytes Total/sec",
    "Avg. Disk sec/Transfer",
    "Packets Sent/sec",
    "Disk Bytes/sec",
    "Disk Read Bytes/sec",
    "% Idle Time",
    "% Disk Write Time",
})

PERF_COLUMNS = ("TimeGenerated", "Computer", "ObjectName", "CounterName",
                "InstanceName", "CounterValue")
EVENT_REQUIRED_COLUMNS = ("TimeGenerated", "EventLevelName")


@dataclass(frozen=True)
class PerfRecord:
    """One performance-counter sample."""

    timestamp: datetime
    computer: str
    object_name: str
    counter_name: str
    instance_name: str
    value: float


@dataclass(frozen=True)
class EventRecord:
    """One event-log row. Level names outside the standard four are kept
    verbatim (open enumeration)."""

    timestamp: datetime
    event_level_name: str
    computer: str = ""
    event_id: int = 0
    message: str = ""


@dataclass(frozen=True)
class CloudEvent:
    """One CloudTrail-style event. ``raw`` preserves the original line for
    evidence integrity; ``label`` is ground truth when the export carries
    one."""

    timestamp: datetime
    event_name: str
    event_source: str
    user_identity: str
    raw: str
    label: Optional[ClassificationLabel] = None


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) of UTC instants."""

    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"window start {self.start} must precede end {self.end}")

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end

    def intersect(self, other: "TimeWindow") -> Optional["TimeWindow"]:
        start = max(self.start, other.start)
        end = min(self.end, other.end)
        if start >= end:
            return None
        return TimeWindow(start, end)


@dataclass
class IngestSummary:
    """Parse summary: totals plus counter names outside the known inventory."""

    records: int
    counters_seen: list[str] = field(default_factory=list)
    unknown_counters: list[str] = field(default_factory=list)


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 or Azure portal (``M/D/YYYY, h:mm:ss.fff AM/PM``)
    timestamp, normalized to UTC. Naive inputs are taken as UTC."""
    raw = text.strip()
    if not raw:
        raise ValueError("empty timestamp")
    candidate = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    try:
        ts = datetime.fromisoformat(candidate)
    except ValueError:
        ts = _parse_portal_timestamp(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_portal_timestamp(raw: str) -> datetime:
    for fmt in ("%m/%d/%Y, %I:%M:%S.%f %p", "%m/%d/%Y, %I:%M:%S %p"):
        try:
            return datetime.strptime(raw, fmt)
        except ValueError:
            continue
    raise ValueError(f"unrecognized timestamp {raw!r}")


def format_timestamp(ts: datetime) -> str:
    """RFC 3339 with a Z suffix; fractional seconds only when present."""
    ts = ts.astimezone(timezone.utc)
    base = ts.strftime("%Y-%m-%dT%H:%M:%S")
    if ts.microsecond:
        base += f".{ts.microsecond:06d}".rstrip("0")
    return base + "Z"


def _as_text_stream(source: Union[IO[bytes], IO[str], bytes, str]) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8", errors="replace"))
    if isinstance(source, str):
        return io.StringIO(source)
    if hasattr(source, "mode") and "b" in getattr(source, "mode", ""):
        return io.TextIOWrapper(source, encoding="utf-8", errors="replace")
    first = source.read(0)
    if isinstance(first, bytes):
        return io.TextIOWrapper(source, encoding="utf-8", errors="replace")
    return source


def _check_columns(fieldnames: Optional[Sequence[str]], required: Sequence[str]) -> None:
    present = set(fieldnames or ())
    missing = [c for c in required if c not in present]
    if missing:
        raise MissingColumn(f"missing required column(s): {', '.join(missing)}")


def _iter_csv(stream: IO[str], required: Sequence[str]):
    reader = csv.DictReader(stream)
    _check_columns(reader.fieldnames, required)
    # header occupies line 1; first data row is line 2
    for lineno, row in enumerate(reader, start=2):
        yield lineno, row


def _iter_jsonl(stream: IO[str], required: Sequence[str]):
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise FormatError(lineno, "JSON line is not an object")
        missing = [c for c in required if c not in obj]
        if missing:
            raise FormatError(lineno, f"missing field(s): {', '.join(missing)}")
        yield lineno, obj


def _rows(source, fmt: Format, required: Sequence[str]):
    stream = _as_text_stream(source)
    if fmt == "csv":
        yield from _iter_csv(stream, required)
    elif fmt == "json_lines":
        yield from _iter_jsonl(stream, required)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def parse_perf(source, fmt: Format = "csv") -> list[PerfRecord]:
    """Parse performance-counter rows, preserving input order.

    Raises FormatError (with the 1-based line number) on a malformed
    timestamp or non-numeric CounterValue, MissingColumn on an absent
    required header.
    """
    records: list[PerfRecord] = []
    for lineno, row in _rows(source, fmt, PERF_COLUMNS):
        try:
            ts = parse_timestamp(str(row["TimeGenerated"]))
        except ValueError as exc:
            raise FormatError(lineno, f"bad TimeGenerated: {exc}") from exc
        raw_value = row["CounterValue"]
        try:
            value = float(raw_value)
        except (TypeError, ValueError):
            raise FormatError(lineno, f"non-numeric CounterValue {raw_value!r}") from None
        if value != value or value in (float("inf"), float("-inf")):
            raise FormatError(lineno, f"non-finite CounterValue {raw_value!r}")
        records.append(PerfRecord(
            timestamp=ts,
            computer=str(row["Computer"]),
            object_name=str(row["ObjectName"]),
            counter_name=str(row["CounterName"]),
            instance_name=str(row["InstanceName"] or ""),
            value=value,
        ))
    return records


def summarize_perf(records: Iterable[PerfRecord]) -> IngestSummary:
    """Counts plus counter names not in the known portal inventory."""
    seen: dict[str, None] = {}
    total = 0
    for rec in records:
        total += 1
        seen.setdefault(rec.counter_name)
    counters = list(seen)
    unknown = [c for c in counters if c not in KNOWN_COUNTERS]
    return IngestSummary(records=total, counters_seen=counters, unknown_counters=unknown)


def parse_events(source, fmt: Format = "csv") -> list[EventRecord]:
    """Parse event-log rows; optional columns default to empty values."""
    records: list[EventRecord] = []
    for lineno, row in _rows(source, fmt, EVENT_REQUIRED_COLUMNS):
        try:
            ts = parse_timestamp(str(row["TimeGenerated"]))
        except ValueError as exc:
            raise FormatError(lineno, f"bad TimeGenerated: {exc}") from exc
        raw_id = row.get("EventID") or 0
        try:
            event_id = int(raw_id)
        except (TypeError, ValueError):
            raise FormatError(lineno, f"non-integer EventID {raw_id!r}") from None
        message = row.get("Message") or row.get("RenderedDescription") or ""
        records.append(EventRecord(
            timestamp=ts,
            event_level_name=str(row["EventLevelName"]),
            computer=str(row.get("Computer") or ""),
            event_id=event_id,
            message=str(message),
        ))
    return records


def parse_cloudtrail(source) -> list[CloudEvent]:
    """Parse CloudTrail-style JSON Lines, one event per line.

    The optional ``label`` field ("legit"/"malicious", aliases accepted)
    becomes ground truth. The full raw line is retained on each record.
    """
    stream = _as_text_stream(source)
    records: list[CloudEvent] = []
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise FormatError(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise FormatError(lineno, "JSON line is not an object")
        ts_raw = obj.get("eventTime") or obj.get("EventTime")
        if not ts_raw:
            raise FormatError(lineno, "missing eventTime")
        try:
            ts = parse_timestamp(str(ts_raw))
        except ValueError as exc:
            raise FormatError(lineno, f"bad eventTime: {exc}") from exc
        label = None
        if "label" in obj:
            try:
                label = ClassificationLabel.parse(str(obj["label"]))
            except ValueError as exc:
                raise FormatError(lineno, str(exc)) from exc
        identity = obj.get("userIdentity", "")
        if isinstance(identity, dict):
            identity = identity.get("arn") or identity.get("userName") or ""
        records.append(CloudEvent(
            timestamp=ts,
            event_name=str(obj.get("eventName") or obj.get("EventName") or ""),
            event_source=str(obj.get("eventSource") or obj.get("EventSource") or ""),
            user_identity=str(identity),
            raw=stripped,
            label=label,
        ))
    return records


R = TypeVar("R", PerfRecord, EventRecord, CloudEvent)


def filter_window(records: Sequence[R], window: TimeWindow) -> list[R]:
    """Records with start <= timestamp < end, input order preserved."""
    return [r for r in records if window.contains(r.timestamp)]


def span(records: Sequence) -> TimeWindow:
    """Smallest window covering every record (end is exclusive, so one
    microsecond past the last timestamp)."""
    if not records:
        raise EmptyInput("no records")
    timestamps = [r.timestamp for r in records]
    lo, hi = min(timestamps), max(timestamps)
    from datetime import timedelta
    return TimeWindow(lo, hi + timedelta(microseconds=1))


# --- serialization (round-trip counterparts of the parsers) ---

def write_perf(records: Iterable[PerfRecord], stream: IO[str], fmt: Format = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(stream)
        writer.writerow(PERF_COLUMNS)
        for r in records:
            writer.writerow([format_timestamp(r.timestamp), r.computer, r.object_name,
                             r.counter_name, r.instance_name, repr(r.value)])
    elif fmt == "json_lines":
        for r in records:
            stream.write(json.dumps({
                "TimeGenerated": format_timestamp(r.timestamp),
                "Computer": r.computer,
                "ObjectName": r.object_name,
                "CounterName": r.counter_name,
                "InstanceName": r.instance_name,
                "CounterValue": r.value,
            }) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_events(records: Iterable[EventRecord], stream: IO[str], fmt: Format = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(stream)
        writer.writerow(["TimeGenerated", "EventLevelName", "Computer", "EventID", "Message"])
        for r in records:
            writer.writerow([format_timestamp(r.timestamp), r.event_level_name,
                             r.computer, r.event_id, r.message])
    elif fmt == "json_lines":
        for r in records:
            stream.write(json.dumps({
                "TimeGenerated": format_timestamp(r.timestamp),
                "EventLevelName": r.event_level_name,
                "Computer": r.computer,
                "EventID": r.event_id,
                "Message": r.message,
            }) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_cloudtrail(records: Iterable[CloudEvent], stream: IO[str]) -> None:
    """Emit the preserved raw lines (or a canonical encoding for records
    built programmatically)."""
    for r in records:
        if r.raw:
            stream.write(r.raw + "\n")
            continue
        obj = {
            "eventTime": format_timestamp(r.timestamp),
            "eventName": r.event_name,
            "eventSource": r.event_source,
            "userIdentity": r.user_identity,
        }
        if r.label is not None:
            obj["label"] = r.label.value.lower()
        stream.write(json.dumps(obj) + "\n")
