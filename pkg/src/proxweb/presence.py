"""Scan ingestion and presence analytics.

Every scan a device reports becomes one append-only log line per visible
node, the proximity analogue of a web server log: the anonymized device
stands in for the client IP, the observed node MAC for the requested URL,
and the list of other visible nodes for the Referer. Analytics (heat
maps, dwell sessions, live metrics) are pure functions over a log
snapshot, so the same log that feeds dashboards also answers the rule
engine's statistics predicates in real time.
"""

import hashlib
import hmac
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import IO, Iterable

from .errors import (
    CorruptSnapshot,
    DuplicateObservation,
    EmptySalt,
    InvalidRange,
    InvalidRssi,
)
from .macaddr import canonical_mac
from .timeutil import format_rfc3339, parse_rfc3339

RSSI_MIN_DBM = -120
RSSI_MAX_DBM = 0

DEFAULT_BUCKET_S = 900
DEFAULT_SESSION_GAP_S = 60


class StatMetric(Enum):
    VISIT_COUNT = "visit_count"
    UNIQUE_DEVICES = "unique_devices"


@dataclass(frozen=True)
class Observation:
    mac: str
    rssi_dbm: int


@dataclass(frozen=True)
class ScanReport:
    """One device's snapshot of visible nodes at an instant.

    MACs are canonicalized and must be pairwise distinct; RSSI values are
    integers in [-120, 0] dBm.
    """

    device_id: str
    timestamp: datetime
    observations: tuple[Observation, ...]

    def __post_init__(self):
        normalized = []
        seen = set()
        for obs in self.observations:
            mac = canonical_mac(obs.mac)
            if mac in seen:
                raise DuplicateObservation(f"{mac} observed twice in one scan")
            seen.add(mac)
            rssi = obs.rssi_dbm
            if isinstance(rssi, float):
                if not rssi.is_integer():
                    raise InvalidRssi(f"rssi for {mac} must be an integer, got {rssi}")
                rssi = int(rssi)
            if not isinstance(rssi, int) or isinstance(rssi, bool):
                raise InvalidRssi(f"rssi for {mac} must be an integer, got {rssi!r}")
            if not RSSI_MIN_DBM <= rssi <= RSSI_MAX_DBM:
                raise InvalidRssi(
                    f"rssi for {mac} must be in [{RSSI_MIN_DBM}, {RSSI_MAX_DBM}], got {rssi}"
                )
            normalized.append(Observation(mac=mac, rssi_dbm=rssi))
        object.__setattr__(self, "observations", tuple(normalized))


@dataclass(frozen=True)
class PresenceRecord:
    """One log line: a device (hashed) saw a node at an instant."""

    timestamp: datetime
    device_hash: str
    mac: str
    rssi_dbm: int
    context: tuple[str, ...]


@dataclass(frozen=True)
class HeatMapCell:
    mac: str
    bucket_start: datetime
    visit_count: int
    unique_devices: int


@dataclass(frozen=True)
class DwellSession:
    device_hash: str
    mac: str
    start: datetime
    end: datetime

    @property
    def dwell_s(self) -> float:
        return (self.end - self.start).total_seconds()


def anonymize(device_id: str, salt: str) -> str:
    """Keyed one-way digest of a device id, truncated to 16 hex chars.

    The raw id is never persisted; the same (id, salt) always maps to the
    same hash, so per-device analytics survive anonymization.
    """
    if not salt:
        raise EmptySalt("anonymization salt must be non-empty")
    digest = hmac.new(salt.encode(), device_id.encode(), hashlib.sha256)
    return digest.hexdigest()[:16]


# -- scan stream line codec ----------------------------------------------
#
# One scan per line: `timestamp,device_id,MAC:rssi;MAC:rssi`. The third
# field is empty when nothing was visible. This is the simulator's output
# format and the replay input for ingestion.


def scan_report_to_line(report: ScanReport) -> str:
    if "," in report.device_id or "\n" in report.device_id:
        raise ValueError(f"device_id {report.device_id!r} cannot be serialized")
    obs = ";".join(f"{o.mac}:{o.rssi_dbm}" for o in report.observations)
    return f"{format_rfc3339(report.timestamp)},{report.device_id},{obs}"


def scan_report_from_line(line: str, lineno: int = 1) -> ScanReport:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 3:
        raise ValueError(f"line {lineno}: expected 3 comma-separated fields")
    ts_text, device_id, obs_text = parts
    try:
        timestamp = parse_rfc3339(ts_text)
    except ValueError as exc:
        raise ValueError(f"line {lineno}: bad timestamp {ts_text!r}") from exc
    if not device_id:
        raise ValueError(f"line {lineno}: empty device_id")
    observations = []
    if obs_text:
        for item in obs_text.split(";"):
            mac, sep, rssi = item.rpartition(":")
            if not sep or not mac:
                raise ValueError(f"line {lineno}: bad observation {item!r}")
            try:
                observations.append(Observation(mac=mac, rssi_dbm=int(rssi)))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad rssi in {item!r}") from exc
    try:
        return ScanReport(
            device_id=device_id, timestamp=timestamp, observations=tuple(observations)
        )
    except Exception as exc:
        raise ValueError(f"line {lineno}: {exc}") from exc


def write_scan_stream(reports: Iterable[ScanReport], fp: IO[str]) -> int:
    count = 0
    for report in reports:
        fp.write(scan_report_to_line(report) + "\n")
        count += 1
    return count


def read_scan_stream(fp: IO[str]) -> list[ScanReport]:
    """Parse a scan stream, failing on the first malformed line."""
    reports = []
    for lineno, line in enumerate(fp, start=1):
        if not line.strip():
            continue
        reports.append(scan_report_from_line(line, lineno))
    return reports


class PresenceLog:
    """Append-only presence log with analytics over a consistent snapshot.

    A single lock serializes appends; ``records()`` hands out an immutable
    prefix, so readers never see a torn record. When ``path`` is given the
    log is backed by a line-delimited file: existing lines are loaded on
    open and every ingest appends and flushes.
    """

    def __init__(self, salt: str, path: str | Path | None = None):
        if not salt:
            raise EmptySalt("presence log requires a non-empty salt")
        self._salt = salt
        self._lock = threading.Lock()
        self._records: list[PresenceRecord] = []
        self._path = Path(path) if path is not None else None
        self._fp: IO[str] | None = None
        if self._path is not None:
            if self._path.exists():
                self._load(self._path)
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._fp = open(self._path, "a", encoding="utf-8")

    @property
    def salt(self) -> str:
        return self._salt

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def records(self) -> tuple[PresenceRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def ingest_scan(self, report: ScanReport) -> int:
        """Append one record per observation; returns the appended count."""
        device_hash = anonymize(report.device_id, self._salt)
        macs = sorted(o.mac for o in report.observations)
        records = [
            PresenceRecord(
                timestamp=report.timestamp,
                device_hash=device_hash,
                mac=obs.mac,
                rssi_dbm=obs.rssi_dbm,
                context=tuple(m for m in macs if m != obs.mac),
            )
            for obs in sorted(report.observations, key=lambda o: o.mac)
        ]
        with self._lock:
            self._records.extend(records)
            if self._fp is not None:
                for record in records:
                    self._fp.write(_record_to_line(record) + "\n")
                self._fp.flush()
        return len(records)

    # -- analytics ---------------------------------------------------------

    def heat_map(
        self,
        from_ts: datetime,
        to_ts: datetime,
        bucket_s: float = DEFAULT_BUCKET_S,
        mac: str | None = None,
    ) -> list[HeatMapCell]:
        """Per-(mac, bucket) visit and unique-device counts over [from, to).

        Buckets are aligned to ``from_ts + k * bucket_s``; only buckets
        with at least one record are returned, sorted by (mac, bucket).
        """
        if from_ts >= to_ts:
            raise InvalidRange("from must be earlier than to")
        if bucket_s <= 0:
            raise InvalidRange("bucket_s must be positive")
        mac = canonical_mac(mac) if mac is not None else None
        cells: dict[tuple[str, int], tuple[int, set[str]]] = {}
        for record in self.records():
            if mac is not None and record.mac != mac:
                continue
            if not from_ts <= record.timestamp < to_ts:
                continue
            k = int((record.timestamp - from_ts).total_seconds() // bucket_s)
            count, devices = cells.setdefault((record.mac, k), (0, set()))
            devices.add(record.device_hash)
            cells[(record.mac, k)] = (count + 1, devices)
        return [
            HeatMapCell(
                mac=cell_mac,
                bucket_start=from_ts + timedelta(seconds=k * bucket_s),
                visit_count=count,
                unique_devices=len(devices),
            )
            for (cell_mac, k), (count, devices) in sorted(cells.items())
        ]

    def dwell_sessions(
        self, mac: str, gap_s: float = DEFAULT_SESSION_GAP_S
    ) -> list[DwellSession]:
        """Per-device visit runs at a node, split where the gap exceeds gap_s.

        Gaps exactly equal to ``gap_s`` do not split. A device seen once
        yields a zero-dwell session.
        """
        if gap_s <= 0:
            raise ValueError("gap_s must be positive")
        mac = canonical_mac(mac)
        by_device: dict[str, list[datetime]] = {}
        for record in self.records():
            if record.mac == mac:
                by_device.setdefault(record.device_hash, []).append(record.timestamp)
        sessions = []
        for device_hash, times in by_device.items():
            times.sort()
            start = prev = times[0]
            for t in times[1:]:
                if (t - prev).total_seconds() > gap_s:
                    sessions.append(
                        DwellSession(device_hash=device_hash, mac=mac, start=start, end=prev)
                    )
                    start = t
                prev = t
            sessions.append(
                DwellSession(device_hash=device_hash, mac=mac, start=start, end=prev)
            )
        sessions.sort(key=lambda s: (s.device_hash, s.start))
        return sessions

    def live_metric(
        self, metric: StatMetric, mac: str, window_s: float, at: datetime
    ) -> int:
        """Metric for ``mac`` over the half-open trailing window [at-w, at)."""
        if window_s <= 0:
            raise ValueError("window_s must be positive")
        mac = canonical_mac(mac)
        start = at - timedelta(seconds=window_s)
        hits = [
            r for r in self.records() if r.mac == mac and start <= r.timestamp < at
        ]
        if metric is StatMetric.VISIT_COUNT:
            return len(hits)
        return len({r.device_hash for r in hits})

    # -- persistence ---------------------------------------------------------

    def flush(self) -> None:
        with self._lock:
            if self._fp is not None:
                self._fp.flush()

    def close(self) -> None:
        with self._lock:
            if self._fp is not None:
                self._fp.close()
                self._fp = None

    def _load(self, path: Path) -> None:
        with open(path, encoding="utf-8") as fp:
            for lineno, line in enumerate(fp, start=1):
                if not line.strip():
                    continue
                try:
                    self._records.append(_record_from_line(line))
                except Exception as exc:
                    raise CorruptSnapshot(
                        f"presence log line {lineno}: {exc}", line=lineno
                    ) from exc


HEAT_MAP_CSV_HEADER = "mac,bucket_start,visit_count,unique_devices"


def heat_map_csv(cells: Iterable[HeatMapCell]) -> str:
    """Heat-map export format shared by the API and the CLI."""
    lines = [HEAT_MAP_CSV_HEADER]
    lines.extend(
        f"{c.mac},{format_rfc3339(c.bucket_start)},{c.visit_count},{c.unique_devices}"
        for c in cells
    )
    return "".join(line + "\n" for line in lines)


# Log line format: `timestamp,device_hash,mac,rssi_dbm,context` with the
# context macs semicolon-joined (possibly empty).


def _record_to_line(record: PresenceRecord) -> str:
    context = ";".join(record.context)
    return (
        f"{format_rfc3339(record.timestamp)},{record.device_hash},"
        f"{record.mac},{record.rssi_dbm},{context}"
    )


def _record_from_line(line: str) -> PresenceRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 5:
        raise ValueError("expected 5 comma-separated fields")
    ts_text, device_hash, mac, rssi_text, context_text = parts
    context = tuple(context_text.split(";")) if context_text else ()
    return PresenceRecord(
        timestamp=parse_rfc3339(ts_text),
        device_hash=device_hash,
        mac=canonical_mac(mac),
        rssi_dbm=int(rssi_text),
        context=tuple(canonical_mac(m) for m in context),
    )
