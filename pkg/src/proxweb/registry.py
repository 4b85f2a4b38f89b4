"""Common-use database of wireless nodes.

Owners register their BLE beacons and Wi-Fi access points here, with
venue placement and free-form metadata. The registry also reports
radio-interference candidates: beacon/AP pairs that are both physically
close and spectrally overlapping.

The registry is a static catalog: movable nodes carry no position here
(their position lives in simulation scenarios and may be injected into
``interference_report`` per call).
"""

import json
import math
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping

from .errors import (
    ChannelMismatch,
    CorruptSnapshot,
    DuplicateMac,
    InvalidChannel,
    InvalidNode,
    UnknownMac,
)
from .macaddr import canonical_mac
from .timeutil import format_rfc3339, parse_rfc3339, utc_now

# BLE advertising channels 37/38/39 sit at fixed center frequencies.
BLE_ADVERTISING_MHZ = (2402, 2426, 2480)

DEFAULT_INTERFERENCE_RADIUS_M = 25.0


class RadioProtocol(Enum):
    BLE = "BLE"
    WIFI = "WIFI"


class Mobility(Enum):
    FIXED = "FIXED"
    MOVABLE = "MOVABLE"


@dataclass(frozen=True)
class WirelessNode:
    """A registered radio emitter.

    ``position`` is a venue-local planar point in meters and is only
    meaningful for FIXED nodes. ``wifi_channel`` is required for WIFI
    nodes and forbidden for BLE. ``metadata`` is an ordered sequence of
    (key, value) pairs with unique keys.
    """

    mac: str
    protocol: RadioProtocol
    owner: str
    venue_id: str
    position: tuple[float, float] | None = None
    mobility: Mobility = Mobility.FIXED
    wifi_channel: int | None = None
    metadata: tuple[tuple[str, str], ...] = ()
    registered_at: datetime | None = None


@dataclass(frozen=True)
class InterferencePair:
    """A beacon/AP pair flagged as an interference candidate."""

    beacon_mac: str
    ap_mac: str
    distance_m: float
    overlap_mhz: tuple[int, ...]


def wifi_occupied_band(channel: int) -> tuple[int, int]:
    """Occupied spectrum (low, high) in MHz of a 2.4 GHz Wi-Fi channel.

    Channels 1..13 are centered at 2407 + 5*channel MHz; channel 14 is the
    2484 MHz special case. The occupied band is 22 MHz wide.
    """
    if not isinstance(channel, int) or isinstance(channel, bool) or not 1 <= channel <= 14:
        raise InvalidChannel(f"Wi-Fi channel must be 1..14, got {channel!r}")
    center = 2484 if channel == 14 else 2407 + 5 * channel
    return center - 11, center + 11


def _validated(node: WirelessNode) -> WirelessNode:
    """Normalize the MAC and enforce node invariants."""
    mac = canonical_mac(node.mac)
    if node.protocol is RadioProtocol.WIFI:
        if node.wifi_channel is None:
            raise ChannelMismatch(f"WIFI node {mac} requires wifi_channel")
        wifi_occupied_band(node.wifi_channel)  # range check
    elif node.wifi_channel is not None:
        raise ChannelMismatch(f"BLE node {mac} must not carry wifi_channel")
    if node.position is not None:
        if node.mobility is not Mobility.FIXED:
            raise InvalidNode(f"movable node {mac} must not carry a registry position")
        x, y = node.position
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidNode(f"node {mac} position must be finite")
        node = replace(node, position=(float(x), float(y)))
    keys = [k for k, _ in node.metadata]
    if len(keys) != len(set(keys)):
        raise InvalidNode(f"node {mac} metadata keys must be unique")
    return replace(node, mac=mac, metadata=tuple(node.metadata))


class NodeRegistry:
    """Thread-safe in-process node catalog with snapshot export/import.

    Writes are serialized; reads copy out immutable nodes, so every
    caller sees a consistent view.
    """

    def __init__(self, clock: Callable[[], datetime] = utc_now):
        self._lock = threading.Lock()
        self._nodes: dict[str, WirelessNode] = {}
        self._clock = clock

    def __len__(self) -> int:
        return len(self._nodes)

    def register(self, node: WirelessNode) -> WirelessNode:
        """Store a new node; ``registered_at`` is set by the registry clock."""
        node = _validated(replace(node, registered_at=self._clock()))
        with self._lock:
            if node.mac in self._nodes:
                raise DuplicateMac(f"{node.mac} is already registered")
            self._nodes[node.mac] = node
        return node

    def get(self, mac: str) -> WirelessNode:
        mac = canonical_mac(mac)
        with self._lock:
            try:
                return self._nodes[mac]
            except KeyError:
                raise UnknownMac(f"{mac} is not registered") from None

    def update_metadata(self, mac: str, patch: Mapping[str, str | None]) -> WirelessNode:
        """Apply a metadata patch: value upserts the key, None removes it."""
        mac = canonical_mac(mac)
        with self._lock:
            if mac not in self._nodes:
                raise UnknownMac(f"{mac} is not registered")
            meta = list(self._nodes[mac].metadata)
            for key, value in patch.items():
                idx = next((i for i, (k, _) in enumerate(meta) if k == key), None)
                if value is None:
                    if idx is not None:
                        meta.pop(idx)
                elif idx is not None:
                    meta[idx] = (key, value)
                else:
                    meta.append((key, value))
            updated = replace(self._nodes[mac], metadata=tuple(meta))
            self._nodes[mac] = updated
        return updated

    def list_nodes(
        self,
        owner: str | None = None,
        venue_id: str | None = None,
        protocol: RadioProtocol | None = None,
        mobility: Mobility | None = None,
    ) -> list[WirelessNode]:
        """All nodes matching every present filter, ascending by MAC."""
        with self._lock:
            nodes = list(self._nodes.values())
        out = [
            n
            for n in nodes
            if (owner is None or n.owner == owner)
            and (venue_id is None or n.venue_id == venue_id)
            and (protocol is None or n.protocol is protocol)
            and (mobility is None or n.mobility is mobility)
        ]
        out.sort(key=lambda n: n.mac)
        return out

    def interference_report(
        self,
        venue_id: str,
        radius_m: float = DEFAULT_INTERFERENCE_RADIUS_M,
        node_positions: Mapping[str, tuple[float, float]] | None = None,
    ) -> list[InterferencePair]:
        """Beacon/AP pairs within ``radius_m`` whose spectra overlap.

        A pair is reported when the Euclidean distance between the BLE
        beacon and the Wi-Fi AP is at most ``radius_m`` and at least one
        BLE advertising frequency falls inside the AP's occupied band
        (band edges count as overlap). ``node_positions`` supplies or
        overrides positions, e.g. for movable nodes placed by a scenario;
        pairs lacking a position on either side are skipped.
        """
        if radius_m <= 0:
            raise ValueError("radius_m must be positive")
        overrides = {
            canonical_mac(m): (float(x), float(y))
            for m, (x, y) in (node_positions or {}).items()
        }
        with self._lock:
            venue = [n for n in self._nodes.values() if n.venue_id == venue_id]

        def position_of(node: WirelessNode) -> tuple[float, float] | None:
            return overrides.get(node.mac, node.position)

        beacons = sorted(
            ((n, position_of(n)) for n in venue if n.protocol is RadioProtocol.BLE),
            key=lambda t: t[0].mac,
        )
        aps = sorted(
            ((n, position_of(n)) for n in venue if n.protocol is RadioProtocol.WIFI),
            key=lambda t: t[0].mac,
        )
        pairs = []
        for beacon, bpos in beacons:
            if bpos is None:
                continue
            for ap, apos in aps:
                if apos is None:
                    continue
                distance = math.hypot(bpos[0] - apos[0], bpos[1] - apos[1])
                if distance > radius_m:
                    continue
                low, high = wifi_occupied_band(ap.wifi_channel)
                overlap = tuple(f for f in BLE_ADVERTISING_MHZ if low <= f <= high)
                if overlap:
                    pairs.append(
                        InterferencePair(
                            beacon_mac=beacon.mac,
                            ap_mac=ap.mac,
                            distance_m=distance,
                            overlap_mhz=overlap,
                        )
                    )
        return pairs

    # -- snapshot persistence ------------------------------------------------

    def export_snapshot(self) -> str:
        """One JSON record per line, nodes in MAC order."""
        lines = [json.dumps(_node_to_record(n)) for n in self.list_nodes()]
        return "".join(line + "\n" for line in lines)

    def save_snapshot(self, path: str | Path) -> None:
        Path(path).write_text(self.export_snapshot(), encoding="utf-8")

    @classmethod
    def load_snapshot(
        cls, path: str | Path, clock: Callable[[], datetime] = utc_now
    ) -> "NodeRegistry":
        """Load a snapshot, rejecting the whole file on the first bad line."""
        registry = cls(clock=clock)
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                raise CorruptSnapshot(f"line {lineno}: blank line", line=lineno)
            try:
                node = _validated(_node_from_record(json.loads(line)))
            except CorruptSnapshot:
                raise
            except Exception as exc:
                raise CorruptSnapshot(f"line {lineno}: {exc}", line=lineno) from exc
            if node.mac in registry._nodes:
                raise CorruptSnapshot(
                    f"line {lineno}: duplicate mac {node.mac}", line=lineno
                )
            registry._nodes[node.mac] = node
        return registry


_SNAPSHOT_FIELDS = (
    "mac",
    "protocol",
    "owner",
    "venue_id",
    "position",
    "mobility",
    "wifi_channel",
    "metadata",
    "registered_at",
)


def _node_to_record(node: WirelessNode) -> dict:
    return {
        "mac": node.mac,
        "protocol": node.protocol.value,
        "owner": node.owner,
        "venue_id": node.venue_id,
        "position": list(node.position) if node.position else None,
        "mobility": node.mobility.value,
        "wifi_channel": node.wifi_channel,
        "metadata": {k: v for k, v in node.metadata},
        "registered_at": format_rfc3339(node.registered_at) if node.registered_at else None,
    }


def _node_from_record(record: dict) -> WirelessNode:
    if not isinstance(record, dict):
        raise ValueError("record must be an object")
    missing = [f for f in _SNAPSHOT_FIELDS if f not in record]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    extra = [f for f in record if f not in _SNAPSHOT_FIELDS]
    if extra:
        raise ValueError(f"unknown fields: {', '.join(extra)}")
    position = record["position"]
    metadata = record["metadata"]
    if not isinstance(metadata, dict):
        raise ValueError("metadata must be an object")
    return WirelessNode(
        mac=record["mac"],
        protocol=RadioProtocol(record["protocol"]),
        owner=record["owner"],
        venue_id=record["venue_id"],
        position=(float(position[0]), float(position[1])) if position else None,
        mobility=Mobility(record["mobility"]),
        wifi_channel=record["wifi_channel"],
        metadata=tuple((str(k), str(v)) for k, v in metadata.items()),
        registered_at=parse_rfc3339(record["registered_at"])
        if record["registered_at"]
        else None,
    )
