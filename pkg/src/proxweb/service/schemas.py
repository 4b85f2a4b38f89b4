"""Request/response models: JSON mirrors of the domain types.

Bodies carry the domain fields one-for-one; timestamps are RFC 3339 UTC
(naive inputs are taken as UTC). Converters to and from the core
dataclasses live next to the models they serve.
"""

from datetime import datetime, timezone
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, RootModel, field_validator

from ..presence import DwellSession, HeatMapCell, Observation, ScanReport, StatMetric
from ..registry import InterferencePair, Mobility, RadioProtocol, WirelessNode
from ..rules import (
    Activation,
    Cmp,
    ContentChunk,
    ContentKind,
    ProximityRule,
    StatPredicate,
)


def _utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


class NodeCreate(BaseModel):
    mac: str
    protocol: Literal["BLE", "WIFI"]
    owner: str
    venue_id: str
    position: tuple[float, float] | None = None
    mobility: Literal["FIXED", "MOVABLE"] = "FIXED"
    wifi_channel: int | None = None
    metadata: dict[str, str] = Field(default_factory=dict)

    def to_node(self) -> WirelessNode:
        return WirelessNode(
            mac=self.mac,
            protocol=RadioProtocol(self.protocol),
            owner=self.owner,
            venue_id=self.venue_id,
            position=self.position,
            mobility=Mobility(self.mobility),
            wifi_channel=self.wifi_channel,
            metadata=tuple(self.metadata.items()),
        )


class NodeView(BaseModel):
    mac: str
    protocol: str
    owner: str
    venue_id: str
    position: tuple[float, float] | None
    mobility: str
    wifi_channel: int | None
    metadata: dict[str, str]
    registered_at: datetime | None

    @classmethod
    def from_node(cls, node: WirelessNode) -> "NodeView":
        return cls(
            mac=node.mac,
            protocol=node.protocol.value,
            owner=node.owner,
            venue_id=node.venue_id,
            position=node.position,
            mobility=node.mobility.value,
            wifi_channel=node.wifi_channel,
            metadata=dict(node.metadata),
            registered_at=node.registered_at,
        )


class MetadataPatch(RootModel[dict[str, str | None]]):
    """Mapping of key to new value; null removes the key."""


class InterferencePairView(BaseModel):
    beacon_mac: str
    ap_mac: str
    distance_m: float
    overlap_mhz: list[int]

    @classmethod
    def from_pair(cls, pair: InterferencePair) -> "InterferencePairView":
        return cls(
            beacon_mac=pair.beacon_mac,
            ap_mac=pair.ap_mac,
            distance_m=pair.distance_m,
            overlap_mhz=list(pair.overlap_mhz),
        )


class ContentModel(BaseModel):
    content_id: str
    kind: Literal["TEXT", "IMAGE_URI", "LINK"]
    body: str

    def to_chunk(self) -> ContentChunk:
        return ContentChunk(
            content_id=self.content_id, kind=ContentKind(self.kind), body=self.body
        )

    @classmethod
    def from_chunk(cls, chunk: ContentChunk) -> "ContentModel":
        return cls(content_id=chunk.content_id, kind=chunk.kind.value, body=chunk.body)


class StatPredicateModel(BaseModel):
    metric: Literal["visit_count", "unique_devices"]
    window_s: int
    cmp: Literal["<", "<=", ">", ">="]
    threshold: int

    def to_predicate(self) -> StatPredicate:
        return StatPredicate(
            metric=StatMetric(self.metric),
            window_s=self.window_s,
            cmp=Cmp(self.cmp),
            threshold=self.threshold,
        )

    @classmethod
    def from_predicate(cls, pred: StatPredicate) -> "StatPredicateModel":
        return cls(
            metric=pred.metric.value,
            window_s=pred.window_s,
            cmp=pred.cmp.value,
            threshold=pred.threshold,
        )


class RuleModel(BaseModel):
    rule_id: str | None = None
    trigger_mac: str
    content_ids: list[str]
    min_rssi_dbm: int | None = None
    stat: StatPredicateModel | None = None
    priority: int = 0
    enabled: bool = True

    def to_rule(self) -> ProximityRule:
        return ProximityRule(
            rule_id=self.rule_id or "",
            trigger_mac=self.trigger_mac,
            content_ids=tuple(self.content_ids),
            min_rssi_dbm=self.min_rssi_dbm,
            stat=self.stat.to_predicate() if self.stat else None,
            priority=self.priority,
            enabled=self.enabled,
        )

    @classmethod
    def from_rule(cls, rule: ProximityRule) -> "RuleModel":
        return cls(
            rule_id=rule.rule_id,
            trigger_mac=rule.trigger_mac,
            content_ids=list(rule.content_ids),
            min_rssi_dbm=rule.min_rssi_dbm,
            stat=StatPredicateModel.from_predicate(rule.stat) if rule.stat else None,
            priority=rule.priority,
            enabled=rule.enabled,
        )


class ObservationModel(BaseModel):
    mac: str
    rssi_dbm: int


class ScanReportModel(BaseModel):
    device_id: str
    timestamp: datetime
    observations: list[ObservationModel]

    @field_validator("timestamp")
    @classmethod
    def _timestamp_utc(cls, value: datetime) -> datetime:
        return _utc(value)

    def to_report(self) -> ScanReport:
        return ScanReport(
            device_id=self.device_id,
            timestamp=self.timestamp,
            observations=tuple(
                Observation(mac=o.mac, rssi_dbm=o.rssi_dbm) for o in self.observations
            ),
        )


class ActivationView(BaseModel):
    content: ContentModel
    via_mac: str
    rssi_dbm: int
    rule_id: str

    @classmethod
    def from_activation(cls, activation: Activation) -> "ActivationView":
        return cls(
            content=ContentModel.from_chunk(activation.content),
            via_mac=activation.via_mac,
            rssi_dbm=activation.rssi_dbm,
            rule_id=activation.rule_id,
        )


class HeatMapCellView(BaseModel):
    mac: str
    bucket_start: datetime
    visit_count: int
    unique_devices: int

    @classmethod
    def from_cell(cls, cell: HeatMapCell) -> "HeatMapCellView":
        return cls(
            mac=cell.mac,
            bucket_start=cell.bucket_start,
            visit_count=cell.visit_count,
            unique_devices=cell.unique_devices,
        )


class DwellSessionView(BaseModel):
    device_hash: str
    mac: str
    start: datetime
    end: datetime
    dwell_s: float

    @classmethod
    def from_session(cls, session: DwellSession) -> "DwellSessionView":
        return cls(
            device_hash=session.device_hash,
            mac=session.mac,
            start=session.start,
            end=session.end,
            dwell_s=session.dwell_s,
        )


class IngestResult(BaseModel):
    appended: int


class StoredContent(BaseModel):
    content_id: str


class StoredRule(BaseModel):
    rule_id: str


class LiveMetricResult(BaseModel):
    value: int


class PropagationView(BaseModel):
    p0_dbm: float
    n: float
    sigma_db: float
    sensitivity_dbm: float


class ConfigView(BaseModel):
    propagation: PropagationView
    heat_map_bucket_s: int
    session_gap_s: int
    interference_radius_m: float


class ApiErrorBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    code: str
    message: str
    detail: str | None = None
