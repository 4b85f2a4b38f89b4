"""Proximity rules: MAC-keyed content activation.

A rule maps a trigger MAC (the key) to an ordered vector of content
chunks (the value), optionally gated on minimum signal strength and on a
live statistics predicate. ``resolve`` turns one scan into the ordered
list of activations a context-aware browser should display.
"""

import json
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .errors import (
    CorruptSnapshot,
    InvalidContent,
    InvalidThreshold,
    UnknownContent,
    UnknownRule,
)
from .macaddr import canonical_mac
from .presence import ScanReport, StatMetric


class ContentKind(Enum):
    TEXT = "TEXT"
    IMAGE_URI = "IMAGE_URI"
    LINK = "LINK"


class Cmp(Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    def evaluate(self, value: int, threshold: int) -> bool:
        if self is Cmp.LT:
            return value < threshold
        if self is Cmp.LE:
            return value <= threshold
        if self is Cmp.GT:
            return value > threshold
        return value >= threshold


@dataclass(frozen=True)
class ContentChunk:
    content_id: str
    kind: ContentKind
    body: str

    def __post_init__(self):
        if not self.content_id:
            raise InvalidContent("content_id must be non-empty")
        if not self.body:
            raise InvalidContent(f"content {self.content_id}: body must be non-empty")


@dataclass(frozen=True)
class StatPredicate:
    """Compare a live metric for the rule's trigger MAC against a threshold.

    The metric is evaluated over the trailing window ending at the scan
    timestamp.
    """

    metric: StatMetric
    window_s: int
    cmp: Cmp
    threshold: int

    def __post_init__(self):
        if self.window_s <= 0:
            raise InvalidThreshold(f"stat window must be positive, got {self.window_s}")
        if self.threshold < 0:
            raise InvalidThreshold(f"stat threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class ProximityRule:
    rule_id: str
    trigger_mac: str
    content_ids: tuple[str, ...]
    min_rssi_dbm: int | None = None
    stat: StatPredicate | None = None
    priority: int = 0
    enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "trigger_mac", canonical_mac(self.trigger_mac))
        object.__setattr__(self, "content_ids", tuple(self.content_ids))
        if not self.content_ids:
            raise InvalidContent(f"rule {self.rule_id}: content_ids must be non-empty")


@dataclass(frozen=True)
class Activation:
    """One content chunk activated by a scan, with its provenance."""

    content: ContentChunk
    via_mac: str
    rssi_dbm: int
    rule_id: str


# Answers "metric for mac over the window_s trailing window ending at". The
# presence log's live_metric has exactly this shape.
StatsProvider = Callable[[StatMetric, str, float, datetime], int]


def null_stats(metric: StatMetric, mac: str, window_s: float, at: datetime) -> int:
    """Stats provider for contexts with no presence log: everything is 0."""
    return 0


def evaluate_stat(
    pred: StatPredicate, mac: str, at: datetime, stats: StatsProvider
) -> bool:
    value = stats(pred.metric, mac, pred.window_s, at)
    return pred.cmp.evaluate(value, pred.threshold)


class RuleStore:
    """Rules and contents keyed for the resolver, with serialized writes.

    Rules are retrievable by trigger MAC (the key-value model), so
    resolution only ever touches rules for MACs actually present in a
    scan.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._contents: dict[str, ContentChunk] = {}
        self._rules: dict[str, ProximityRule] = {}
        self._by_mac: dict[str, list[str]] = {}

    def put_content(self, chunk: ContentChunk) -> str:
        with self._lock:
            self._contents[chunk.content_id] = chunk
        return chunk.content_id

    def get_content(self, content_id: str) -> ContentChunk:
        with self._lock:
            try:
                return self._contents[content_id]
            except KeyError:
                raise UnknownContent(f"no content with id {content_id!r}") from None

    def list_contents(self) -> list[ContentChunk]:
        with self._lock:
            return sorted(self._contents.values(), key=lambda c: c.content_id)

    def put_rule(self, rule: ProximityRule) -> str:
        """Upsert a rule; all referenced content ids must already be stored."""
        with self._lock:
            missing = [c for c in rule.content_ids if c not in self._contents]
            if missing:
                raise UnknownContent(
                    f"rule {rule.rule_id}: unknown content ids {', '.join(missing)}"
                )
            previous = self._rules.get(rule.rule_id)
            if previous is not None:
                self._by_mac[previous.trigger_mac].remove(rule.rule_id)
            self._rules[rule.rule_id] = rule
            self._by_mac.setdefault(rule.trigger_mac, []).append(rule.rule_id)
        return rule.rule_id

    def get_rule(self, rule_id: str) -> ProximityRule:
        with self._lock:
            try:
                return self._rules[rule_id]
            except KeyError:
                raise UnknownRule(f"no rule with id {rule_id!r}") from None

    def delete_rule(self, rule_id: str) -> None:
        with self._lock:
            rule = self._rules.pop(rule_id, None)
            if rule is None:
                raise UnknownRule(f"no rule with id {rule_id!r}")
            self._by_mac[rule.trigger_mac].remove(rule_id)

    def rules_for_mac(self, mac: str) -> list[ProximityRule]:
        mac = canonical_mac(mac)
        with self._lock:
            return [self._rules[rid] for rid in self._by_mac.get(mac, ())]

    def list_rules(self) -> list[ProximityRule]:
        with self._lock:
            return sorted(self._rules.values(), key=lambda r: r.rule_id)

    def resolve(self, scan: ScanReport, stats: StatsProvider) -> list[Activation]:
        """Activations for one scan, fully ordered and deduplicated.

        A rule fires when it is enabled, its trigger MAC was observed, the
        observation is at least min_rssi_dbm (when set), and its stat
        predicate holds (when set). Firing rules are ordered by priority
        desc, then observed RSSI desc, then rule_id asc; their chunks are
        emitted in rule order, and a content id appears at most once, the
        first occurrence winning. MACs with no rules contribute nothing.
        """
        with self._lock:
            matches = []
            for obs in scan.observations:
                for rule_id in self._by_mac.get(obs.mac, ()):
                    rule = self._rules[rule_id]
                    if not rule.enabled:
                        continue
                    if rule.min_rssi_dbm is not None and obs.rssi_dbm < rule.min_rssi_dbm:
                        continue
                    if rule.stat is not None and not evaluate_stat(
                        rule.stat, rule.trigger_mac, scan.timestamp, stats
                    ):
                        continue
                    matches.append((rule, obs))
            matches.sort(key=lambda m: (-m[0].priority, -m[1].rssi_dbm, m[0].rule_id))
            activations = []
            seen: set[str] = set()
            for rule, obs in matches:
                for content_id in rule.content_ids:
                    if content_id in seen:
                        continue
                    seen.add(content_id)
                    chunk = self._contents.get(content_id)
                    if chunk is None:
                        raise UnknownContent(
                            f"rule {rule.rule_id} references missing content {content_id!r}"
                        )
                    activations.append(
                        Activation(
                            content=chunk,
                            via_mac=obs.mac,
                            rssi_dbm=obs.rssi_dbm,
                            rule_id=rule.rule_id,
                        )
                    )
        return activations

    # -- snapshot persistence ------------------------------------------------

    def export_contents(self) -> str:
        lines = [
            json.dumps(
                {"content_id": c.content_id, "kind": c.kind.value, "body": c.body}
            )
            for c in self.list_contents()
        ]
        return "".join(line + "\n" for line in lines)

    def export_rules(self) -> str:
        lines = [json.dumps(rule_to_record(r)) for r in self.list_rules()]
        return "".join(line + "\n" for line in lines)

    def save_snapshot(self, contents_path: str | Path, rules_path: str | Path) -> None:
        Path(contents_path).write_text(self.export_contents(), encoding="utf-8")
        Path(rules_path).write_text(self.export_rules(), encoding="utf-8")

    @classmethod
    def load_snapshot(
        cls, contents_path: str | Path, rules_path: str | Path
    ) -> "RuleStore":
        store = cls()
        contents_path = Path(contents_path)
        rules_path = Path(rules_path)
        if contents_path.exists():
            for lineno, line in _snapshot_lines(contents_path):
                try:
                    record = json.loads(line)
                    store.put_content(
                        ContentChunk(
                            content_id=record["content_id"],
                            kind=ContentKind(record["kind"]),
                            body=record["body"],
                        )
                    )
                except Exception as exc:
                    raise CorruptSnapshot(
                        f"{contents_path.name} line {lineno}: {exc}", line=lineno
                    ) from exc
        if rules_path.exists():
            for lineno, line in _snapshot_lines(rules_path):
                try:
                    store.put_rule(rule_from_record(json.loads(line)))
                except Exception as exc:
                    raise CorruptSnapshot(
                        f"{rules_path.name} line {lineno}: {exc}", line=lineno
                    ) from exc
        return store


def _snapshot_lines(path: Path) -> Iterable[tuple[int, str]]:
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield lineno, line


def rule_to_record(rule: ProximityRule) -> dict:
    return {
        "rule_id": rule.rule_id,
        "trigger_mac": rule.trigger_mac,
        "min_rssi_dbm": rule.min_rssi_dbm,
        "stat": None
        if rule.stat is None
        else {
            "metric": rule.stat.metric.value,
            "window_s": rule.stat.window_s,
            "cmp": rule.stat.cmp.value,
            "threshold": rule.stat.threshold,
        },
        "priority": rule.priority,
        "content_ids": list(rule.content_ids),
        "enabled": rule.enabled,
    }


def rule_from_record(record: dict) -> ProximityRule:
    stat = record.get("stat")
    return ProximityRule(
        rule_id=record["rule_id"],
        trigger_mac=record["trigger_mac"],
        content_ids=tuple(record["content_ids"]),
        min_rssi_dbm=record.get("min_rssi_dbm"),
        stat=None
        if stat is None
        else StatPredicate(
            metric=StatMetric(stat["metric"]),
            window_s=int(stat["window_s"]),
            cmp=Cmp(stat["cmp"]),
            threshold=int(stat["threshold"]),
        ),
        priority=int(record.get("priority", 0)),
        enabled=bool(record.get("enabled", True)),
    )
