"""Platform state: the three stores plus their on-disk layout.

Registry and rule snapshots are rewritten after every mutation (they are
small), so a crash can never lose them; the presence log appends and
flushes on each ingest, so a crash loses at most analytics lines that
were never acknowledged.
"""

from datetime import datetime
from pathlib import Path
from typing import Callable, Mapping

from ..presence import PresenceLog, ScanReport
from ..registry import NodeRegistry, WirelessNode
from ..rules import Activation, ContentChunk, ProximityRule, RuleStore
from ..simulator import PropagationParams
from ..timeutil import utc_now

DEFAULT_SALT = "proxweb"


class PlatformState:
    def __init__(
        self,
        data_dir: str | Path,
        salt: str = DEFAULT_SALT,
        propagation: PropagationParams | None = None,
        clock: Callable[[], datetime] = utc_now,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._nodes_path = self.data_dir / "nodes.jsonl"
        self._contents_path = self.data_dir / "contents.jsonl"
        self._rules_path = self.data_dir / "rules.jsonl"
        self._presence_path = self.data_dir / "presence.log"

        if self._nodes_path.exists():
            self.registry = NodeRegistry.load_snapshot(self._nodes_path, clock=clock)
        else:
            self.registry = NodeRegistry(clock=clock)
        self.rules = RuleStore.load_snapshot(self._contents_path, self._rules_path)
        self.presence = PresenceLog(salt, path=self._presence_path)
        self.propagation = propagation or PropagationParams()

    # -- registry ------------------------------------------------------------

    def register_node(self, node: WirelessNode) -> WirelessNode:
        stored = self.registry.register(node)
        self.registry.save_snapshot(self._nodes_path)
        return stored

    def update_metadata(self, mac: str, patch: Mapping[str, str | None]) -> WirelessNode:
        node = self.registry.update_metadata(mac, patch)
        self.registry.save_snapshot(self._nodes_path)
        return node

    # -- rules ---------------------------------------------------------------

    def put_content(self, chunk: ContentChunk) -> str:
        content_id = self.rules.put_content(chunk)
        self._save_rules()
        return content_id

    def put_rule(self, rule: ProximityRule) -> str:
        rule_id = self.rules.put_rule(rule)
        self._save_rules()
        return rule_id

    def delete_rule(self, rule_id: str) -> None:
        self.rules.delete_rule(rule_id)
        self._save_rules()

    # -- presence / resolution -------------------------------------------------

    def ingest_scan(self, report: ScanReport) -> int:
        return self.presence.ingest_scan(report)

    def resolve(self, scan: ScanReport) -> list[Activation]:
        return self.rules.resolve(scan, self.presence.live_metric)

    # -- lifecycle -------------------------------------------------------------

    def save(self) -> None:
        self.registry.save_snapshot(self._nodes_path)
        self._save_rules()
        self.presence.flush()

    def close(self) -> None:
        self.save()
        self.presence.close()

    def _save_rules(self) -> None:
        self.rules.save_snapshot(self._contents_path, self._rules_path)
