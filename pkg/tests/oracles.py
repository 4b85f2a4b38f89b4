"""Brute-force reference implementations used to check the real modules.

Everything here recomputes results from first principles with naive loops
and stays independent of the implementation paths it verifies: resolution
walks every rule instead of the MAC index, interference re-derives band
edges inline, heat maps use a plain group-by.
"""

import hashlib
import math
import random

from proxweb.presence import Observation, ScanReport, StatMetric
from proxweb.rules import Cmp, ProximityRule, StatPredicate


def resolve_oracle(rules, scan, stats):
    """Activations as (content_id, via_mac, rssi_dbm, rule_id) tuples."""
    matched = []
    for rule in rules:
        if not rule.enabled:
            continue
        for obs in scan.observations:
            if obs.mac != rule.trigger_mac:
                continue
            if rule.min_rssi_dbm is not None and obs.rssi_dbm < rule.min_rssi_dbm:
                continue
            if rule.stat is not None:
                value = stats(
                    rule.stat.metric, rule.trigger_mac, rule.stat.window_s, scan.timestamp
                )
                threshold = rule.stat.threshold
                op = rule.stat.cmp.value
                if op == "<":
                    ok = value < threshold
                elif op == "<=":
                    ok = value <= threshold
                elif op == ">":
                    ok = value > threshold
                else:
                    ok = value >= threshold
                if not ok:
                    continue
            matched.append((rule, obs))
    matched.sort(key=lambda pair: (-pair[0].priority, -pair[1].rssi_dbm, pair[0].rule_id))
    out = []
    seen = []
    for rule, obs in matched:
        for content_id in rule.content_ids:
            if content_id in seen:
                continue
            seen.append(content_id)
            out.append((content_id, obs.mac, obs.rssi_dbm, rule.rule_id))
    return out


def activations_as_tuples(activations):
    return [(a.content.content_id, a.via_mac, a.rssi_dbm, a.rule_id) for a in activations]


def interference_oracle(nodes, radius_m):
    """Naive pairwise check over (mac, protocol, channel, position) dicts.

    Band edges are re-derived here (center 2407+5c, or 2484 for channel
    14, +/- 11 MHz) rather than taken from the module under test.
    """
    pairs = []
    for b in nodes:
        if b["protocol"] != "BLE" or b.get("position") is None:
            continue
        for a in nodes:
            if a["protocol"] != "WIFI" or a.get("position") is None:
                continue
            bx, by = b["position"]
            ax, ay = a["position"]
            distance = math.sqrt((bx - ax) ** 2 + (by - ay) ** 2)
            if distance > radius_m:
                continue
            channel = a["channel"]
            center = 2484 if channel == 14 else 2407 + 5 * channel
            overlap = [
                f for f in (2402, 2426, 2480) if center - 11 <= f <= center + 11
            ]
            if overlap:
                pairs.append((b["mac"], a["mac"], distance, tuple(overlap)))
    pairs.sort(key=lambda p: (p[0], p[1]))
    return pairs


def heat_map_oracle(records, from_ts, to_ts, bucket_s, mac=None):
    """Group-by over (timestamp, device_hash, mac) tuples.

    Returns {(mac, bucket_index): (visit_count, unique_devices)}.
    """
    cells = {}
    for ts, device_hash, record_mac in records:
        if mac is not None and record_mac != mac:
            continue
        if ts < from_ts or ts >= to_ts:
            continue
        k = int((ts - from_ts).total_seconds() // bucket_s)
        cells.setdefault((record_mac, k), []).append(device_hash)
    return {
        key: (len(hashes), len(set(hashes))) for key, hashes in cells.items()
    }


def fake_stats(metric, mac, window_s, at):
    """Deterministic stand-in metric provider for randomized tests."""
    digest = hashlib.md5(f"{metric.value}|{mac}|{window_s}".encode()).hexdigest()
    return int(digest[:4], 16) % 10


MAC_POOL = [f"AA:00:00:00:00:{i:02X}" for i in range(1, 13)]
CONTENT_POOL = [f"c{i}" for i in range(1, 7)]


def random_scan(rng: random.Random, at) -> ScanReport:
    macs = rng.sample(MAC_POOL, rng.randint(0, 10))
    return ScanReport(
        device_id=f"dev-{rng.randint(0, 99):02d}",
        timestamp=at,
        observations=tuple(
            Observation(mac=m, rssi_dbm=rng.randint(-120, 0)) for m in macs
        ),
    )


def random_rule(rng: random.Random, index: int, mac_pool=None) -> ProximityRule:
    stat = None
    if rng.random() < 0.3:
        stat = StatPredicate(
            metric=rng.choice(list(StatMetric)),
            window_s=rng.choice([30, 60, 300, 900]),
            cmp=rng.choice(list(Cmp)),
            threshold=rng.randint(0, 8),
        )
    return ProximityRule(
        rule_id=f"rule-{index:03d}",
        trigger_mac=rng.choice(mac_pool or MAC_POOL),
        content_ids=tuple(
            rng.sample(CONTENT_POOL, rng.randint(1, 3))
        ),
        min_rssi_dbm=rng.randint(-100, -30) if rng.random() < 0.5 else None,
        stat=stat,
        priority=rng.randint(-5, 10),
        enabled=rng.random() < 0.85,
    )
