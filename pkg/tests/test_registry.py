import random

import pytest

from conftest import T0, make_node
from oracles import interference_oracle
from proxweb.errors import (
    ChannelMismatch,
    CorruptSnapshot,
    DuplicateMac,
    InvalidChannel,
    InvalidMac,
    InvalidNode,
    UnknownMac,
)
from proxweb.registry import BLE_ADVERTISING_MHZ, NodeRegistry, wifi_occupied_band


class TestRegister:
    def test_register_and_lookup(self, fixed_clock):
        reg = NodeRegistry(clock=fixed_clock)
        stored = reg.register(make_node("AA:00:00:00:00:01"))
        assert stored.registered_at == T0
        assert reg.get("AA:00:00:00:00:01") == stored

    def test_mac_normalized_on_ingest(self):
        reg = NodeRegistry()
        stored = reg.register(make_node("aa-00-00-00-00-0f"))
        assert stored.mac == "AA:00:00:00:00:0F"
        assert reg.get("aa:00:00:00:00:0f").mac == "AA:00:00:00:00:0F"

    def test_duplicate_mac_rejected(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        with pytest.raises(DuplicateMac):
            reg.register(make_node("aa:00:00:00:00:01", owner="other"))

    def test_invalid_mac(self):
        reg = NodeRegistry()
        with pytest.raises(InvalidMac):
            reg.register(make_node("GG:00:00:00:00:01"))
        with pytest.raises(InvalidMac):
            reg.register(make_node("AA:00:00:00:00"))

    def test_wifi_requires_channel(self):
        reg = NodeRegistry()
        with pytest.raises(ChannelMismatch):
            reg.register(make_node("AA:00:00:00:00:01", protocol="WIFI"))

    def test_ble_rejects_channel(self):
        reg = NodeRegistry()
        with pytest.raises(ChannelMismatch):
            reg.register(make_node("AA:00:00:00:00:01", wifi_channel=6))

    def test_channel_out_of_range(self):
        reg = NodeRegistry()
        with pytest.raises((ChannelMismatch, InvalidChannel)):
            reg.register(make_node("AA:00:00:00:00:01", protocol="WIFI", wifi_channel=15))

    def test_movable_node_rejects_position(self):
        reg = NodeRegistry()
        with pytest.raises(InvalidNode):
            reg.register(
                make_node("AA:00:00:00:00:01", mobility="MOVABLE", position=(1.0, 2.0))
            )


class TestMetadata:
    def test_upsert(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        node = reg.update_metadata("AA:00:00:00:00:01", {"desc": "Gate A3"})
        assert node.metadata == (("desc", "Gate A3"),)

    def test_delete(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        reg.update_metadata("AA:00:00:00:00:01", {"desc": "Gate A3"})
        node = reg.update_metadata("AA:00:00:00:00:01", {"desc": None})
        assert node.metadata == ()

    def test_unknown_mac(self):
        reg = NodeRegistry()
        with pytest.raises(UnknownMac):
            reg.update_metadata("AA:00:00:00:00:01", {"desc": "x"})

    def test_upsert_preserves_order(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01", metadata=[("a", "1"), ("b", "2")]))
        node = reg.update_metadata("AA:00:00:00:00:01", {"a": "9", "c": "3"})
        assert node.metadata == (("a", "9"), ("b", "2"), ("c", "3"))

    def test_pure_upserts_idempotent(self):
        rng = random.Random(7)
        for _ in range(20):
            reg = NodeRegistry()
            reg.register(
                make_node(
                    "AA:00:00:00:00:01",
                    metadata=[(f"k{i}", str(i)) for i in range(rng.randint(0, 4))],
                )
            )
            patch = {f"k{rng.randint(0, 6)}": str(rng.random()) for _ in range(3)}
            once = reg.update_metadata("AA:00:00:00:00:01", patch)
            twice = reg.update_metadata("AA:00:00:00:00:01", patch)
            assert once.metadata == twice.metadata


class TestListNodes:
    def test_empty(self):
        assert NodeRegistry().list_nodes(owner="anyone") == []

    def test_filter_by_owner(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:02", owner="airline-x"))
        reg.register(make_node("AA:00:00:00:00:01", owner="airline-x"))
        reg.register(make_node("AA:00:00:00:00:03", owner="cafe"))
        result = reg.list_nodes(owner="airline-x")
        assert [n.mac for n in result] == ["AA:00:00:00:00:01", "AA:00:00:00:00:02"]

    def test_no_filter_returns_all_sorted(self):
        reg = NodeRegistry()
        for mac in ["AA:00:00:00:00:03", "AA:00:00:00:00:01", "AA:00:00:00:00:02"]:
            reg.register(make_node(mac))
        assert [n.mac for n in reg.list_nodes()] == [
            "AA:00:00:00:00:01",
            "AA:00:00:00:00:02",
            "AA:00:00:00:00:03",
        ]

    def test_register_list_round_trip(self):
        rng = random.Random(3)
        reg = NodeRegistry()
        macs = {f"AA:00:00:{rng.randint(0,255):02X}:{rng.randint(0,255):02X}:{i:02X}" for i in range(15)}
        for mac in macs:
            reg.register(make_node(mac, owner=f"o{rng.randint(0,3)}"))
        assert {n.mac for n in reg.list_nodes()} == macs


class TestOccupiedBand:
    def test_known_channels(self):
        assert wifi_occupied_band(1) == (2401, 2423)
        assert wifi_occupied_band(6) == (2426, 2448)
        assert wifi_occupied_band(14) == (2473, 2495)

    def test_width_and_spacing(self):
        centers = []
        for channel in range(1, 15):
            low, high = wifi_occupied_band(channel)
            assert high - low == 22
            centers.append((low + high) // 2)
        for a, b in zip(centers[:12], centers[1:13]):
            assert b - a == 5

    def test_invalid_channel(self):
        for channel in (0, 15, -3):
            with pytest.raises(InvalidChannel):
                wifi_occupied_band(channel)


class TestInterference:
    def _venue(self, beacon_pos, ap_channel, ap_pos):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01", position=beacon_pos))
        reg.register(
            make_node(
                "BB:00:00:00:00:01",
                protocol="WIFI",
                wifi_channel=ap_channel,
                position=ap_pos,
            )
        )
        return reg

    def test_channel_1_overlaps_2402(self):
        reg = self._venue((0.0, 0.0), 1, (3.0, 0.0))
        pairs = reg.interference_report("term-1", radius_m=10)
        assert len(pairs) == 1
        assert pairs[0].overlap_mhz == (2402,)
        assert pairs[0].distance_m == pytest.approx(3.0)

    def test_channel_3_overlaps_2426(self):
        reg = self._venue((0.0, 0.0), 3, (3.0, 0.0))
        pairs = reg.interference_report("term-1", radius_m=10)
        assert len(pairs) == 1
        assert pairs[0].overlap_mhz == (2426,)

    def test_band_edge_counts_as_overlap(self):
        # channel 6 occupies [2426, 2448]; advertising channel 38 sits
        # exactly on the low edge
        reg = self._venue((0.0, 0.0), 6, (3.0, 0.0))
        pairs = reg.interference_report("term-1", radius_m=10)
        assert pairs and pairs[0].overlap_mhz == (2426,)

    def test_distance_gate(self):
        reg = self._venue((0.0, 0.0), 1, (50.0, 0.0))
        assert reg.interference_report("term-1", radius_m=10) == []

    def test_nodes_without_position_skipped(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01", mobility="MOVABLE"))
        reg.register(
            make_node("BB:00:00:00:00:01", protocol="WIFI", wifi_channel=1, position=(0.0, 0.0))
        )
        assert reg.interference_report("term-1", radius_m=10) == []

    def test_injected_position_for_movable_beacon(self):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01", mobility="MOVABLE"))
        reg.register(
            make_node("BB:00:00:00:00:01", protocol="WIFI", wifi_channel=1, position=(0.0, 0.0))
        )
        pairs = reg.interference_report(
            "term-1", radius_m=10, node_positions={"AA:00:00:00:00:01": (4.0, 0.0)}
        )
        assert len(pairs) == 1 and pairs[0].distance_m == pytest.approx(4.0)

    def test_matches_naive_oracle_on_random_venues(self):
        rng = random.Random(42)
        for _ in range(50):
            reg = NodeRegistry()
            plain = []
            for i in range(rng.randint(0, 30)):
                mac = f"AA:00:00:00:{rng.randint(0,255):02X}:{i:02X}"
                protocol = rng.choice(["BLE", "WIFI"])
                has_pos = rng.random() < 0.85
                position = (
                    (rng.uniform(-40, 40), rng.uniform(-40, 40)) if has_pos else None
                )
                channel = rng.randint(1, 14) if protocol == "WIFI" else None
                reg.register(
                    make_node(
                        mac,
                        protocol=protocol,
                        position=position,
                        wifi_channel=channel,
                        mobility="FIXED" if has_pos else "MOVABLE",
                    )
                )
                plain.append(
                    {"mac": mac, "protocol": protocol, "position": position, "channel": channel}
                )
            radius = rng.uniform(5, 60)
            got = reg.interference_report("term-1", radius_m=radius)
            expected = interference_oracle(plain, radius)
            assert [
                (p.beacon_mac, p.ap_mac, p.overlap_mhz) for p in got
            ] == [(b, a, o) for b, a, _, o in expected]
            for pair, (_, _, distance, _) in zip(got, expected):
                # hypot vs explicit sqrt may differ in the last bit
                assert pair.distance_m == pytest.approx(distance, abs=1e-9)

    def test_advertising_channel_constants(self):
        assert BLE_ADVERTISING_MHZ == (2402, 2426, 2480)


class TestSnapshot:
    def test_round_trip(self, tmp_path, fixed_clock):
        reg = NodeRegistry(clock=fixed_clock)
        reg.register(make_node("AA:00:00:00:00:02", metadata=[("desc", "Gate A3")]))
        reg.register(
            make_node(
                "AA:00:00:00:00:01",
                protocol="WIFI",
                wifi_channel=6,
                position=(1.5, -2.0),
            )
        )
        reg.register(make_node("AA:00:00:00:00:03", mobility="MOVABLE"))
        path = tmp_path / "nodes.jsonl"
        reg.save_snapshot(path)
        loaded = NodeRegistry.load_snapshot(path)
        assert loaded.list_nodes() == reg.list_nodes()

    def test_export_field_order(self, tmp_path):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        line = reg.export_snapshot().splitlines()[0]
        keys = list(__import__("json").loads(line).keys())
        assert keys == [
            "mac",
            "protocol",
            "owner",
            "venue_id",
            "position",
            "mobility",
            "wifi_channel",
            "metadata",
            "registered_at",
        ]

    def test_bad_line_rejects_whole_file(self, tmp_path):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        path = tmp_path / "nodes.jsonl"
        text = reg.export_snapshot() + "this is not json\n"
        path.write_text(text)
        with pytest.raises(CorruptSnapshot) as err:
            NodeRegistry.load_snapshot(path)
        assert err.value.line == 2
        assert "line 2" in str(err.value)

    def test_duplicate_mac_in_file(self, tmp_path):
        reg = NodeRegistry()
        reg.register(make_node("AA:00:00:00:00:01"))
        path = tmp_path / "nodes.jsonl"
        path.write_text(reg.export_snapshot() * 2)
        with pytest.raises(CorruptSnapshot) as err:
            NodeRegistry.load_snapshot(path)
        assert err.value.line == 2
