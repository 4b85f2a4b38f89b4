import socket

import pytest
from fastapi.testclient import TestClient

from conftest import T0
from proxweb.errors import ERROR_CODES, PortInUse
from proxweb.service import PlatformState, ServeConfig, create_app, serve
from proxweb.timeutil import format_rfc3339

A = "AA:00:00:00:00:0A"
B = "AA:00:00:00:00:0B"

NODE = {
    "mac": A,
    "protocol": "BLE",
    "owner": "airline-x",
    "venue_id": "term-1",
    "position": [0.0, 0.0],
}


@pytest.fixture
def state(tmp_path):
    return PlatformState(tmp_path / "data", salt="test-salt")


@pytest.fixture
def client(state):
    with TestClient(create_app(state)) as c:
        yield c


def scan_body(device, at_s, observations):
    return {
        "device_id": device,
        "timestamp": format_rfc3339(T0.__class__.fromtimestamp(at_s, tz=T0.tzinfo)),
        "observations": [{"mac": m, "rssi_dbm": r} for m, r in observations],
    }


def seed_content_and_rule(client, rule_extra=None):
    assert client.put(
        "/contents", json={"content_id": "c1", "kind": "TEXT", "body": "hello"}
    ).status_code == 200
    rule = {"rule_id": "R1", "trigger_mac": A, "content_ids": ["c1"]}
    rule.update(rule_extra or {})
    response = client.put("/rules", json=rule)
    assert response.status_code == 200, response.text
    return response.json()["rule_id"]


class TestNodes:
    def test_empty_registry(self, client):
        assert client.get("/nodes").json() == []

    def test_register_and_list(self, client):
        response = client.post("/nodes", json=NODE)
        assert response.status_code == 201
        body = response.json()
        assert body["mac"] == A
        assert body["registered_at"].endswith("Z")
        listed = client.get("/nodes", params={"owner": "airline-x"}).json()
        assert [n["mac"] for n in listed] == [A]

    def test_duplicate_mac_409(self, client):
        client.post("/nodes", json=NODE)
        response = client.post("/nodes", json=NODE)
        assert response.status_code == 409
        assert response.json()["code"] == "DUPLICATE_MAC"

    def test_invalid_body_400(self, client):
        response = client.post("/nodes", json={"mac": A})
        assert response.status_code == 400
        assert response.json()["code"] == "INVALID_REQUEST"

    def test_patch_metadata(self, client):
        client.post("/nodes", json=NODE)
        response = client.patch(f"/nodes/{A}/metadata", json={"desc": "Gate A3"})
        assert response.json()["metadata"] == {"desc": "Gate A3"}
        response = client.patch(f"/nodes/{A}/metadata", json={"desc": None})
        assert response.json()["metadata"] == {}

    def test_patch_unknown_mac_404(self, client):
        response = client.patch(f"/nodes/{B}/metadata", json={"desc": "x"})
        assert response.status_code == 404
        assert response.json()["code"] == "UNKNOWN_MAC"

    def test_interference_endpoint(self, client):
        client.post("/nodes", json=NODE)
        client.post(
            "/nodes",
            json={
                "mac": B,
                "protocol": "WIFI",
                "owner": "it",
                "venue_id": "term-1",
                "position": [3.0, 0.0],
                "wifi_channel": 1,
            },
        )
        pairs = client.get("/venues/term-1/interference", params={"radius": 10}).json()
        assert pairs == [
            {"beacon_mac": A, "ap_mac": B, "distance_m": 3.0, "overlap_mhz": [2402]}
        ]


class TestRules:
    def test_put_get_delete(self, client):
        rule_id = seed_content_and_rule(client)
        rules = client.get("/rules", params={"mac": A}).json()
        assert [r["rule_id"] for r in rules] == [rule_id]
        assert client.delete(f"/rules/{rule_id}").status_code == 204
        assert client.get("/rules", params={"mac": A}).json() == []

    def test_delete_unknown_404(self, client):
        response = client.delete("/rules/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "UNKNOWN_RULE"

    def test_dangling_content_400(self, client):
        response = client.put(
            "/rules", json={"rule_id": "R1", "trigger_mac": A, "content_ids": ["c9"]}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "UNKNOWN_CONTENT"

    def test_put_rule_idempotent(self, client):
        seed_content_and_rule(client)
        before = client.get("/rules").json()
        seed_content_and_rule(client)
        assert client.get("/rules").json() == before

    def test_parse_endpoint(self, client):
        response = client.post(
            "/rules:parse", content=f"IF visible({A}) THEN show(c1) PRIORITY 2"
        )
        assert response.status_code == 200
        body = response.json()
        assert body["trigger_mac"] == A
        assert body["priority"] == 2
        assert body["rule_id"].startswith("r-")

    def test_parse_syntax_error_position(self, client):
        response = client.post("/rules:parse", content=f"IF visible({A}) THEN")
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "SYNTAX_ERROR"
        assert "column" in body["detail"]

    def test_rule_without_id_gets_deterministic_id(self, client):
        client.put("/contents", json={"content_id": "c1", "kind": "TEXT", "body": "x"})
        rule = {"trigger_mac": A, "content_ids": ["c1"]}
        first = client.put("/rules", json=rule).json()["rule_id"]
        second = client.put("/rules", json=rule).json()["rule_id"]
        assert first == second
        assert len(client.get("/rules").json()) == 1


class TestScansAndResolve:
    def test_resolve_empty_scan(self, client):
        response = client.post("/resolve", json=scan_body("d1", 100, []))
        assert response.status_code == 200
        assert response.json() == []

    def test_read_your_write_live_metric(self, client):
        response = client.post("/scans", json=scan_body("d1", 100, [(A, -50), (B, -60)]))
        assert response.json() == {"appended": 2}
        value = client.get(
            "/stats/live",
            params={"metric": "visit_count", "mac": A, "window": 60, "at": "160"},
        ).json()["value"]
        assert value == 1

    def test_resolve_returns_activations_in_order(self, client):
        seed_content_and_rule(client)
        response = client.post("/resolve", json=scan_body("d1", 100, [(A, -45)]))
        assert response.json() == [
            {
                "content": {"content_id": "c1", "kind": "TEXT", "body": "hello"},
                "via_mac": A,
                "rssi_dbm": -45,
                "rule_id": "R1",
            }
        ]

    def test_stat_gated_resolve_with_seeded_log(self, client):
        # rule requires unique_devices < 1 over 300 s; one prior sighting
        # of device D makes the predicate 1 < 1 = false
        seed_content_and_rule(
            client,
            {
                "stat": {
                    "metric": "unique_devices",
                    "window_s": 300,
                    "cmp": "<",
                    "threshold": 1,
                }
            },
        )
        client.post("/scans", json=scan_body("device-D", 100, [(A, -50)]))
        response = client.post("/resolve", json=scan_body("d2", 110, [(A, -50)]))
        assert response.json() == []

    def test_resolve_matches_in_process(self, client, state):
        seed_content_and_rule(client, {"min_rssi_dbm": -70})
        client.put("/contents", json={"content_id": "c2", "kind": "LINK", "body": "u"})
        client.put(
            "/rules",
            json={
                "rule_id": "R2",
                "trigger_mac": B,
                "content_ids": ["c2"],
                "priority": 3,
            },
        )
        client.post("/scans", json=scan_body("d1", 50, [(A, -60)]))
        body = scan_body("probe", 120, [(A, -60), (B, -40)])
        via_http = client.post("/resolve", json=body).json()
        from proxweb.service.schemas import ActivationView, ScanReportModel

        in_process = [
            ActivationView.from_activation(a).model_dump(mode="json")
            for a in state.resolve(ScanReportModel.model_validate(body).to_report())
        ]
        assert via_http == in_process

    def test_invalid_rssi_400(self, client):
        response = client.post("/scans", json=scan_body("d1", 100, [(A, 10)]))
        assert response.status_code == 400
        assert response.json()["code"] == "INVALID_RSSI"

    def test_duplicate_observation_400(self, client):
        response = client.post("/scans", json=scan_body("d1", 100, [(A, -50), (A, -60)]))
        assert response.status_code == 400
        assert response.json()["code"] == "DUPLICATE_OBSERVATION"


class TestStats:
    def seed(self, client):
        for device, t in (("d1", 100), ("d1", 130), ("d2", 150), ("d1", 400)):
            client.post("/scans", json=scan_body(device, t, [(A, -50)]))

    def test_heatmap_json(self, client):
        self.seed(client)
        cells = client.get(
            "/stats/heatmap", params={"from": "0", "to": "900", "bucket": 300}
        ).json()
        assert [(c["visit_count"], c["unique_devices"]) for c in cells] == [(3, 2), (1, 1)]

    def test_heatmap_csv(self, client):
        self.seed(client)
        response = client.get(
            "/stats/heatmap",
            params={"from": "0", "to": "900", "bucket": 300},
            headers={"accept": "text/csv"},
        )
        lines = response.text.splitlines()
        assert lines[0] == "mac,bucket_start,visit_count,unique_devices"
        assert lines[1] == f"{A},1970-01-01T00:00:00Z,3,2"

    def test_dwell(self, client):
        self.seed(client)
        sessions = client.get("/stats/dwell", params={"mac": A, "gap": 60}).json()
        d1 = [s for s in sessions if s["dwell_s"] == 30.0]
        assert len(d1) == 1

    def test_bad_metric_400(self, client):
        response = client.get(
            "/stats/live", params={"metric": "nope", "mac": A, "window": 60}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "INVALID_REQUEST"

    def test_bad_timestamp_400(self, client):
        response = client.get(
            "/stats/heatmap", params={"from": "whenever", "to": "900"}
        )
        assert response.status_code == 400


class TestConfig:
    def test_propagation_defaults_exposed(self, client):
        config = client.get("/config").json()
        assert config["propagation"] == {
            "p0_dbm": -40.0,
            "n": 2.0,
            "sigma_db": 0.0,
            "sensitivity_dbm": -90.0,
        }
        assert config["heat_map_bucket_s"] == 900
        assert config["session_gap_s"] == 60


class TestErrorCodes:
    def test_every_error_body_uses_documented_code(self, client):
        requests = [
            ("post", "/nodes", {"json": {"mac": "GG:00:00:00:00:01", "protocol": "BLE", "owner": "o", "venue_id": "v"}}),
            ("post", "/nodes", {"json": {"mac": A}}),
            ("patch", f"/nodes/{B}/metadata", {"json": {"k": "v"}}),
            ("put", "/rules", {"json": {"rule_id": "R", "trigger_mac": A, "content_ids": ["nope"]}}),
            ("delete", "/rules/missing", {}),
            ("post", "/rules:parse", {"content": "IF"}),
            ("post", "/scans", {"json": scan_body("d", 0, [(A, 10)])}),
            ("get", "/stats/heatmap", {"params": {"from": "10", "to": "0"}}),
        ]
        for method, url, kwargs in requests:
            response = getattr(client, method)(url, **kwargs)
            assert 400 <= response.status_code < 500
            assert response.json()["code"] in ERROR_CODES


class TestPersistenceAcrossRestart:
    def test_register_restart_node_persists(self, tmp_path):
        data_dir = tmp_path / "data"
        state1 = PlatformState(data_dir, salt="s")
        with TestClient(create_app(state1)) as client:
            client.post("/nodes", json=NODE)
            seed_content_and_rule(client)
            client.post("/scans", json=scan_body("d1", 5, [(A, -50)]))
        # lifespan shutdown flushed everything; now boot a fresh state
        state2 = PlatformState(data_dir, salt="s")
        with TestClient(create_app(state2)) as client:
            assert [n["mac"] for n in client.get("/nodes").json()] == [A]
            assert [r["rule_id"] for r in client.get("/rules").json()] == ["R1"]
            value = client.get(
                "/stats/live",
                params={"metric": "visit_count", "mac": A, "window": 60, "at": "30"},
            ).json()["value"]
            assert value == 1

    def test_corrupt_snapshot_reported(self, tmp_path):
        data_dir = tmp_path / "data"
        data_dir.mkdir()
        (data_dir / "nodes.jsonl").write_text("not json\n")
        from proxweb.errors import CorruptSnapshot

        with pytest.raises(CorruptSnapshot):
            PlatformState(data_dir, salt="s")


class TestServe:
    def test_port_in_use(self, tmp_path):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        blocker.listen(1)
        try:
            with pytest.raises(PortInUse):
                serve(ServeConfig(port=port, data_dir=str(tmp_path / "d")))
        finally:
            blocker.close()

    # PROXWEB_SALT override is exercised end-to-end against a live server
    # in test_cli.py::TestUrlMode.
