"""Deterministic wireless world generating scan reports.

Signal strength follows the log-distance path-loss model: RSSI at
distance d is ``p0 - 10*n*log10(d)`` dBm with d clamped to the 1 m
reference distance, plus optional log-normal shadowing. A node is visible
to a device when its (integer-rounded) RSSI reaches the receiver
sensitivity.

Determinism contract: identical scenarios, including the seed, produce
byte-identical scan streams. Shadowing draws come from a Mersenne Twister
uniform source (``random.Random``, whose ``random()`` sequence is
guaranteed stable across Python versions) pushed through an explicit
no-cache Box-Muller transform, one draw per (tick, device, node) in fixed
iteration order. With sigma at zero no draws are consumed, so geometry is
seed-independent.

Simulated time starts at the Unix epoch: tick k lands at
``1970-01-01T00:00:00Z + k * scan_interval_s``.
"""

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidMac, InvalidScenario
from .macaddr import canonical_mac
from .presence import RSSI_MAX_DBM, RSSI_MIN_DBM, Observation, ScanReport
from .registry import RadioProtocol
from .timeutil import epoch_to_utc

REFERENCE_DISTANCE_M = 1.0


@dataclass(frozen=True)
class PropagationParams:
    """Log-distance path-loss parameters; ``p0_dbm`` is RSSI at 1 m."""

    p0_dbm: float = -40.0
    n: float = 2.0
    sigma_db: float = 0.0
    sensitivity_dbm: float = -90.0


@dataclass(frozen=True)
class MobileEntity:
    """A moving thing: waypoint path traversed at constant speed.

    Past the last waypoint the entity holds position, or restarts the
    path when ``loop`` is set. Zero-length segments take zero time, so a
    path cannot encode a pause.
    """

    entity_id: str
    path: tuple[tuple[float, float], ...]
    speed_mps: float = 1.0
    loop: bool = False


@dataclass(frozen=True)
class ScenarioNode:
    """A simulated emitter: fixed at a position or riding an entity."""

    mac: str
    protocol: RadioProtocol
    position: tuple[float, float] | None = None
    entity_id: str | None = None


@dataclass(frozen=True)
class ScenarioDevice:
    """A scanning device and its motion."""

    device_id: str
    motion: MobileEntity


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[ScenarioNode, ...]
    devices: tuple[ScenarioDevice, ...]
    entities: tuple[MobileEntity, ...] = ()
    propagation: PropagationParams = field(default_factory=PropagationParams)
    scan_interval_s: float = 10.0
    duration_s: float = 60.0
    seed: int = 0


def rssi_at(distance_m: float, params: PropagationParams, noise_draw: float = 0.0) -> float:
    """RSSI in dBm at a distance; distances under 1 m clamp to 1 m."""
    d = max(distance_m, REFERENCE_DISTANCE_M)
    return params.p0_dbm - 10.0 * params.n * math.log10(d) + noise_draw


def max_visible_range_m(params: PropagationParams) -> float:
    """Distance at which zero-noise RSSI equals the sensitivity."""
    return 10.0 ** ((params.p0_dbm - params.sensitivity_dbm) / (10.0 * params.n))


def position_at(entity: MobileEntity, t_s: float) -> tuple[float, float]:
    """Piecewise-linear position along the path at constant speed."""
    path = entity.path
    if len(path) == 1:
        return path[0]
    lengths = [
        math.hypot(path[i + 1][0] - path[i][0], path[i + 1][1] - path[i][1])
        for i in range(len(path) - 1)
    ]
    total = sum(lengths)
    if total == 0.0:
        return path[0]
    duration = total / entity.speed_mps
    if entity.loop:
        t_s = t_s % duration
    elif t_s >= duration:
        return path[-1]
    travelled = t_s * entity.speed_mps
    for (start, end), seg_len in zip(zip(path, path[1:]), lengths):
        if seg_len == 0.0:
            continue
        if travelled <= seg_len:
            f = travelled / seg_len
            return (start[0] + f * (end[0] - start[0]), start[1] + f * (end[1] - start[1]))
        travelled -= seg_len
    return path[-1]


class _GaussianSource:
    """Standard-normal draws: MT19937 uniforms through Box-Muller, no cache."""

    def __init__(self, seed: int):
        self._uniform = random.Random(seed)

    def draw(self) -> float:
        u1 = 1.0 - self._uniform.random()  # (0, 1]: keeps log() finite
        u2 = self._uniform.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def validate_scenario(scenario: Scenario) -> None:
    """Check every scenario invariant, naming the offending field path."""
    p = scenario.propagation
    if p.n <= 0:
        raise InvalidScenario("path-loss exponent must be positive", "propagation.n")
    if p.sigma_db < 0:
        raise InvalidScenario("sigma must be >= 0", "propagation.sigma_db")
    if p.sensitivity_dbm >= p.p0_dbm:
        raise InvalidScenario(
            "sensitivity must be below the 1 m reference RSSI",
            "propagation.sensitivity_dbm",
        )
    if scenario.scan_interval_s <= 0:
        raise InvalidScenario("scan interval must be positive", "scan_interval_s")
    if scenario.duration_s <= 0:
        raise InvalidScenario("duration must be positive", "duration_s")
    if scenario.duration_s < scenario.scan_interval_s:
        raise InvalidScenario("duration must cover at least one interval", "duration_s")

    entity_ids: set[str] = set()
    for i, entity in enumerate(scenario.entities):
        _validate_entity(entity, f"entities[{i}]", entity_ids)
    device_ids: set[str] = set()
    for i, device in enumerate(scenario.devices):
        if not device.device_id:
            raise InvalidScenario("device_id must be non-empty", f"devices[{i}].device_id")
        if device.device_id in device_ids:
            raise InvalidScenario(
                f"duplicate device_id {device.device_id!r}", f"devices[{i}].device_id"
            )
        device_ids.add(device.device_id)
        _validate_entity(device.motion, f"devices[{i}].motion", entity_ids)
    if not scenario.devices:
        raise InvalidScenario("at least one device is required", "devices")

    macs: set[str] = set()
    for i, node in enumerate(scenario.nodes):
        try:
            mac = canonical_mac(node.mac)
        except InvalidMac as exc:
            raise InvalidScenario(str(exc), f"nodes[{i}].mac") from exc
        if mac in macs:
            raise InvalidScenario(f"duplicate mac {mac}", f"nodes[{i}].mac")
        macs.add(mac)
        if (node.position is None) == (node.entity_id is None):
            raise InvalidScenario(
                "node needs exactly one of position or entity_id", f"nodes[{i}]"
            )
        if node.entity_id is not None and node.entity_id not in entity_ids:
            raise InvalidScenario(
                f"attachment references unknown entity {node.entity_id!r}",
                f"nodes[{i}].entity_id",
            )


def _validate_entity(entity: MobileEntity, path: str, entity_ids: set[str]) -> None:
    if not entity.entity_id:
        raise InvalidScenario("entity_id must be non-empty", f"{path}.entity_id")
    if entity.entity_id in entity_ids:
        raise InvalidScenario(
            f"duplicate entity_id {entity.entity_id!r}", f"{path}.entity_id"
        )
    entity_ids.add(entity.entity_id)
    if len(entity.path) < 1:
        raise InvalidScenario("path needs at least one waypoint", f"{path}.path")
    if entity.speed_mps <= 0:
        raise InvalidScenario("speed must be positive", f"{path}.speed_mps")


def run(scenario: Scenario) -> list[ScanReport]:
    """Simulate the scenario: one scan per device per tick.

    Every device scans synchronously at t = 0, interval, ... <= duration
    and hears every node whose rounded RSSI reaches the sensitivity.
    Observations are sorted by MAC, reports by (time, device_id).
    """
    validate_scenario(scenario)
    params = scenario.propagation
    entities = {e.entity_id: e for e in scenario.entities}
    for device in scenario.devices:
        entities[device.motion.entity_id] = device.motion
    nodes = sorted(
        ((canonical_mac(n.mac), n) for n in scenario.nodes), key=lambda t: t[0]
    )
    devices = sorted(scenario.devices, key=lambda d: d.device_id)
    noise = _GaussianSource(scenario.seed)
    sigma = params.sigma_db

    reports = []
    ticks = int(math.floor(scenario.duration_s / scenario.scan_interval_s)) + 1
    for k in range(ticks):
        t = k * scenario.scan_interval_s
        timestamp = epoch_to_utc(t)
        for device in devices:
            dx, dy = position_at(device.motion, t)
            observations = []
            for mac, node in nodes:
                if node.position is not None:
                    nx, ny = node.position
                else:
                    nx, ny = position_at(entities[node.entity_id], t)
                draw = noise.draw() * sigma if sigma > 0 else 0.0
                level = rssi_at(math.hypot(dx - nx, dy - ny), params, draw)
                rounded = int(round(level))
                if rounded < params.sensitivity_dbm:
                    continue
                # Presence accepts [-120, 0]; saturate rather than emit
                # out-of-range integers under extreme parameters.
                rounded = max(RSSI_MIN_DBM, min(RSSI_MAX_DBM, rounded))
                observations.append(Observation(mac=mac, rssi_dbm=rounded))
            reports.append(
                ScanReport(
                    device_id=device.device_id,
                    timestamp=timestamp,
                    observations=tuple(observations),
                )
            )
    return reports


# -- scenario file ------------------------------------------------------------
#
# A scenario is a JSON document mirroring the Scenario fields: nodes,
# devices, entities, propagation, scan_interval_s, duration_s, seed.


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a Scenario from parsed JSON."""
    if not isinstance(data, dict):
        raise InvalidScenario("scenario must be a JSON object")
    try:
        entities = tuple(
            _entity_from_dict(e, f"entities[{i}]")
            for i, e in enumerate(data.get("entities", []))
        )
        nodes = tuple(
            _node_from_dict(n, f"nodes[{i}]") for i, n in enumerate(data.get("nodes", []))
        )
        devices = tuple(
            _device_from_dict(d, f"devices[{i}]")
            for i, d in enumerate(data.get("devices", []))
        )
        prop = data.get("propagation", {})
        defaults = PropagationParams()
        scenario = Scenario(
            nodes=nodes,
            devices=devices,
            entities=entities,
            propagation=PropagationParams(
                p0_dbm=float(prop.get("p0_dbm", defaults.p0_dbm)),
                n=float(prop.get("n", defaults.n)),
                sigma_db=float(prop.get("sigma_db", defaults.sigma_db)),
                sensitivity_dbm=float(
                    prop.get("sensitivity_dbm", defaults.sensitivity_dbm)
                ),
            ),
            scan_interval_s=float(data.get("scan_interval_s", 10.0)),
            duration_s=float(data["duration_s"]),
            seed=int(data.get("seed", 0)),
        )
    except InvalidScenario:
        raise
    except KeyError as exc:
        raise InvalidScenario(f"missing scenario field {exc.args[0]!r}", exc.args[0]) from exc
    except (TypeError, ValueError, InvalidMac) as exc:
        raise InvalidScenario(f"malformed scenario: {exc}") from exc
    validate_scenario(scenario)
    return scenario


def _point(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InvalidScenario("expected a [x, y] point", path)
    return (float(value[0]), float(value[1]))


def _entity_from_dict(data: dict, path: str, default_id: str | None = None) -> MobileEntity:
    entity_id = data.get("entity_id", default_id)
    if entity_id is None:
        raise InvalidScenario("entity_id is required", f"{path}.entity_id")
    raw_path = data.get("path")
    if not isinstance(raw_path, list) or not raw_path:
        raise InvalidScenario("path needs at least one waypoint", f"{path}.path")
    return MobileEntity(
        entity_id=str(entity_id),
        path=tuple(_point(p, f"{path}.path[{i}]") for i, p in enumerate(raw_path)),
        speed_mps=float(data.get("speed_mps", 1.0)),
        loop=bool(data.get("loop", False)),
    )


def _node_from_dict(data: dict, path: str) -> ScenarioNode:
    position = data.get("position")
    return ScenarioNode(
        mac=canonical_mac(str(data["mac"])),
        protocol=RadioProtocol(data["protocol"]),
        position=_point(position, f"{path}.position") if position is not None else None,
        entity_id=data.get("entity_id"),
    )


def _device_from_dict(data: dict, path: str) -> ScenarioDevice:
    device_id = str(data["device_id"])
    motion = data.get("motion")
    if not isinstance(motion, dict):
        raise InvalidScenario("device needs a motion object", f"{path}.motion")
    return ScenarioDevice(
        device_id=device_id,
        motion=_entity_from_dict(motion, f"{path}.motion", default_id=device_id),
    )
