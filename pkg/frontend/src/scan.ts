// Synthetic scan construction for the ghost device.
//
// The only math this client performs: the same log-distance path loss the
// platform uses, with the parameters fetched from GET /config. Everything
// downstream (rule matching, ordering, statistics) happens on the server.

import type { NodeView, ObservationModel, Point, PropagationView, ScanReportModel } from "./types.js";

export const GHOST_DEVICE_ID = "ghost-preview";

/** Round half to even, matching the platform's integer-RSSI convention. */
export function roundHalfToEven(value: number): number {
  const floor = Math.floor(value);
  const diff = value - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

/** Zero-noise RSSI at a distance; distances under 1 m clamp to 1 m. */
export function rssiAt(distanceM: number, propagation: PropagationView): number {
  const d = Math.max(distanceM, 1.0);
  return propagation.p0_dbm - 10 * propagation.n * Math.log10(d);
}

/**
 * The scan the ghost device would report from `ghost`: every positioned
 * node whose rounded RSSI reaches the sensitivity, observations sorted
 * by MAC.
 */
export function synthesizeScan(
  ghost: Point,
  nodes: NodeView[],
  propagation: PropagationView,
  timestamp: string,
  deviceId: string = GHOST_DEVICE_ID,
): ScanReportModel {
  const observations: ObservationModel[] = [];
  for (const node of nodes) {
    if (!node.position) continue; // movable nodes carry no registry position
    const [nx, ny] = node.position;
    const level = rssiAt(Math.hypot(ghost.x - nx, ghost.y - ny), propagation);
    const rssi = roundHalfToEven(level);
    if (rssi < propagation.sensitivity_dbm) continue;
    observations.push({ mac: node.mac, rssi_dbm: Math.max(-120, Math.min(0, rssi)) });
  }
  observations.sort((a, b) => (a.mac < b.mac ? -1 : a.mac > b.mac ? 1 : 0));
  return { device_id: deviceId, timestamp, observations };
}
