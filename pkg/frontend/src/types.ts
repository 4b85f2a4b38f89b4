// Wire types mirroring the service API, field for field.

export interface NodeView {
  mac: string;
  protocol: "BLE" | "WIFI";
  owner: string;
  venue_id: string;
  position: [number, number] | null;
  mobility: "FIXED" | "MOVABLE";
  wifi_channel: number | null;
  metadata: Record<string, string>;
  registered_at: string | null;
}

export type StatMetric = "visit_count" | "unique_devices";
export type StatCmp = "<" | "<=" | ">" | ">=";

export interface StatPredicateModel {
  metric: StatMetric;
  window_s: number;
  cmp: StatCmp;
  threshold: number;
}

export interface RuleModel {
  rule_id: string | null;
  trigger_mac: string;
  content_ids: string[];
  min_rssi_dbm: number | null;
  stat: StatPredicateModel | null;
  priority: number;
  enabled: boolean;
}

export interface ContentModel {
  content_id: string;
  kind: "TEXT" | "IMAGE_URI" | "LINK";
  body: string;
}

export interface ObservationModel {
  mac: string;
  rssi_dbm: number;
}

export interface ScanReportModel {
  device_id: string;
  timestamp: string;
  observations: ObservationModel[];
}

export interface ActivationView {
  content: ContentModel;
  via_mac: string;
  rssi_dbm: number;
  rule_id: string;
}

export interface HeatMapCellView {
  mac: string;
  bucket_start: string;
  visit_count: number;
  unique_devices: number;
}

export interface PropagationView {
  p0_dbm: number;
  n: number;
  sigma_db: number;
  sensitivity_dbm: number;
}

export interface ConfigView {
  propagation: PropagationView;
  heat_map_bucket_s: number;
  session_gap_s: number;
  interference_radius_m: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string | null;
}

export interface Point {
  x: number;
  y: number;
}
