// Thin typed client over the service HTTP API. The UI displays what these
// calls return; raw-text variants exist where the display must byte-match
// the service response.

import type {
  ActivationView,
  ApiErrorBody,
  ConfigView,
  ContentModel,
  NodeView,
  Point,
  PropagationView,
  RuleModel,
  ScanReportModel,
} from "./types.js";
import { synthesizeScan } from "./scan.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "INTERNAL", message: `HTTP ${response.status}`, detail: null };
      }
      throw new ApiError(response.status, body);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  config(): Promise<ConfigView> {
    return this.json("/config");
  }

  listNodes(venue?: string): Promise<NodeView[]> {
    const query = venue ? `?venue=${encodeURIComponent(venue)}` : "";
    return this.json(`/nodes${query}`);
  }

  listContents(): Promise<ContentModel[]> {
    return this.json("/contents");
  }

  putContent(content: ContentModel): Promise<{ content_id: string }> {
    return this.json("/contents", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(content),
    });
  }

  listRules(mac?: string): Promise<RuleModel[]> {
    const query = mac ? `?mac=${encodeURIComponent(mac)}` : "";
    return this.json(`/rules${query}`);
  }

  putRule(rule: RuleModel): Promise<{ rule_id: string }> {
    return this.json("/rules", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(rule),
    });
  }

  deleteRule(ruleId: string): Promise<Response> {
    return this.request(`/rules/${encodeURIComponent(ruleId)}`, { method: "DELETE" });
  }

  parseRule(dsl: string): Promise<RuleModel> {
    return this.json("/rules:parse", {
      method: "POST",
      headers: { "content-type": "text/plain" },
      body: dsl,
    });
  }

  /** Raw /resolve body; array order is the display order, untouched. */
  async resolveRaw(scan: ScanReportModel): Promise<string> {
    const response = await this.request("/resolve", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(scan),
    });
    return response.text();
  }

  /** Raw heat-map CSV; the per-node table shows these bytes verbatim. */
  async heatmapCsv(from: string, to: string, bucket: number, mac?: string): Promise<string> {
    const params = new URLSearchParams({ from, to, bucket: String(bucket) });
    if (mac) params.set("mac", mac);
    const response = await this.request(`/stats/heatmap?${params}`, {
      headers: { accept: "text/csv" },
    });
    return response.text();
  }
}

export interface WalkPreviewResult {
  scan: ScanReportModel;
  raw: string;
  activations: ActivationView[];
}

/**
 * The context-aware preview: synthesize the ghost's scan from registry
 * positions and the service's own propagation defaults, POST /resolve,
 * and hand back the response verbatim (parsed only for rendering).
 */
export async function walkPreview(
  client: ApiClient,
  ghost: Point,
  nodes: NodeView[],
  propagation: PropagationView,
  timestamp: string = new Date().toISOString(),
): Promise<WalkPreviewResult> {
  const scan = synthesizeScan(ghost, nodes, propagation, timestamp);
  const raw = await client.resolveRaw(scan);
  return { scan, raw, activations: JSON.parse(raw) as ActivationView[] };
}
