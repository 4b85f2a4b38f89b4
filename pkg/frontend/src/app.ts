// Application wiring: map + walk preview + rule editor + heat-map overlay.
// All state shown in panels is a verbatim service response; this file only
// moves it around.

import { ApiClient, ApiError, walkPreview } from "./api.js";
import { debounce, PREVIEW_DEBOUNCE_MS } from "./debounce.js";
import { heatColor, hottest, parseHeatmapCsv, totalsByMac } from "./heatscale.js";
import { MapView } from "./map.js";
import { errorPosition, formToDsl, ruleToForm, type RuleForm } from "./ruleform.js";
import type { ConfigView, HeatMapCellView, NodeView, Point } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

class App {
  private client: ApiClient;
  private config!: ConfigView;
  private nodes: NodeView[] = [];
  private map!: MapView;
  private requestCounter = 0;

  constructor(baseUrl: string) {
    this.client = new ApiClient(baseUrl);
  }

  async start(): Promise<void> {
    this.config = await this.client.config();
    this.map = new MapView(el<HTMLElement>("map") as unknown as SVGSVGElement, {
      onGhostMove: (point) => this.queuePreview(point),
      onSelectNode: (mac) => this.showNodeDetail(mac),
    });
    await this.reloadNodes();
    this.wireEditor();
    this.wireOverlay();
    this.queuePreview(this.map.ghostPosition());
  }

  private async reloadNodes(): Promise<void> {
    this.nodes = await this.client.listNodes();
    this.map.setNodes(this.nodes);
  }

  // -- walk preview --------------------------------------------------------

  private queuePreview = debounce((point: Point) => {
    void this.runPreview(point);
  }, PREVIEW_DEBOUNCE_MS);

  private async runPreview(point: Point): Promise<void> {
    const requestId = ++this.requestCounter;
    const panel = el<HTMLElement>("preview");
    panel.classList.add("stale");
    try {
      const result = await walkPreview(this.client, point, this.nodes, this.config.propagation);
      if (requestId !== this.requestCounter) return; // a newer drag superseded us
      panel.classList.remove("stale");
      el<HTMLElement>("preview-error").textContent = "";
      if (result.activations.length === 0) {
        panel.innerHTML = `<p class="empty">no content here</p>`;
        return;
      }
      panel.replaceChildren(
        ...result.activations.map((activation) => {
          const card = document.createElement("div");
          card.className = "card";
          card.innerHTML =
            `<span class="kind">${activation.content.kind}</span>` +
            `<strong></strong><small>via ${activation.via_mac} @ ${activation.rssi_dbm} dBm</small>`;
          card.querySelector("strong")!.textContent = activation.content.body;
          return card;
        }),
      );
    } catch (error) {
      // connectivity problems stay non-modal; the stale flag remains
      el<HTMLElement>("preview-error").textContent = String(error);
    }
  }

  // -- rule editor -----------------------------------------------------------

  private wireEditor(): void {
    const dslInput = el<HTMLTextAreaElement>("dsl");
    const diagnostics = el<HTMLElement>("editor-error");

    el<HTMLButtonElement>("form-to-dsl").addEventListener("click", () => {
      diagnostics.textContent = "";
      dslInput.value = formToDsl(this.readForm());
    });

    el<HTMLButtonElement>("dsl-to-form").addEventListener("click", async () => {
      diagnostics.textContent = "";
      try {
        const rule = await this.client.parseRule(dslInput.value.trim());
        this.fillForm(ruleToForm(rule));
      } catch (error) {
        diagnostics.textContent = this.describeEditorError(error);
      }
    });

    el<HTMLButtonElement>("save-rule").addEventListener("click", async () => {
      diagnostics.textContent = "";
      try {
        const parsed = await this.client.parseRule(formToDsl(this.readForm()));
        const stored = await this.client.putRule(parsed);
        diagnostics.textContent = `saved ${stored.rule_id}`;
      } catch (error) {
        diagnostics.textContent = this.describeEditorError(error);
      }
    });
  }

  private describeEditorError(error: unknown): string {
    if (error instanceof ApiError) {
      const position = errorPosition(error.body.detail);
      const at = position ? ` (line ${position.line}, column ${position.column})` : "";
      return `${error.body.code}: ${error.body.message}${at}`;
    }
    return String(error);
  }

  private readForm(): RuleForm {
    const minRssi = el<HTMLInputElement>("form-rssi").value;
    const statMetric = el<HTMLSelectElement>("form-metric").value;
    return {
      mac: el<HTMLInputElement>("form-mac").value.trim(),
      minRssi: minRssi === "" ? null : Number(minRssi),
      stat:
        statMetric === ""
          ? null
          : {
              metric: statMetric as "visit_count" | "unique_devices",
              windowS: Number(el<HTMLInputElement>("form-window").value || "300"),
              cmp: el<HTMLSelectElement>("form-cmp").value as "<" | "<=" | ">" | ">=",
              threshold: Number(el<HTMLInputElement>("form-threshold").value || "0"),
            },
      contentIds: el<HTMLInputElement>("form-contents")
        .value.split(",")
        .map((id) => id.trim())
        .filter(Boolean),
      priority: Number(el<HTMLInputElement>("form-priority").value || "0"),
      enabled: !el<HTMLInputElement>("form-disabled").checked,
    };
  }

  private fillForm(form: RuleForm): void {
    el<HTMLInputElement>("form-mac").value = form.mac;
    el<HTMLInputElement>("form-rssi").value = form.minRssi === null ? "" : String(form.minRssi);
    el<HTMLSelectElement>("form-metric").value = form.stat?.metric ?? "";
    el<HTMLInputElement>("form-window").value = form.stat ? String(form.stat.windowS) : "";
    el<HTMLSelectElement>("form-cmp").value = form.stat?.cmp ?? "<";
    el<HTMLInputElement>("form-threshold").value = form.stat ? String(form.stat.threshold) : "";
    el<HTMLInputElement>("form-contents").value = form.contentIds.join(", ");
    el<HTMLInputElement>("form-priority").value = String(form.priority);
    el<HTMLInputElement>("form-disabled").checked = !form.enabled;
  }

  // -- heat-map overlay -------------------------------------------------------

  private cells: HeatMapCellView[] = [];

  private wireOverlay(): void {
    el<HTMLButtonElement>("load-overlay").addEventListener("click", () => {
      void this.loadOverlay();
    });
    el<HTMLButtonElement>("clear-overlay").addEventListener("click", () => {
      this.map.setColors(new Map());
      el<HTMLElement>("legend").replaceChildren();
    });
  }

  private async loadOverlay(): Promise<void> {
    const from = el<HTMLInputElement>("overlay-from").value;
    const to = el<HTMLInputElement>("overlay-to").value;
    const bucket = Number(el<HTMLInputElement>("overlay-bucket").value || "900");
    const csv = await this.client.heatmapCsv(from, to, bucket);
    const { rows } = parseHeatmapCsv(csv);
    this.cells = rows.map((row) => ({
      mac: row[0],
      bucket_start: row[1],
      visit_count: Number(row[2]),
      unique_devices: Number(row[3]),
    }));
    const totals = totalsByMac(this.cells);
    const max = hottest(totals);
    const colors = new Map<string, string>();
    for (const [mac, total] of totals) colors.set(mac, heatColor(total, max));
    this.map.setColors(colors);

    const legend = el<HTMLElement>("legend");
    legend.replaceChildren();
    for (const stop of [0, 0.25, 0.5, 0.75, 1]) {
      const item = document.createElement("span");
      const value = Math.round(max * stop);
      item.textContent = String(value);
      item.style.background = heatColor(value, max);
      legend.appendChild(item);
    }
  }

  private showNodeDetail(mac: string): void {
    const table = el<HTMLElement>("node-detail");
    // per-bucket values straight from the CSV rows, never recomputed
    const rows = this.cells.filter((cell) => cell.mac === mac);
    table.innerHTML =
      `<h3>${mac}</h3>` +
      `<table><tr><th>bucket_start</th><th>visit_count</th><th>unique_devices</th></tr>` +
      rows
        .map(
          (cell) =>
            `<tr><td>${cell.bucket_start}</td><td>${cell.visit_count}</td><td>${cell.unique_devices}</td></tr>`,
        )
        .join("") +
      `</table>`;
  }
}

const baseUrl =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";
void new App(baseUrl).start();
