// SVG venue map: node markers in venue-local meters, a draggable ghost
// device, and the heat-map overlay coloring.

import { NEUTRAL_COLOR } from "./heatscale.js";
import type { NodeView, Point } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onGhostMove(point: Point): void;
  onSelectNode(mac: string): void;
}

export class MapView {
  private ghost: Point = { x: 0, y: 0 };
  private nodes: NodeView[] = [];
  private colors = new Map<string, string>();
  private dragging = false;
  private bounds = { minX: 0, minY: 0, width: 200, height: 60 };

  constructor(
    private readonly svg: SVGSVGElement,
    private readonly callbacks: MapCallbacks,
  ) {
    svg.addEventListener("pointerdown", (event) => {
      this.dragging = true;
      svg.setPointerCapture(event.pointerId);
      this.moveGhostTo(event);
    });
    svg.addEventListener("pointermove", (event) => {
      if (this.dragging) this.moveGhostTo(event);
    });
    svg.addEventListener("pointerup", () => {
      this.dragging = false;
    });
  }

  setNodes(nodes: NodeView[]): void {
    this.nodes = nodes;
    const positioned = nodes.filter((n) => n.position);
    if (positioned.length > 0) {
      const xs = positioned.map((n) => n.position![0]);
      const ys = positioned.map((n) => n.position![1]);
      const pad = 15;
      this.bounds = {
        minX: Math.min(...xs) - pad,
        minY: Math.min(...ys) - pad,
        width: Math.max(...xs) - Math.min(...xs) + 2 * pad,
        height: Math.max(...ys) - Math.min(...ys) + 2 * pad,
      };
      this.ghost = {
        x: this.bounds.minX + this.bounds.width / 2,
        y: this.bounds.minY + this.bounds.height / 2,
      };
    }
    this.render();
  }

  setColors(colors: Map<string, string>): void {
    this.colors = colors;
    this.render();
  }

  ghostPosition(): Point {
    return { ...this.ghost };
  }

  private moveGhostTo(event: PointerEvent): void {
    const rect = this.svg.getBoundingClientRect();
    const x =
      this.bounds.minX + ((event.clientX - rect.left) / rect.width) * this.bounds.width;
    const y =
      this.bounds.minY + ((event.clientY - rect.top) / rect.height) * this.bounds.height;
    // keep the ghost inside the venue bounds
    this.ghost = {
      x: Math.min(Math.max(x, this.bounds.minX), this.bounds.minX + this.bounds.width),
      y: Math.min(Math.max(y, this.bounds.minY), this.bounds.minY + this.bounds.height),
    };
    this.render();
    this.callbacks.onGhostMove(this.ghostPosition());
  }

  private render(): void {
    const { minX, minY, width, height } = this.bounds;
    this.svg.setAttribute("viewBox", `${minX} ${minY} ${width} ${height}`);
    this.svg.replaceChildren();

    for (const node of this.nodes) {
      if (!node.position) continue;
      const [x, y] = node.position;
      const marker = document.createElementNS(SVG_NS, "circle");
      marker.setAttribute("cx", String(x));
      marker.setAttribute("cy", String(y));
      marker.setAttribute("r", node.protocol === "WIFI" ? "2.4" : "1.8");
      marker.setAttribute("fill", this.colors.get(node.mac) ?? NEUTRAL_COLOR);
      marker.setAttribute("stroke", "#1f2933");
      marker.setAttribute("stroke-width", "0.3");
      marker.addEventListener("pointerdown", (event) => {
        event.stopPropagation();
        this.callbacks.onSelectNode(node.mac);
      });
      this.svg.appendChild(marker);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(x + 2.5));
      label.setAttribute("y", String(y + 1));
      label.setAttribute("font-size", "2.6");
      label.setAttribute("fill", "#3e4c59");
      label.textContent = node.mac.slice(-5);
      this.svg.appendChild(label);
    }

    const ghost = document.createElementNS(SVG_NS, "circle");
    ghost.setAttribute("cx", String(this.ghost.x));
    ghost.setAttribute("cy", String(this.ghost.y));
    ghost.setAttribute("r", "2.2");
    ghost.setAttribute("fill", "#2186eb");
    ghost.setAttribute("fill-opacity", "0.85");
    this.svg.appendChild(ghost);
  }
}
