// Heat-map overlay coloring: marker color scales linearly with
// visit_count, the hottest cell in range defining the top of the scale.

import type { HeatMapCellView } from "./types.js";

export const NEUTRAL_COLOR = "#8c98a4";

const COLD_RGB: [number, number, number] = [255, 232, 120];
const HOT_RGB: [number, number, number] = [214, 40, 40];

export function heatColor(visitCount: number, maxCount: number): string {
  if (maxCount <= 0 || visitCount <= 0) return NEUTRAL_COLOR;
  const intensity = Math.min(visitCount / maxCount, 1);
  const channel = (i: number) =>
    Math.round(COLD_RGB[i] + intensity * (HOT_RGB[i] - COLD_RGB[i]));
  return `rgb(${channel(0)}, ${channel(1)}, ${channel(2)})`;
}

/** Total visits per mac over the fetched cells; drives marker colors. */
export function totalsByMac(cells: HeatMapCellView[]): Map<string, number> {
  const totals = new Map<string, number>();
  for (const cell of cells) {
    totals.set(cell.mac, (totals.get(cell.mac) ?? 0) + cell.visit_count);
  }
  return totals;
}

export function hottest(totals: Map<string, number>): number {
  let max = 0;
  for (const value of totals.values()) max = Math.max(max, value);
  return max;
}

/** Evenly spaced numeric stops for the legend, 0 .. max. */
export function legendStops(maxCount: number, steps = 5): { value: number; color: string }[] {
  const stops = [];
  for (let i = 0; i <= steps; i++) {
    const value = Math.round((maxCount * i) / steps);
    stops.push({ value, color: heatColor(value, maxCount) });
  }
  return stops;
}

/** Parse the service's heat-map CSV without reshaping any value. */
export function parseHeatmapCsv(csv: string): { header: string[]; rows: string[][] } {
  const lines = csv.split("\n").filter((line) => line.length > 0);
  const [headerLine, ...rowLines] = lines;
  return {
    header: headerLine ? headerLine.split(",") : [],
    rows: rowLines.map((line) => line.split(",")),
  };
}
