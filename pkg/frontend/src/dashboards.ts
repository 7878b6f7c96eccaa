/** Training dashboards: model timelines and per-class series as inline SVG.
 *
 * Rendering returns an SVG string so the chart logic is testable without a
 * DOM; main.ts injects it. One polyline per model, x = training instance,
 * y = mean IoU in [0, 1]; a "training plateaued" badge appears when the
 * server reports it.
 */

import type { ModelTimeline, TimelinePoint } from "./api.js";

const PALETTE = ["#2563eb", "#db2777", "#059669", "#d97706", "#7c3aed", "#0891b2"];

export interface ChartSeries {
  label: string;
  points: TimelinePoint[];
  plateaued: boolean;
}

export function seriesFromTimelines(
  timelines: { label: string; timeline: ModelTimeline }[],
): ChartSeries[] {
  return timelines.map(({ label, timeline }) => ({
    label,
    points: [...timeline.series].sort(
      (a, b) => a.training_instance - b.training_instance),
    plateaued: timeline.plateaued,
  }));
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
}

export function renderLineChart(series: ChartSeries[], options: ChartOptions = {}): string {
  const width = options.width ?? 520;
  const height = options.height ?? 260;
  const pad = 36;

  if (series.length === 0 || series.every((s) => s.points.length === 0)) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `class="chart chart-empty"><text x="${width / 2}" y="${height / 2}" ` +
      `text-anchor="middle" class="empty-state">no metrics recorded yet</text></svg>`;
  }

  const instances = series.flatMap((s) => s.points.map((p) => p.training_instance));
  const xMin = Math.min(...instances);
  const xMax = Math.max(...instances);
  const xSpan = Math.max(xMax - xMin, 1);

  const sx = (instance: number) =>
    pad + ((instance - xMin) / xSpan) * (width - 2 * pad);
  const sy = (iou: number) => height - pad - iou * (height - 2 * pad);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" class="chart">`,
    `<line x1="${pad}" y1="${sy(0)}" x2="${width - pad}" y2="${sy(0)}" class="axis"/>`,
    `<line x1="${pad}" y1="${sy(0)}" x2="${pad}" y2="${sy(1)}" class="axis"/>`,
    `<text x="${pad - 6}" y="${sy(1) + 4}" text-anchor="end" class="tick">1.0</text>`,
    `<text x="${pad - 6}" y="${sy(0) + 4}" text-anchor="end" class="tick">0.0</text>`,
  ];
  if (options.title) {
    parts.push(`<text x="${width / 2}" y="16" text-anchor="middle" class="title">` +
      `${options.title}</text>`);
  }

  series.forEach((entry, index) => {
    const color = PALETTE[index % PALETTE.length];
    const coords = entry.points
      .map((p) => `${sx(p.training_instance).toFixed(1)},${sy(p.mean_iou).toFixed(1)}`)
      .join(" ");
    parts.push(`<polyline fill="none" stroke="${color}" stroke-width="2" ` +
      `data-series="${entry.label}" points="${coords}"/>`);
    for (const p of entry.points) {
      parts.push(`<circle cx="${sx(p.training_instance).toFixed(1)}" ` +
        `cy="${sy(p.mean_iou).toFixed(1)}" r="3" fill="${color}"/>`);
    }
    parts.push(`<text x="${width - pad}" y="${20 + index * 14}" text-anchor="end" ` +
      `fill="${color}" class="legend">${entry.label}</text>`);
  });

  if (series.some((s) => s.plateaued)) {
    parts.push(`<text x="${pad}" y="16" class="badge plateau-badge">` +
      `training plateaued</text>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
