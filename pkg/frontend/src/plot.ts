/**
 * SVG renderer for sweep figures.
 *
 * A plot takes the parsed sweep table, one x column, one or more y series and
 * an optional annotated marker (used for the near-zero-separation one-way
 * rate point).  Rows whose y cell is empty (error-annotated sweep points) are
 * skipped per series; a series with no remaining points, or a table with no
 * data rows at all, is an error rather than an empty image.
 */

import { z } from "zod";

import { MissingColumnError, numericColumn, SweepTable } from "./csv.js";

export const plotSpecSchema = z.object({
  x: z.string().min(1),
  series: z
    .array(z.object({ column: z.string().min(1), label: z.string().min(1) }))
    .min(1),
  scale: z.enum(["linear", "log", "index"]).default("linear"),
  marker: z
    .object({ column: z.string().min(1), label: z.string().min(1) })
    .optional(),
  title: z.string().optional(),
});

export type PlotSpec = z.infer<typeof plotSpecSchema>;

export class EmptyDataError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyDataError";
  }
}

export interface SeriesSummary {
  label: string;
  column: string;
  points: number;
}

export interface RenderResult {
  svg: string;
  series: SeriesSummary[];
  marker?: { x: number; y: number; label: string };
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 78, right: 24, top: 40, bottom: 56 };
const PALETTE = ["#000000", "#1f6fb4", "#5aa9e6", "#2ca02c", "#9467bd", "#8c564b"];
const DASHES = ["", "7 4", "", "", "2 3", ""];
const MARKER_COLOR = "#ff8c00";

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e").replace("e0", "e");
  }
  return Number(v.toPrecision(4)).toString();
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= count) ?? mag * 10;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

interface XScale {
  map(x: number, rank: number): number;
  ticks: { u: number; label: string }[];
}

function buildXScale(xs: number[], scale: PlotSpec["scale"]): XScale {
  const span = (u: number) => MARGIN.left + u * (WIDTH - MARGIN.left - MARGIN.right);
  if (scale === "index") {
    const n = xs.length;
    const every = Math.max(1, Math.ceil(n / 8));
    return {
      map: (_x, rank) => span(n === 1 ? 0.5 : rank / (n - 1)),
      ticks: xs
        .map((x, i) => ({ u: n === 1 ? 0.5 : i / (n - 1), label: fmt(x), i }))
        .filter(({ i }) => i % every === 0 || i === n - 1)
        .map(({ u, label }) => ({ u: span(u), label })),
    };
  }
  if (scale === "log") {
    if (xs.some((x) => x <= 0)) {
      throw new EmptyDataError("log scale requires strictly positive x values");
    }
    const lo = Math.log10(Math.min(...xs));
    const hi = Math.log10(Math.max(...xs));
    const ticks = niceTicks(lo, hi, 7);
    return {
      map: (x) => span(hi === lo ? 0.5 : (Math.log10(x) - lo) / (hi - lo)),
      ticks: ticks.map((t) => ({
        u: span(hi === lo ? 0.5 : (t - lo) / (hi - lo)),
        label: `1e${fmt(t)}`,
      })),
    };
  }
  const lo = Math.min(...xs);
  const hi = Math.max(...xs);
  const ticks = niceTicks(lo, hi, 7);
  return {
    map: (x) => span(hi === lo ? 0.5 : (x - lo) / (hi - lo)),
    ticks: ticks.map((t) => ({
      u: span(hi === lo ? 0.5 : (t - lo) / (hi - lo)),
      label: fmt(t),
    })),
  };
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function render(table: SweepTable, spec: PlotSpec): RenderResult {
  const checked = plotSpecSchema.parse(spec);
  if (table.rows.length === 0) {
    throw new EmptyDataError("no data rows to plot");
  }
  const xsRaw = numericColumn(table, checked.x);
  if (xsRaw.some((v) => v === null)) {
    throw new EmptyDataError(`x column "${checked.x}" has empty cells`);
  }
  const xs = xsRaw as number[];

  const seriesData = checked.series.map((s) => {
    const col = numericColumn(table, s.column);
    const pts = col
      .map((y, i) => ({ x: xs[i], y, rank: i }))
      .filter((p): p is { x: number; y: number; rank: number } => p.y !== null);
    if (pts.length === 0) {
      throw new EmptyDataError(`series "${s.column}" has no plottable points`);
    }
    return { ...s, pts };
  });

  let marker: RenderResult["marker"];
  if (checked.marker) {
    const col = numericColumn(table, checked.marker.column);
    const first = col.findIndex((v) => v !== null);
    if (first < 0) {
      throw new EmptyDataError(`marker column "${checked.marker.column}" is empty`);
    }
    marker = { x: xs[first], y: col[first] as number, label: checked.marker.label };
  }

  const xscale = buildXScale(xs, checked.scale);
  const yVals = seriesData.flatMap((s) => s.pts.map((p) => p.y));
  if (marker) yVals.push(marker.y);
  const yLo = Math.min(0, ...yVals);
  const yHi = Math.max(...yVals) * 1.06 + 1e-12;
  const ymap = (y: number) =>
    HEIGHT - MARGIN.bottom - ((y - yLo) / (yHi - yLo)) * (HEIGHT - MARGIN.top - MARGIN.bottom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  if (checked.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15">${esc(checked.title)}</text>`,
    );
  }

  // axes
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const yAxis = HEIGHT - MARGIN.bottom;
  parts.push(`<g stroke="#333" stroke-width="1">`);
  parts.push(`<line x1="${x0}" y1="${yAxis}" x2="${x1}" y2="${yAxis}"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${yAxis}"/>`);
  parts.push(`</g>`);
  for (const t of xscale.ticks) {
    parts.push(`<line x1="${t.u}" y1="${yAxis}" x2="${t.u}" y2="${yAxis + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${t.u}" y="${yAxis + 20}" text-anchor="middle" font-size="11">${esc(t.label)}</text>`,
    );
  }
  for (const t of niceTicks(yLo, yHi, 6)) {
    const v = ymap(t);
    parts.push(`<line x1="${x0 - 5}" y1="${v}" x2="${x0}" y2="${v}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 9}" y="${v + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
    );
    parts.push(
      `<line x1="${x0}" y1="${v}" x2="${x1}" y2="${v}" stroke="#eee" stroke-width="0.7"/>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${esc(checked.x)}</text>`,
  );

  // series
  seriesData.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const dash = DASHES[i % DASHES.length];
    const coords = s.pts
      .map((p) => `${xscale.map(p.x, p.rank).toFixed(2)},${ymap(p.y).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline data-series="${esc(s.column)}" fill="none" stroke="${color}" ` +
        `stroke-width="1.8"${dash ? ` stroke-dasharray="${dash}"` : ""} points="${coords}"/>`,
    );
  });

  // annotated marker
  if (marker) {
    const mi = xs.indexOf(marker.x);
    const mx = xscale.map(marker.x, mi);
    const my = ymap(marker.y);
    parts.push(
      `<circle class="marker" cx="${mx.toFixed(2)}" cy="${my.toFixed(2)}" r="5" ` +
        `fill="${MARKER_COLOR}" stroke="#7a3d00"/>`,
    );
    parts.push(
      `<text x="${(mx + 10).toFixed(2)}" y="${(my - 8).toFixed(2)}" font-size="12" ` +
        `fill="#7a3d00">${esc(marker.label)} = ${fmt(marker.y)}</text>`,
    );
  }

  // legend
  const lx = x1 - 250;
  let ly = MARGIN.top + 6;
  parts.push(`<g font-size="12">`);
  seriesData.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const dash = DASHES[i % DASHES.length];
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 26}" y2="${ly - 4}" stroke="${color}" ` +
        `stroke-width="2"${dash ? ` stroke-dasharray="${dash}"` : ""}/>`,
    );
    parts.push(`<text x="${lx + 32}" y="${ly}">${esc(s.label)}</text>`);
    ly += 18;
  });
  parts.push(`</g>`);
  parts.push(`</svg>`);

  return {
    svg: parts.join("\n"),
    series: seriesData.map((s) => ({ label: s.label, column: s.column, points: s.pts.length })),
    marker,
  };
}
