/**
 * The figure set: time series of the monitored functionals and norms,
 * with optional threshold overlays, plus field heatmaps from snapshots.
 */

import { mkdirSync, writeFileSync } from "fs";
import { basename, join } from "path";

import { Records } from "./csv";
import { readSnapshot } from "./snapshot";
import {
  BLACK,
  BLUE,
  Canvas,
  Color,
  colormap,
  fmt,
  GRAY,
  GREEN,
  LIGHT,
  niceTicks,
  ORANGE,
  RED,
  WHITE,
} from "./raster";

export interface Overlays {
  /** decay threshold drawn on the G series */
  gThreshold?: number;
  /** lower bound drawn on the F series (-area/e) */
  fFloor?: number;
  /** grad-w L2 budget drawn on the gradient-norm series */
  mBudget?: number;
}

export interface PlotSpec {
  csvPath?: string;
  records?: Records;
  snapshotPaths: string[];
  outDir: string;
  figures: string[];
  overlays: Overlays;
}

export const FIGURES = ["mass", "F", "G", "gradw", "supu", "minv", "heatmap"] as const;

const W = 640;
const H = 400;
const ML = 70;
const MR = 16;
const MT = 30;
const MB = 42;

interface Series {
  label: string;
  color: Color;
  values: number[];
}

interface HLine {
  label: string;
  value: number;
  color: Color;
}

function drawTimeSeries(
  title: string,
  ts: number[],
  series: Series[],
  hlines: HLine[]
): Canvas {
  const canvas = new Canvas(W, H);
  const x0 = ML;
  const x1 = W - MR;
  const y0 = MT;
  const y1 = H - MB;

  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of s.values) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  for (const h of hlines) {
    lo = Math.min(lo, h.value);
    hi = Math.max(hi, h.value);
  }
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1.0;
    lo -= pad;
    hi += pad;
  }
  const pad = 0.06 * (hi - lo);
  lo -= pad;
  hi += pad;
  const tLo = ts[0];
  const tHi = ts[ts.length - 1] > ts[0] ? ts[ts.length - 1] : ts[0] + 1;

  const mapX = (t: number) => x0 + ((t - tLo) / (tHi - tLo)) * (x1 - x0);
  const mapY = (v: number) => y1 - ((v - lo) / (hi - lo)) * (y1 - y0);

  // frame, grid, ticks
  for (const tv of niceTicks(tLo, tHi)) {
    const x = mapX(tv);
    canvas.line(x, y0, x, y1, LIGHT);
    canvas.text(x - canvas.textWidth(fmt(tv)) / 2, y1 + 8, fmt(tv), BLACK);
  }
  for (const vv of niceTicks(lo, hi)) {
    const y = mapY(vv);
    canvas.line(x0, y, x1, y, LIGHT);
    const label = fmt(vv);
    canvas.text(x0 - 6 - canvas.textWidth(label), y - 3, label, BLACK);
  }
  canvas.line(x0, y0, x0, y1, BLACK);
  canvas.line(x0, y1, x1, y1, BLACK);
  canvas.text(x0, y0 - 18, title, BLACK);
  canvas.text(x1 - canvas.textWidth("T"), y1 + 22, "T", BLACK);

  // overlays: dashed horizontal lines with labels
  for (const h of hlines) {
    const y = mapY(h.value);
    for (let x = x0; x < x1; x += 7) {
      canvas.line(x, y, Math.min(x + 4, x1), y, h.color);
    }
    const label = `${h.label} = ${fmt(h.value)}`;
    canvas.text(x1 - canvas.textWidth(label) - 4, y - 10, label, h.color);
  }

  // series polylines and legend
  series.forEach((s, k) => {
    for (let i = 1; i < ts.length; i++) {
      canvas.line(mapX(ts[i - 1]), mapY(s.values[i - 1]), mapX(ts[i]), mapY(s.values[i]), s.color);
    }
    if (series.length > 1) {
      const lx = x0 + 8;
      const ly = y0 + 6 + 12 * k;
      canvas.line(lx, ly + 3, lx + 14, ly + 3, s.color);
      canvas.text(lx + 18, ly, s.label, BLACK);
    }
  });
  return canvas;
}

function drawHeatmap(title: string, path: string): Canvas {
  const snap = readSnapshot(path);
  const canvas = new Canvas(W, H);
  const x0 = ML;
  const x1 = W - MR - 60; // leave room for the colorbar
  const y0 = MT;
  const y1 = H - MB;

  let lo = Infinity;
  let hi = -Infinity;
  for (const v of snap.values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const span = hi > lo ? hi - lo : 1.0;

  for (let py = y0; py < y1; py++) {
    // row 0 of the field is y = 0: flip so y grows upward in the figure
    const j = Math.min(snap.ny - 1, Math.floor(((y1 - 1 - py) / (y1 - y0)) * snap.ny));
    for (let px = x0; px < x1; px++) {
      const i = Math.min(snap.nx - 1, Math.floor(((px - x0) / (x1 - x0)) * snap.nx));
      const v = snap.values[j * snap.nx + i];
      canvas.px(px, py, colormap((v - lo) / span));
    }
  }
  // colorbar
  const cbx = x1 + 14;
  for (let py = y0; py < y1; py++) {
    const s = (y1 - 1 - py) / (y1 - y0);
    for (let dx = 0; dx < 14; dx++) {
      canvas.px(cbx + dx, py, colormap(s));
    }
  }
  canvas.text(cbx + 18, y0 - 3, fmt(hi), BLACK);
  canvas.text(cbx + 18, y1 - 4, fmt(lo), BLACK);
  canvas.line(x0, y0, x0, y1, BLACK);
  canvas.line(x0, y1, x1, y1, BLACK);
  canvas.text(x0, y0 - 18, title, BLACK);
  return canvas;
}

export class FigureError extends Error {}

/** Render the selected figures; returns the written file paths. */
export function render(spec: PlotSpec, records: Records): string[] {
  for (const fig of spec.figures) {
    if (!(FIGURES as readonly string[]).includes(fig)) {
      throw new FigureError(`unknown figure "${fig}"; known: ${FIGURES.join(", ")}`);
    }
  }
  mkdirSync(spec.outDir, { recursive: true });
  const written: string[] = [];
  const ts = records.t;
  const save = (name: string, canvas: Canvas) => {
    const path = join(spec.outDir, `${name}.png`);
    writeFileSync(path, canvas.toPng());
    written.push(path);
  };

  for (const fig of spec.figures) {
    if (fig === "mass") {
      save("mass", drawTimeSeries("MASS", ts, [{ label: "MASS", color: BLUE, values: records.mass }], []));
    } else if (fig === "F") {
      const hlines: HLine[] = [];
      if (spec.overlays.fFloor !== undefined) {
        hlines.push({ label: "LOWER BOUND", value: spec.overlays.fFloor, color: RED });
      }
      save("F", drawTimeSeries("FUNCTIONAL F", ts, [{ label: "F", color: BLUE, values: records.F }], hlines));
    } else if (fig === "G") {
      const hlines: HLine[] = [];
      if (spec.overlays.gThreshold !== undefined) {
        hlines.push({ label: "G THRESHOLD", value: spec.overlays.gThreshold, color: RED });
      }
      save("G", drawTimeSeries("FUNCTIONAL G", ts, [{ label: "G", color: GREEN, values: records.G }], hlines));
    } else if (fig === "gradw") {
      const hlines: HLine[] = [];
      if (spec.overlays.mBudget !== undefined) {
        hlines.push({ label: "M BUDGET", value: spec.overlays.mBudget, color: RED });
      }
      save(
        "gradw",
        drawTimeSeries(
          "GRAD W NORMS",
          ts,
          [
            { label: "L2", color: BLUE, values: records.gradw_l2 },
            { label: "L4", color: ORANGE, values: records.gradw_l4 },
          ],
          hlines
        )
      );
    } else if (fig === "supu") {
      save("supu", drawTimeSeries("SUP U", ts, [{ label: "SUP U", color: ORANGE, values: records.sup_u }], []));
    } else if (fig === "minv") {
      save("minv", drawTimeSeries("MIN V", ts, [{ label: "MIN V", color: GREEN, values: records.min_v }], []));
    } else if (fig === "heatmap") {
      if (spec.snapshotPaths.length === 0) {
        throw new FigureError('figure "heatmap" needs at least one snapshot path');
      }
      for (const snapPath of spec.snapshotPaths) {
        const stem = basename(snapPath).replace(/\.[^.]*$/, "");
        save(`heatmap_${stem}`, drawHeatmap(`FIELD ${stem}`, snapPath));
      }
    }
  }
  return written;
}
