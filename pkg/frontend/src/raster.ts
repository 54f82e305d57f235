/**
 * Minimal RGBA raster canvas with lines, rectangles, and bitmap text,
 * plus tick placement and number formatting helpers for the figures.
 */

import { PNG } from "pngjs";
import { FONT, GLYPH_H, GLYPH_W } from "./font";

export type Color = readonly [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [20, 20, 20];
export const GRAY: Color = [190, 190, 190];
export const LIGHT: Color = [232, 232, 232];
export const BLUE: Color = [31, 119, 180];
export const ORANGE: Color = [255, 127, 14];
export const GREEN: Color = [44, 160, 44];
export const RED: Color = [214, 39, 40];

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    this.clear(background);
  }

  clear(color: Color): void {
    for (let k = 0; k < this.width * this.height; k++) {
      this.data[4 * k] = color[0];
      this.data[4 * k + 1] = color[1];
      this.data[4 * k + 2] = color[2];
      this.data[4 * k + 3] = 255;
    }
  }

  px(x: number, y: number, color: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const k = 4 * (y * this.width + x);
    this.data[k] = color[0];
    this.data[k + 1] = color[1];
    this.data[k + 2] = color[2];
    this.data[k + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.px(x, y, color);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Color): void {
    // Bresenham on rounded endpoints
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.px(x, y, color);
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  text(x: number, y: number, s: string, color: Color, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of s.toUpperCase()) {
      const glyph = FONT[ch];
      if (glyph) {
        for (let r = 0; r < GLYPH_H; r++) {
          for (let c = 0; c < GLYPH_W; c++) {
            if ((glyph[r] >> (GLYPH_W - 1 - c)) & 1) {
              this.fillRect(cx + c * scale, Math.round(y) + r * scale, scale, scale, color);
            }
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length * (GLYPH_W + 1) * scale;
  }

  toPng(): Buffer {
    const png = new PNG({ width: this.width, height: this.height });
    Buffer.from(this.data.buffer, this.data.byteOffset, this.data.length).copy(png.data);
    return PNG.sync.write(png);
  }
}

/** Tick positions at a 1-2-5 step covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1.0;
    return [lo - pad, lo, lo + pad];
  }
  const span = hi - lo;
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

/** Compact numeric label. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("+", "");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

const VIRIDIS: Color[] = [
  [68, 1, 84],
  [72, 36, 117],
  [65, 68, 135],
  [53, 95, 141],
  [42, 120, 142],
  [33, 145, 140],
  [34, 168, 132],
  [68, 191, 112],
  [122, 209, 81],
  [189, 223, 38],
  [253, 231, 37],
];

/** Piecewise-linear viridis lookup for s in [0, 1]. */
export function colormap(s: number): Color {
  const t = Math.min(Math.max(s, 0), 1) * (VIRIDIS.length - 1);
  const i = Math.min(Math.floor(t), VIRIDIS.length - 2);
  const f = t - i;
  const a = VIRIDIS[i];
  const b = VIRIDIS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}
