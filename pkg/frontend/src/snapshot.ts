/**
 * Reader for CPLF1 field snapshots: one ASCII header line
 * `CPLF1 nx ny lx ly`, then nx*ny little-endian float64, row-major
 * (ny rows of nx values).
 */

import { readFileSync } from "fs";

export interface Snapshot {
  nx: number;
  ny: number;
  lx: number;
  ly: number;
  /** values[j][i], j over ny rows, i over nx columns */
  values: Float64Array;
}

export class SnapshotError extends Error {}

export function parseSnapshot(buf: Buffer, source = "snapshot"): Snapshot {
  const nl = buf.indexOf(0x0a);
  if (nl < 0) {
    throw new SnapshotError(`${source}: malformed header (no newline)`);
  }
  const header = buf.subarray(0, nl).toString("ascii").trim().split(/\s+/);
  if (header.length !== 5 || header[0] !== "CPLF1") {
    throw new SnapshotError(`${source}: malformed snapshot header "${header.join(" ")}"`);
  }
  const nx = Number(header[1]);
  const ny = Number(header[2]);
  const lx = Number(header[3]);
  const ly = Number(header[4]);
  if (!Number.isInteger(nx) || !Number.isInteger(ny) || nx < 3 || ny < 3 || !(lx > 0) || !(ly > 0)) {
    throw new SnapshotError(`${source}: bad grid dimensions in header`);
  }
  const payload = buf.subarray(nl + 1);
  if (payload.length !== 8 * nx * ny) {
    throw new SnapshotError(
      `${source}: payload is ${payload.length} bytes, expected ${8 * nx * ny}`
    );
  }
  const values = new Float64Array(nx * ny);
  for (let k = 0; k < nx * ny; k++) {
    values[k] = payload.readDoubleLE(8 * k);
  }
  return { nx, ny, lx, ly, values };
}

export function readSnapshot(path: string): Snapshot {
  return parseSnapshot(readFileSync(path), path);
}
