import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { parseSnapshot, readSnapshot, SnapshotError } from "../src/snapshot";

const FIXTURE = join(__dirname, "..", "fixtures", "u_001.cplf");

describe("CPLF1 snapshots", () => {
  it("reads the fixture field", () => {
    const snap = readSnapshot(FIXTURE);
    expect(snap.nx).toBe(32);
    expect(snap.ny).toBe(32);
    expect(snap.lx).toBe(1);
    expect(snap.values.length).toBe(32 * 32);
    // the cell density is nonnegative up to round-off dust
    let lo = Infinity;
    let total = 0;
    for (const v of snap.values) {
      lo = Math.min(lo, v);
      total += v;
    }
    expect(lo).toBeGreaterThan(-1e-13);
    expect(total * (snap.lx / snap.nx) * (snap.ly / snap.ny)).toBeCloseTo(0.01, 10);
  });

  it("rejects a wrong magic string", () => {
    const buf = Buffer.concat([
      Buffer.from("WRONG 3 3 1.0 1.0\n", "ascii"),
      Buffer.alloc(72),
    ]);
    expect(() => parseSnapshot(buf)).toThrowError(SnapshotError);
    expect(() => parseSnapshot(buf)).toThrowError(/header/);
  });

  it("rejects truncated payloads", () => {
    const good = readFileSync(FIXTURE);
    expect(() => parseSnapshot(good.subarray(0, good.length - 8))).toThrowError(/payload/);
  });
});
