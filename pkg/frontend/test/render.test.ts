import { execFileSync, spawnSync } from "child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { readRecordsCsv } from "../src/csv";
import { FIGURES, render } from "../src/figures";
import { main } from "../src/main";

const FIXTURES = join(__dirname, "..", "fixtures");
const CSV = join(FIXTURES, "records.csv");
const SNAPSHOTS = [join(FIXTURES, "u_001.cplf"), join(FIXTURES, "sig_001.cplf")];

function freshDir(): string {
  return mkdtempSync(join(tmpdir(), "report-plots-"));
}

describe("figure rendering", () => {
  it("renders the full figure set from the fixtures", () => {
    const out = freshDir();
    const records = readRecordsCsv(CSV);
    const written = render(
      {
        snapshotPaths: SNAPSHOTS,
        outDir: out,
        figures: [...FIGURES],
        overlays: { gThreshold: 0.6999, fFloor: -1 / Math.E, mBudget: 0.01 },
      },
      records
    );
    // one file per non-heatmap figure plus one per snapshot
    expect(written.length).toBe(FIGURES.length - 1 + SNAPSHOTS.length);
    for (const path of written) {
      const buf = readFileSync(path);
      // PNG signature
      expect(buf.subarray(0, 8)).toEqual(
        Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a])
      );
      expect(buf.length).toBeGreaterThan(1000);
    }
  });

  it("is idempotent: re-rendering produces identical bytes", () => {
    const records = readRecordsCsv(CSV);
    const spec = (out: string) => ({
      snapshotPaths: [],
      outDir: out,
      figures: ["G", "mass"],
      overlays: { gThreshold: 0.5 },
    });
    const out1 = freshDir();
    const out2 = freshDir();
    const [a] = render(spec(out1), records);
    const [b] = render(spec(out2), records);
    expect(readFileSync(a)).toEqual(readFileSync(b));
  });

  it("overlaying the threshold changes the G figure", () => {
    const records = readRecordsCsv(CSV);
    const out1 = freshDir();
    const out2 = freshDir();
    const [withLine] = render(
      { snapshotPaths: [], outDir: out1, figures: ["G"], overlays: { gThreshold: 0.6999 } },
      records
    );
    const [without] = render(
      { snapshotPaths: [], outDir: out2, figures: ["G"], overlays: {} },
      records
    );
    expect(readFileSync(withLine)).not.toEqual(readFileSync(without));
  });

  it("rejects unknown figure names", () => {
    const records = readRecordsCsv(CSV);
    expect(() =>
      render({ snapshotPaths: [], outDir: freshDir(), figures: ["pie"], overlays: {} }, records)
    ).toThrowError(/unknown figure/);
  });
});

describe("command line", () => {
  it("exits 0 on the full set and lists the files", () => {
    const out = freshDir();
    const code = main([
      "--csv", CSV,
      "--out", out,
      "--snapshots", ...SNAPSHOTS,
      "--g-threshold", "0.6999",
      "--f-floor", String(-1 / Math.E),
    ]);
    expect(code).toBe(0);
  });

  it("exits nonzero with the column named on a mutilated CSV", () => {
    const out = freshDir();
    const lines = readFileSync(CSV, "utf8").split("\n");
    const cols = lines[0].split(",");
    const idx = cols.indexOf("gradw_l2");
    const broken = lines
      .filter((l) => l.trim().length > 0)
      .map((l) => l.split(",").filter((_, i) => i !== idx).join(","))
      .join("\n");
    const badCsv = join(out, "broken.csv");
    writeFileSync(badCsv, broken);

    const dist = join(__dirname, "..", "dist", "main.js");
    const res = spawnSync(process.execPath, [dist, "--csv", badCsv, "--out", out], {
      encoding: "utf8",
    });
    expect(res.status).toBe(1);
    expect(res.stderr).toContain('"gradw_l2"');
  });

  it("exits 2 on usage errors", () => {
    expect(main(["--csv", CSV])).toBe(2);
    expect(main(["--nonsense"])).toBe(2);
  });

  it("exits 1 on a missing csv file", () => {
    expect(main(["--csv", join(FIXTURES, "nope.csv"), "--out", freshDir()])).toBe(1);
  });
});
