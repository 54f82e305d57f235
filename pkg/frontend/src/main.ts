#!/usr/bin/env node
/**
 * report-plots: render figures from a kslab run's CSV and snapshots.
 *
 * Usage:
 *   report-plots --csv runs/out/records.csv --out figures \
 *       [--snapshots runs/out/snapshots/u_000.cplf ...] \
 *       [--figures mass,F,G,gradw,supu,minv,heatmap] \
 *       [--g-threshold 0.25] [--f-floor -0.3679] [--m-budget 0.01]
 *
 * Exit codes: 0 success, 1 schema/data error (message names the column or
 * header problem), 2 usage error.
 */

import { readRecordsCsv, SchemaError } from "./csv";
import { FIGURES, FigureError, PlotSpec, render } from "./figures";
import { SnapshotError } from "./snapshot";

interface Args {
  csv?: string;
  out?: string;
  snapshots: string[];
  figures?: string;
  gThreshold?: number;
  fFloor?: number;
  mBudget?: number;
}

export class UsageError extends Error {}

export function parseArgs(argv: string[]): Args {
  const args: Args = { snapshots: [] };
  let i = 0;
  const next = (flag: string): string => {
    i++;
    if (i >= argv.length) throw new UsageError(`${flag} needs a value`);
    return argv[i];
  };
  for (; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--csv") args.csv = next(a);
    else if (a === "--out") args.out = next(a);
    else if (a === "--figures") args.figures = next(a);
    else if (a === "--g-threshold") args.gThreshold = Number(next(a));
    else if (a === "--f-floor") args.fFloor = Number(next(a));
    else if (a === "--m-budget") args.mBudget = Number(next(a));
    else if (a === "--snapshots") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        args.snapshots.push(argv[++i]);
      }
    } else throw new UsageError(`unknown argument ${a}`);
  }
  if (!args.csv) throw new UsageError("--csv is required");
  if (!args.out) throw new UsageError("--out is required");
  for (const key of ["gThreshold", "fFloor", "mBudget"] as const) {
    if (args[key] !== undefined && !Number.isFinite(args[key])) {
      throw new UsageError(`--${key.replace(/[A-Z]/g, (c) => "-" + c.toLowerCase())} needs a number`);
    }
  }
  return args;
}

export function buildSpec(args: Args): PlotSpec {
  let figures: string[];
  if (args.figures) {
    figures = args.figures.split(",").map((s) => s.trim());
  } else {
    figures = FIGURES.filter((f) => f !== "heatmap" || args.snapshots.length > 0);
  }
  return {
    csvPath: args.csv,
    snapshotPaths: args.snapshots,
    outDir: args.out!,
    figures,
    overlays: {
      gThreshold: args.gThreshold,
      fFloor: args.fFloor,
      mBudget: args.mBudget,
    },
  };
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const spec = buildSpec(args);
    const records = readRecordsCsv(args.csv!);
    const written = render(spec, records);
    for (const path of written) {
      console.log(path);
    }
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    if (err instanceof SchemaError || err instanceof SnapshotError || err instanceof FigureError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err && (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
