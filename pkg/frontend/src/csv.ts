/**
 * Strict reader for the diagnostics CSV schema.
 *
 * The producer writes a fixed header; any deviation (missing column,
 * reordered columns, ragged row) is an error naming what went wrong.
 */

import { readFileSync } from "fs";

export const CSV_COLUMNS = [
  "t",
  "mass",
  "entropy",
  "fisher",
  "F",
  "G",
  "gradw_l2",
  "gradw_l4",
  "gradw_l6",
  "u_l2",
  "int_H",
  "sup_u",
  "min_v",
  "sup_w",
] as const;

export type Column = (typeof CSV_COLUMNS)[number];

export type Records = Record<Column, number[]>;

export class SchemaError extends Error {}

export function parseRecordsCsv(text: string, source = "records.csv"): Records {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  for (const col of CSV_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`${source}: missing column "${col}"`);
    }
  }
  const extra = header.filter((h) => !(CSV_COLUMNS as readonly string[]).includes(h));
  if (extra.length > 0) {
    throw new SchemaError(`${source}: unknown column "${extra[0]}"`);
  }
  const index = new Map(header.map((h, i) => [h, i]));

  const out = Object.fromEntries(CSV_COLUMNS.map((c) => [c, [] as number[]])) as Records;
  for (let row = 1; row < lines.length; row++) {
    const parts = lines[row].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `${source}: row ${row} has ${parts.length} fields, expected ${header.length}`
      );
    }
    for (const col of CSV_COLUMNS) {
      const v = Number(parts[index.get(col)!]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`${source}: row ${row}, column "${col}" is not a finite number`);
      }
      out[col].push(v);
    }
  }
  if (out.t.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }
  return out;
}

export function readRecordsCsv(path: string): Records {
  return parseRecordsCsv(readFileSync(path, "utf8"), path);
}
