import { readFileSync } from "node:fs";
import Papa from "papaparse";

/** One parsed CSV artifact: `#` header lines kept verbatim, cells kept raw. */
export interface CsvTable {
  path: string;
  comments: string[];
  columns: string[];
  rows: Record<string, string>[];
}

/** A fitted-slope header line (`# slope_<y>_vs_<x>=<value>`). */
export interface SlopeHeader {
  name: string;
  yColumn: string;
  xColumn: string;
  value: number;
}

export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const comments = text
    .split(/\r?\n/)
    .filter((line) => line.startsWith("#"))
    .map((line) => line.replace(/^#\s?/, ""));
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    delimiter: ",",
    comments: "#",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  return { path, comments, columns, rows: parsed.data };
}

/** Numeric view of one column; empty cells become null. */
export function column(table: CsvTable, name: string): Array<number | null> {
  if (!table.columns.includes(name)) {
    throw new Error(`${table.path}: missing column '${name}'`);
  }
  return table.rows.map((row) => {
    const cell = row[name];
    if (cell === undefined || cell === "") return null;
    const value = Number(cell);
    if (Number.isNaN(value)) {
      throw new Error(
        `${table.path}: column '${name}' has non-numeric cell '${cell}'`);
    }
    return value;
  });
}

/** Paired numeric series; rows where either cell is empty are dropped. */
export function series(
  table: CsvTable, xName: string, yName: string,
): { x: number[]; y: number[] } {
  const xs = column(table, xName);
  const ys = column(table, yName);
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < xs.length; i++) {
    if (xs[i] !== null && ys[i] !== null) {
      x.push(xs[i] as number);
      y.push(ys[i] as number);
    }
  }
  if (y.length === 0) {
    throw new Error(`${table.path}: column '${yName}' has no usable values`);
  }
  return { x, y };
}

/** Extract the `slope_<y>_vs_<x>=<value>` headers a sweep CSV carries. */
export function slopeHeaders(table: CsvTable): SlopeHeader[] {
  const out: SlopeHeader[] = [];
  for (const line of table.comments) {
    if (!line.startsWith("slope_")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) continue;
    const name = line.slice("slope_".length, eq);
    const value = Number(line.slice(eq + 1));
    const vs = name.indexOf("_vs_");
    if (vs < 0 || Number.isNaN(value)) {
      throw new Error(`${table.path}: malformed slope header '# ${line}'`);
    }
    out.push({
      name,
      yColumn: name.slice(0, vs),
      xColumn: name.slice(vs + "_vs_".length),
      value,
    });
  }
  return out;
}
