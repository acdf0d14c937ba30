#!/usr/bin/env node
import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { readCsv } from "./csv.js";
import { FigureKind, RENDERERS } from "./figures.js";

const USAGE =
  "usage: plots <EnergyBudget|Residual|SweepDecay|C2Gap> <csv...> -o <out.svg>";

/** Parse arguments, render, write; returns the process exit code. */
export function run(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: { output: { type: "string", short: "o" } },
      allowPositionals: true,
    });
  } catch (error) {
    console.error(`${(error as Error).message}\n${USAGE}`);
    return 2;
  }
  const [kind, ...csvPaths] = parsed.positionals;
  if (!kind || !(kind in RENDERERS)) {
    console.error(`unknown figure kind '${kind ?? ""}'\n${USAGE}`);
    return 2;
  }
  if (csvPaths.length === 0 || !parsed.values.output) {
    console.error(USAGE);
    return 2;
  }
  try {
    const tables = csvPaths.map(readCsv);
    const svg = RENDERERS[kind as FigureKind](tables);
    writeFileSync(parsed.values.output, svg + "\n");
  } catch (error) {
    console.error((error as Error).message);
    return 1;
  }
  console.log(`${kind} -> ${parsed.values.output}`);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plots")) {
  process.exit(run(process.argv.slice(2)));
}
