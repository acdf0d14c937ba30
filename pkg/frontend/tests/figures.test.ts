import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { readCsv, slopeHeaders } from "../src/csv.js";
import {
  renderC2Gap, renderEnergyBudget, renderResidual, renderSweepDecay,
} from "../src/figures.js";

const EXAMPLES = new URL("../examples/", import.meta.url).pathname;
const load = (name: string) => readCsv(join(EXAMPLES, name));

function countMatches(text: string, pattern: RegExp): number {
  return (text.match(pattern) ?? []).length;
}

describe("renderEnergyBudget", () => {
  it("stacks the five stored-energy bands plus two cumulative lines", () => {
    const svg = renderEnergyBudget([load("energy.csv")]);
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(countMatches(svg, /class="energy-band"/g)).toBe(5);
    expect(countMatches(svg, /class="dissipation-line"/g)).toBe(1);
    expect(countMatches(svg, /class="work-line"/g)).toBe(1);
  });

  it("renders zero data as flat curves on the baseline", () => {
    const svg = renderEnergyBudget([load("energy_zero.csv")]);
    const baseline = /<rect x="76" y="44" width="\d+" height="(\d+)"/.exec(svg);
    // every path/polyline vertex of a zero run sits at a single y value
    const ys = new Set(
      [...svg.matchAll(/[\d.]+,([\d.]+)/g)].map((m) => m[1]));
    expect(baseline).not.toBeNull();
    expect(ys.size).toBe(1);
  });

  it("takes exactly one CSV", () => {
    const table = load("energy.csv");
    expect(() => renderEnergyBudget([table, table])).toThrow(/exactly one/);
  });

  it("names a missing column", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-test-"));
    const path = join(dir, "short.csv");
    writeFileSync(path, "t,work\n0,0\n1,1\n");
    expect(() => renderEnergyBudget([readCsv(path)]))
      .toThrow(/missing column 'kinetic'/);
  });
});

describe("renderResidual", () => {
  it("draws one curve per input CSV, zeros clamped to the floor", () => {
    const svg = renderResidual([load("energy.csv"), load("energy_zero.csv")]);
    expect(countMatches(svg, /class="residual-line"/g)).toBe(2);
    expect(svg).toContain("floor 1e-18");
  });
});

describe("renderSweepDecay", () => {
  it("marks every ladder rung and annotates each fitted slope", () => {
    const table = load("sweep_incomp.csv");
    const svg = renderSweepDecay([table]);
    // two series (fluid, solid) of four rungs each
    expect(countMatches(svg, /class="marker"/g)).toBe(8);
    expect(countMatches(svg, /class="fit-line"/g)).toBe(2);
    expect(countMatches(svg, /class="slope-annotation"/g)).toBe(2);
  });

  it("recomputes the annotation to 1e-9 of the CSV header slope", () => {
    for (const file of ["sweep_incomp.csv", "sweep_joint.csv"]) {
      const table = load(file);
      const svg = renderSweepDecay([table]);
      const annotated = [...svg.matchAll(/data-slope="([^"]+)"/g)]
        .map((m) => Number(m[1]));
      const expected = slopeHeaders(table).map((h) => h.value);
      expect(annotated.length).toBe(expected.length);
      annotated.forEach((slope, i) => {
        expect(Math.abs(slope - expected[i])).toBeLessThan(1e-9);
      });
      // the visible nine-decimal label agrees too
      const labels = [...svg.matchAll(/slope = (-?\d+\.\d{9})</g)]
        .map((m) => Number(m[1]));
      labels.forEach((slope, i) => {
        expect(Math.abs(slope - expected[i])).toBeLessThanOrEqual(1e-9);
      });
    }
  });

  it("rejects a CSV without slope headers", () => {
    expect(() => renderSweepDecay([load("energy.csv")]))
      .toThrow(/no '# slope_\*' header lines/);
  });
});

describe("renderC2Gap", () => {
  it("draws the three gap curves of a joint sweep", () => {
    const svg = renderC2Gap([load("sweep_joint.csv")]);
    expect(countMatches(svg, /class="gap-line"/g)).toBe(3);
    expect(countMatches(svg, /class="marker"/g)).toBe(12);
  });

  it("names the empty column on a non-joint sweep", () => {
    expect(() => renderC2Gap([load("sweep_incomp.csv")]))
      .toThrow(/column 'c2_gap_u' has no usable values/);
  });
});
