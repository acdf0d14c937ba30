import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, describe, expect, it, vi } from "vitest";

import { run } from "../src/cli.js";

const EXAMPLES = new URL("../examples/", import.meta.url).pathname;

function quiet() {
  return {
    out: vi.spyOn(console, "log").mockImplementation(() => {}),
    err: vi.spyOn(console, "error").mockImplementation(() => {}),
  };
}

afterEach(() => vi.restoreAllMocks());

describe("plots CLI", () => {
  it("renders a figure to the requested path", () => {
    const { out } = quiet();
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    const target = join(dir, "decay.svg");
    const code = run(["SweepDecay", join(EXAMPLES, "sweep_incomp.csv"),
                      "-o", target]);
    expect(code).toBe(0);
    expect(existsSync(target)).toBe(true);
    expect(readFileSync(target, "utf8")).toContain("slope-annotation");
    expect(out).toHaveBeenCalledWith(`SweepDecay -> ${target}`);
  });

  it("accepts multiple CSVs", () => {
    quiet();
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    const target = join(dir, "residual.svg");
    const code = run(["Residual", join(EXAMPLES, "energy.csv"),
                      join(EXAMPLES, "energy_zero.csv"), "--output", target]);
    expect(code).toBe(0);
    expect(existsSync(target)).toBe(true);
  });

  it("rejects an unknown figure kind with usage", () => {
    const { err } = quiet();
    expect(run(["Sparkline", "x.csv", "-o", "y.svg"])).toBe(2);
    expect(err.mock.calls[0][0]).toMatch(/unknown figure kind 'Sparkline'/);
  });

  it("requires at least one CSV and an output path", () => {
    quiet();
    expect(run(["Residual", "-o", "y.svg"])).toBe(2);
    expect(run(["Residual", join(EXAMPLES, "energy.csv")])).toBe(2);
  });

  it("maps render errors to exit 1 with the message on stderr", () => {
    const { err } = quiet();
    expect(run(["C2Gap", join(EXAMPLES, "sweep_incomp.csv"),
                "-o", "/tmp/never.svg"])).toBe(1);
    expect(err.mock.calls[0][0]).toMatch(/c2_gap_u/);
    expect(run(["Residual", "no-such-file.csv", "-o", "/tmp/never.svg"]))
      .toBe(1);
  });
});
