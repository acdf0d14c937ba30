import { basename } from "node:path";

import { CsvTable, column, series, slopeHeaders } from "./csv.js";
import { fitLogLogSlope } from "./fit.js";
import {
  Scale, Scene, decadeTicks, formatTick, linearScale, linearTicks,
  log10Scale, polylinePoints,
} from "./svg.js";

export type FigureKind = "EnergyBudget" | "Residual" | "SweepDecay" | "C2Gap";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 44, right: 28, bottom: 52, left: 76 };

const PALETTE = [
  "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#777777",
];

/** Floor applied before log-scaling residuals so exact zeros stay plottable. */
export const RESIDUAL_FLOOR = 1e-18;

interface Frame {
  scene: Scene;
  sx: Scale;
  sy: Scale;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

function makeFrame(opts: {
  title: string;
  xLabel: string;
  yLabel: string;
  xDomain: readonly [number, number];
  yDomain: readonly [number, number];
  xLog?: boolean;
  yLog?: boolean;
}): Frame {
  const scene = new Scene(WIDTH, HEIGHT);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  const sx = (opts.xLog ? log10Scale : linearScale)(opts.xDomain, [x0, x1]);
  const sy = (opts.yLog ? log10Scale : linearScale)(opts.yDomain, [y0, y1]);

  scene.add("text", {
    x: (x0 + x1) / 2, y: MARGIN.top - 18, "text-anchor": "middle",
    "font-size": 15, "font-weight": "bold",
  }, opts.title);

  const xTicks = opts.xLog
    ? decadeTicks(opts.xDomain[0], opts.xDomain[1])
    : linearTicks(opts.xDomain[0], opts.xDomain[1]);
  for (const t of xTicks) {
    const px = sx(t);
    scene.add("line", {
      x1: px, y1: y0, x2: px, y2: y1, stroke: "#dddddd", "stroke-width": 1,
    });
    scene.add("text", {
      x: px, y: y0 + 18, "text-anchor": "middle", fill: "#333333",
    }, formatTick(t));
  }
  const yTicks = opts.yLog
    ? decadeTicks(opts.yDomain[0], opts.yDomain[1])
    : linearTicks(opts.yDomain[0], opts.yDomain[1]);
  for (const t of yTicks) {
    const py = sy(t);
    scene.add("line", {
      x1: x0, y1: py, x2: x1, y2: py, stroke: "#dddddd", "stroke-width": 1,
    });
    scene.add("text", {
      x: x0 - 8, y: py + 4, "text-anchor": "end", fill: "#333333",
    }, formatTick(t));
  }

  scene.add("rect", {
    x: x0, y: y1, width: x1 - x0, height: y0 - y1,
    fill: "none", stroke: "#333333", "stroke-width": 1,
  });
  scene.add("text", {
    x: (x0 + x1) / 2, y: HEIGHT - 14, "text-anchor": "middle",
  }, opts.xLabel);
  scene.add("text", {
    x: 18, y: (y0 + y1) / 2, "text-anchor": "middle",
    transform: `rotate(-90 18 ${(y0 + y1) / 2})`,
  }, opts.yLabel);
  return { scene, sx, sy, x0, y0, x1, y1 };
}

function legend(frame: Frame, entries: Array<{ label: string; color: string }>): void {
  entries.forEach((entry, i) => {
    const y = frame.y1 + 14 + 16 * i;
    const x = frame.x1 - 210;
    frame.scene.add("line", {
      x1: x, y1: y - 4, x2: x + 22, y2: y - 4,
      stroke: entry.color, "stroke-width": 3,
    });
    frame.scene.add("text", { x: x + 28, y, fill: "#333333" }, entry.label);
  });
}

function label(table: CsvTable, total: number, name: string): string {
  return total > 1 ? `${basename(table.path)}: ${name}` : name;
}

function requireSingle(tables: CsvTable[], kind: string): CsvTable {
  if (tables.length !== 1) {
    throw new Error(`${kind} takes exactly one CSV, got ${tables.length}`);
  }
  return tables[0];
}

// ---------------------------------------------------------------------------

const ENERGY_BANDS = [
  "kinetic", "solid_shear", "solid_compress", "fluid_compress", "thermal",
] as const;

/** Stacked stored-energy bands plus cumulative dissipation and work lines. */
export function renderEnergyBudget(tables: CsvTable[]): string {
  const table = requireSingle(tables, "EnergyBudget");
  const t = column(table, "t").map((v) => v ?? 0);
  const bands = ENERGY_BANDS.map((name) =>
    column(table, name).map((v) => v ?? 0));
  const dissipation = ["diss_nu", "diss_mu", "diss_kappa"]
    .map((name) => column(table, name).map((v) => v ?? 0))
    .reduce((acc, col) => acc.map((v, i) => v + col[i]));
  const work = column(table, "work").map((v) => v ?? 0);

  const stack: number[][] = [t.map(() => 0)];
  for (const band of bands) {
    stack.push(stack[stack.length - 1].map((v, i) => v + band[i]));
  }
  const top = stack[stack.length - 1];
  const yMax = Math.max(...top, ...dissipation, ...work, 0) || 1;

  const frame = makeFrame({
    title: "energy budget",
    xLabel: "t",
    yLabel: "energy",
    xDomain: [t[0], t[t.length - 1] || 1],
    yDomain: [0, yMax * 1.05],
  });

  bands.forEach((_, b) => {
    const upper = stack[b + 1];
    const lower = stack[b];
    const forward = t.map((x, i) =>
      `${frame.sx(x).toFixed(2)},${frame.sy(upper[i]).toFixed(2)}`);
    const backward = t.map((x, i) =>
      `${frame.sx(x).toFixed(2)},${frame.sy(lower[i]).toFixed(2)}`).reverse();
    frame.scene.add("path", {
      d: `M ${forward.join(" L ")} L ${backward.join(" L ")} Z`,
      fill: PALETTE[b], "fill-opacity": 0.8, stroke: "none",
      class: "energy-band",
    });
  });
  frame.scene.add("polyline", {
    points: polylinePoints(t, dissipation, frame.sx, frame.sy),
    fill: "none", stroke: "#333333", "stroke-width": 2,
    "stroke-dasharray": "6 3", class: "dissipation-line",
  });
  frame.scene.add("polyline", {
    points: polylinePoints(t, work, frame.sx, frame.sy),
    fill: "none", stroke: "#000000", "stroke-width": 2, class: "work-line",
  });

  legend(frame, [
    ...ENERGY_BANDS.map((name, i) => ({ label: name, color: PALETTE[i] })),
    { label: "cumulative dissipation", color: "#333333" },
    { label: "cumulative work", color: "#000000" },
  ]);
  return frame.scene.render();
}

/** Energy-identity defect over time, one curve per CSV, log vertical axis. */
export function renderResidual(tables: CsvTable[]): string {
  const curves = tables.map((table) => ({
    table,
    t: column(table, "t").map((v) => v ?? 0),
    r: column(table, "residual")
      .map((v) => Math.max(Math.abs(v ?? 0), RESIDUAL_FLOOR)),
  }));
  const tMax = Math.max(...curves.map((c) => c.t[c.t.length - 1] || 1));
  const rMax = Math.max(...curves.flatMap((c) => c.r));
  const rMin = Math.min(...curves.flatMap((c) => c.r));

  const frame = makeFrame({
    title: "energy-identity residual",
    xLabel: "t",
    yLabel: `|residual| (floor ${RESIDUAL_FLOOR})`,
    xDomain: [0, tMax],
    yDomain: [rMin / 10, rMax * 10],
    yLog: true,
  });
  curves.forEach((curve, i) => {
    frame.scene.add("polyline", {
      points: polylinePoints(curve.t, curve.r, frame.sx, frame.sy),
      fill: "none", stroke: PALETTE[i % PALETTE.length], "stroke-width": 2,
      class: "residual-line",
    });
  });
  legend(frame, curves.map((curve, i) => ({
    label: label(curve.table, tables.length, "residual"),
    color: PALETTE[i % PALETTE.length],
  })));
  return frame.scene.render();
}

interface DecaySeries {
  name: string;
  x: number[];
  y: number[];
  slope: number;
  color: string;
  seriesLabel: string;
}

function positiveSeries(
  table: CsvTable, xName: string, yName: string,
): { x: number[]; y: number[] } {
  const raw = series(table, xName, yName);
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < raw.x.length; i++) {
    if (raw.x[i] > 0 && raw.y[i] > 0) {
      x.push(raw.x[i]);
      y.push(raw.y[i]);
    }
  }
  if (x.length < 2) {
    throw new Error(
      `${table.path}: series '${yName}' needs at least two positive points`);
  }
  return { x, y };
}

/**
 * Log-log constraint decay along a penalty ladder: markers, a fitted line,
 * and a slope annotation per `# slope_*=` header found in each CSV.  The
 * annotation is recomputed here with the shared fit formula, never copied
 * from the header.
 */
export function renderSweepDecay(tables: CsvTable[]): string {
  const all: DecaySeries[] = [];
  for (const table of tables) {
    const headers = slopeHeaders(table);
    if (headers.length === 0) {
      throw new Error(
        `${table.path}: no '# slope_*' header lines (not a sweep CSV?)`);
    }
    for (const header of headers) {
      const { x, y } = positiveSeries(table, header.xColumn, header.yColumn);
      all.push({
        name: header.name,
        x, y,
        slope: fitLogLogSlope(x, y),
        color: PALETTE[all.length % PALETTE.length],
        seriesLabel: label(table, tables.length, header.yColumn),
      });
    }
  }

  const xs = all.flatMap((s) => s.x);
  const ys = all.flatMap((s) => s.y);
  const frame = makeFrame({
    title: "constraint decay along the penalty ladder",
    xLabel: "penalty coefficient",
    yLabel: "squared sup-in-time constraint norm",
    xDomain: [Math.min(...xs), Math.max(...xs)],
    yDomain: [Math.min(...ys) / 10, Math.max(...ys) * 10],
    xLog: true,
    yLog: true,
  });

  all.forEach((s) => {
    for (let i = 0; i < s.x.length; i++) {
      frame.scene.add("circle", {
        cx: frame.sx(s.x[i]).toFixed(2), cy: frame.sy(s.y[i]).toFixed(2),
        r: 4, fill: s.color, class: "marker",
      });
    }
    // fitted line through the centroid of the log-log cloud
    const mx = s.x.map(Math.log10).reduce((a, b) => a + b, 0) / s.x.length;
    const my = s.y.map(Math.log10).reduce((a, b) => a + b, 0) / s.y.length;
    const lo = Math.min(...s.x);
    const hi = Math.max(...s.x);
    const at = (v: number) => 10 ** (my + s.slope * (Math.log10(v) - mx));
    frame.scene.add("polyline", {
      points: polylinePoints([lo, hi], [at(lo), at(hi)], frame.sx, frame.sy),
      fill: "none", stroke: s.color, "stroke-width": 1.5,
      "stroke-dasharray": "5 3", class: "fit-line",
    });
  });

  all.forEach((s, i) => {
    frame.scene.add("text", {
      x: frame.x0 + 10, y: frame.y1 + 16 + 16 * i,
      fill: s.color, class: "slope-annotation", "data-slope": String(s.slope),
    }, `${s.seriesLabel}: slope = ${s.slope.toFixed(9)}`);
  });
  return frame.scene.render();
}

const C2_COLUMNS = ["c2_gap_u", "c2_gap_theta", "c2_gap_p"] as const;

/** Distance to the rigid-skeleton stationary solution along a joint ladder. */
export function renderC2Gap(tables: CsvTable[]): string {
  const curves = tables.flatMap((table, ti) =>
    C2_COLUMNS.map((name, ci) => {
      const { x, y } = positiveSeries(table, "epsilon", name);
      return {
        name: label(table, tables.length, name),
        x, y,
        color: PALETTE[(ti * C2_COLUMNS.length + ci) % PALETTE.length],
      };
    }));

  const xs = curves.flatMap((c) => c.x);
  const ys = curves.flatMap((c) => c.y);
  const frame = makeFrame({
    title: "gap to the stationary limit solution",
    xLabel: "epsilon",
    yLabel: "space-time L2 gap",
    xDomain: [Math.min(...xs), Math.max(...xs)],
    yDomain: [Math.min(...ys) / 10, Math.max(...ys) * 10],
    xLog: true,
    yLog: true,
  });
  curves.forEach((curve) => {
    frame.scene.add("polyline", {
      points: polylinePoints(curve.x, curve.y, frame.sx, frame.sy),
      fill: "none", stroke: curve.color, "stroke-width": 2, class: "gap-line",
    });
    for (let i = 0; i < curve.x.length; i++) {
      frame.scene.add("circle", {
        cx: frame.sx(curve.x[i]).toFixed(2),
        cy: frame.sy(curve.y[i]).toFixed(2),
        r: 4, fill: curve.color, class: "marker",
      });
    }
  });
  legend(frame, curves.map((c) => ({ label: c.name, color: c.color })));
  return frame.scene.render();
}

export const RENDERERS: Record<FigureKind, (tables: CsvTable[]) => string> = {
  EnergyBudget: renderEnergyBudget,
  Residual: renderResidual,
  SweepDecay: renderSweepDecay,
  C2Gap: renderC2Gap,
};
