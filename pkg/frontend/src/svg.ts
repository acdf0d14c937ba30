/** Hand-rolled SVG scene: enough for axes, lines, markers, and labels. */

export type Attrs = Record<string, string | number>;

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function escapeAttr(value: string): string {
  return escapeText(value).replace(/"/g, "&quot;");
}

export class Scene {
  readonly width: number;
  readonly height: number;
  private readonly parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  add(tag: string, attrs: Attrs, text?: string): void {
    const pairs = Object.entries(attrs)
      .map(([key, value]) => `${key}="${escapeAttr(String(value))}"`)
      .join(" ");
    if (text === undefined) {
      this.parts.push(`<${tag} ${pairs}/>`);
    } else {
      this.parts.push(`<${tag} ${pairs}>${escapeText(text)}</${tag}>`);
    }
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${this.width} ${this.height}" ` +
        `width="${this.width}" height="${this.height}" font-family="sans-serif" font-size="12">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export interface Scale {
  (value: number): number;
  readonly kind: "linear" | "log10";
  readonly domain: readonly [number, number];
}

export function linearScale(
  domain: readonly [number, number], range: readonly [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as {
    (v: number): number; kind: "linear" | "log10"; domain: readonly [number, number];
  };
  scale.kind = "linear";
  scale.domain = domain;
  return scale;
}

export function log10Scale(
  domain: readonly [number, number], range: readonly [number, number],
): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const scale = ((v: number) => inner(Math.log10(v))) as {
    (v: number): number; kind: "linear" | "log10"; domain: readonly [number, number];
  };
  scale.kind = "log10";
  scale.domain = domain;
  return scale;
}

/** Round-ish tick positions for a linear axis. */
export function linearTicks(lo: number, hi: number, count = 5): number[] {
  if (hi <= lo) return [lo];
  const rawStep = (hi - lo) / count;
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const residual = rawStep / magnitude;
  const step = (residual >= 5 ? 5 : residual >= 2 ? 2 : 1) * magnitude;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Powers of ten covering [lo, hi]. */
export function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); 10 ** e <= hi * (1 + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks.length > 0 ? ticks : [lo];
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) {
    const e = Math.floor(Math.log10(abs));
    const mantissa = value / 10 ** e;
    return Math.abs(mantissa - 1) < 1e-9 ? `1e${e}` : `${mantissa.toPrecision(2)}e${e}`;
  }
  return String(Number(value.toPrecision(4)));
}

export function polylinePoints(
  xs: readonly number[], ys: readonly number[], sx: Scale, sy: Scale,
): string {
  const points: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    points.push(`${sx(xs[i]).toFixed(2)},${sy(ys[i]).toFixed(2)}`);
  }
  return points.join(" ");
}
