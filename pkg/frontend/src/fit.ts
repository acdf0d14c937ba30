/**
 * Least-squares slope of log10(y) against log10(x).
 *
 * This is the one piece of math shared with the solver side, reproduced
 * in the exact closed form its CSV headers are computed with:
 *
 *     slope = sum((lx - mean(lx)) * (ly - mean(ly))) / sum((lx - mean(lx))^2)
 *
 * Annotations rendered from this function must agree with the
 * `# slope_*=` header of the same CSV to 1e-9.
 */
export function fitLogLogSlope(x: readonly number[], y: readonly number[]): number {
  if (x.length !== y.length) {
    throw new Error("x and y must have the same length");
  }
  if (x.length < 2) {
    throw new Error("need at least two points to fit a slope");
  }
  const lx = x.map(Math.log10);
  const ly = y.map(Math.log10);
  const mx = lx.reduce((a, b) => a + b, 0) / lx.length;
  const my = ly.reduce((a, b) => a + b, 0) / ly.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < lx.length; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}
