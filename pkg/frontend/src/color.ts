/** Sequential colormap with polarity-aware direction: bright always means good.
 * Model comparison uses the fixed blue/magenta pair. */

// five-stop dark-to-bright ramp (indigo -> teal -> yellow)
const RAMP: [number, number, number][] = [
  [13, 8, 135],
  [84, 41, 160],
  [35, 136, 142],
  [122, 209, 81],
  [253, 231, 37],
];

export const MODEL_A_COLOR = "#3366cc"; // blue
export const MODEL_B_COLOR = "#cc3399"; // magenta

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

/** t in [0, 1] -> css color along the ramp. */
export function ramp(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const pos = clamped * (RAMP.length - 1);
  const i = Math.min(Math.floor(pos), RAMP.length - 2);
  const f = pos - i;
  const [r1, g1, b1] = RAMP[i];
  const [r2, g2, b2] = RAMP[i + 1];
  return `rgb(${Math.round(lerp(r1, r2, f))},${Math.round(lerp(g1, g2, f))},${Math.round(
    lerp(b1, b2, f),
  )})`;
}

/** Normalize a metric value into ramp position; lower-is-better flips direction. */
export function metricColor(
  value: number | null,
  bounds: [number, number],
  higherIsBetter: boolean,
): string {
  if (value === null || Number.isNaN(value)) {
    return "#555555"; // failed elements render as neutral dark gray
  }
  const [lo, hi] = bounds;
  const t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
  return ramp(higherIsBetter ? t : 1 - t);
}

/** Data-driven bounds with a degenerate-range guard. */
export function valueBounds(values: (number | null)[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v === null || Number.isNaN(v)) continue;
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

/** Format a fetched number for display; the UI never derives new numbers. */
export function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "n/a";
  return Number(value.toPrecision(4)).toString();
}
