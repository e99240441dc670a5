/** The five linked panels, rendered as SVG/HTML strings from API data.
 *
 * Every number shown here comes straight out of an API response (formatted
 * with fmt); the panels never recompute metrics. Interactive regions carry
 * data attributes that main.ts wires to state transitions, and each panel
 * root records the (sample, orbit element) it is showing so the linked-view
 * contract is checkable from the outside.
 */

import { MODEL_A_COLOR, MODEL_B_COLOR, fmt, metricColor, valueBounds } from "./color.js";
import type { ViewState } from "./state.js";
import { decodeTensor, toGrayscaleGrid } from "./tensor.js";
import type {
  AggregateResponse,
  DetailResponse,
  DrResponse,
  InputResponse,
  OrbitInfo,
  RecordResponse,
} from "./types.js";

const SIZE = 240;
const PAD = 18;

interface Transform {
  sx: number;
  sy: number;
  ox: number;
  oy: number;
}

/** Map layout coordinates into the SVG viewport (y flipped: layout y is up). */
function layoutTransform(orbit: OrbitInfo): Transform {
  let [minX, minY, maxX, maxY] = [Infinity, Infinity, -Infinity, -Infinity];
  for (const [x, y] of orbit.layout) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const s = (SIZE - 2 * PAD) / Math.max(spanX, spanY);
  return {
    sx: s,
    sy: -s,
    ox: PAD - minX * s + ((SIZE - 2 * PAD) - spanX * s) / 2,
    oy: SIZE - PAD + minY * s - ((SIZE - 2 * PAD) - spanY * s) / 2,
  };
}

function toScreen(t: Transform, x: number, y: number): [number, number] {
  return [t.ox + x * t.sx, t.oy + y * t.sy];
}

function transformAttrs(t: Transform): string {
  return `data-sx="${t.sx}" data-sy="${t.sy}" data-ox="${t.ox}" data-oy="${t.oy}"`;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Marker size that roughly fills one layout cell. */
function cellRadius(orbit: OrbitInfo, t: Transform): number {
  if (orbit.layout.length < 2) return 8;
  let nearest = Infinity;
  const [x0, y0] = orbit.layout[0];
  for (let i = 1; i < orbit.layout.length; i++) {
    const [x, y] = orbit.layout[i];
    nearest = Math.min(nearest, Math.hypot(x - x0, y - y0));
  }
  return Math.max(2.5, (nearest * t.sx) / 2);
}

function orbitValuesSvg(
  orbit: OrbitInfo,
  values: (number | null)[],
  higherIsBetter: boolean,
  selected: number | null,
  interactive: boolean,
): string {
  const t = layoutTransform(orbit);
  const bounds = valueBounds(values);
  const r = cellRadius(orbit, t);
  const parts: string[] = [];
  const isPolar = orbit.layout_kind === "polar";
  if (isPolar) {
    // the classic polar curve: radius scaled by the normalized value
    const pts = orbit.layout.map(([x, y], k) => {
      const v = values[k];
      const [lo, hi] = bounds;
      const norm = v === null ? 0 : hi > lo ? (v - lo) / (hi - lo) : 0.5;
      const radius = 0.25 + 0.75 * norm;
      return toScreen(t, x * radius, y * radius);
    });
    const d = pts.map(([x, y], i) => `${i ? "L" : "M"}${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
    parts.push(`<path d="${d} Z" fill="none" stroke="${MODEL_A_COLOR}" stroke-width="2"/>`);
    const [cx, cy] = toScreen(t, 0, 0);
    parts.push(
      `<circle cx="${cx}" cy="${cy}" r="${(SIZE - 2 * PAD) / 2}" fill="none" stroke="#ccc" stroke-dasharray="3 3"/>`,
    );
  }
  orbit.layout.forEach(([x, y], k) => {
    const [px, py] = toScreen(t, x, y);
    const fill = metricColor(values[k] ?? null, bounds, higherIsBetter);
    const shape = isPolar
      ? `<circle data-orbit-index="${k}" cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="3.5" fill="${fill}"/>`
      : `<rect data-orbit-index="${k}" x="${(px - r).toFixed(1)}" y="${(py - r).toFixed(1)}" width="${(2 * r).toFixed(1)}" height="${(2 * r).toFixed(1)}" fill="${fill}"/>`;
    parts.push(shape);
  });
  if (selected !== null && selected < orbit.layout.length) {
    const [sx, sy] = toScreen(t, orbit.layout[selected][0], orbit.layout[selected][1]);
    const [cx, cy] = toScreen(t, 0, 0);
    if (isPolar) {
      parts.push(
        `<line x1="${cx}" y1="${cy}" x2="${sx}" y2="${sy}" stroke="#2a2" stroke-width="2"/>`,
      );
    }
    parts.push(
      `<circle cx="${sx.toFixed(1)}" cy="${sy.toFixed(1)}" r="${Math.max(5, r)}" fill="none" stroke="#2a2" stroke-width="2"/>`,
    );
  }
  const cls = interactive ? ` class="orbit-plot"` : "";
  return `<svg${cls} viewBox="0 0 ${SIZE} ${SIZE}" width="${SIZE}" height="${SIZE}" ${transformAttrs(t)}>${parts.join("")}</svg>`;
}

// --- aggregate ---

export function renderAggregatePanel(
  orbit: OrbitInfo,
  agg: AggregateResponse,
  state: ViewState,
  compare: AggregateResponse | null = null,
): string {
  const plots = [orbitValuesSvg(orbit, agg.values, agg.higher_is_better, state.selectedOrbitIndex, true)];
  if (compare !== null) {
    plots.push(
      orbitValuesSvg(orbit, compare.values, compare.higher_is_better, state.selectedOrbitIndex, false),
    );
  }
  const maps =
    !state.averaged && agg.maps
      ? `<div class="small-multiples">${agg.maps
          .map((m, k) => mapSvg(m, 52, `data-orbit-index="${k}"`))
          .join("")}</div>`
      : "";
  const subset = state.subsetClass === null ? "all samples" : `class ${state.subsetClass}`;
  return `<section id="aggregate-panel" data-orbit-index="${state.selectedOrbitIndex}">
<h3>Aggregate ${esc(agg.metric)} (${esc(subset)})</h3>
${plots.join("\n")}${maps}
</section>`;
}

// --- DR scatter ---

export function renderDrPanel(dr: DrResponse, state: ViewState): string {
  let [minX, minY, maxX, maxY] = [Infinity, Infinity, -Infinity, -Infinity];
  for (const [x, y] of dr.coords) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  const span = Math.max(maxX - minX, maxY - minY) || 1;
  const s = (SIZE - 2 * PAD) / span;
  const bounds = valueBounds(dr.colors);
  const dots = dr.coords
    .map(([x, y], i) => {
      const px = PAD + (x - minX) * s;
      const py = SIZE - PAD - (y - minY) * s;
      const fill = metricColor(dr.colors[i] ?? null, bounds, true);
      const sid = dr.sample_ids[i];
      const ring =
        sid === state.selectedSample
          ? `<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="9" fill="none" stroke="#d22" stroke-width="2"/>`
          : "";
      return `<circle class="dr-dot" data-sample-id="${esc(sid)}" cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="5" fill="${fill}"/>${ring}`;
    })
    .join("");
  const explained = dr.explained.map((e) => fmt(e)).join(", ");
  return `<section id="dr-panel" data-sample-id="${esc(state.selectedSample ?? "")}">
<h3>DR scatter (${esc(dr.method)}, colored by ${esc(dr.coloring)})</h3>
<svg viewBox="0 0 ${SIZE} ${SIZE}" width="${SIZE}" height="${SIZE}">${dots}</svg>
<p>explained variance: ${explained}</p>
</section>`;
}

// --- individual ---

export function renderIndividualPanel(
  orbit: OrbitInfo,
  record: RecordResponse,
  state: ViewState,
  higherIsBetter: boolean,
  compare: RecordResponse | null = null,
): string {
  const plots = [
    orbitValuesSvg(orbit, record.values, higherIsBetter, state.selectedOrbitIndex, true),
  ];
  if (compare !== null) {
    plots.push(
      orbitValuesSvg(orbit, compare.values, higherIsBetter, state.selectedOrbitIndex, false),
    );
  }
  return `<section id="individual-panel" data-sample-id="${esc(record.sample_id)}" data-orbit-index="${state.selectedOrbitIndex}">
<h3>Individual NERO: ${esc(record.sample_id)}</h3>
${plots.join("\n")}
<p>mean ${fmt(record.mean)}, variance ${fmt(record.variance)}${
    record.nan_count ? `, failed elements: ${record.nan_count}` : ""
  }</p>
</section>`;
}

// --- input display ---

function mapSvg(grid: (number | null)[][], size: number, extra: string = ""): string {
  const h = grid.length;
  const w = grid[0]?.length ?? 0;
  if (!h || !w) return "<svg/>";
  const flat = grid.flat();
  const bounds = valueBounds(flat);
  const cw = size / w;
  const ch = size / h;
  const cells: string[] = [];
  for (let r = 0; r < h; r++) {
    for (let c = 0; c < w; c++) {
      cells.push(
        `<rect x="${(c * cw).toFixed(2)}" y="${(r * ch).toFixed(2)}" width="${cw.toFixed(2)}" height="${ch.toFixed(2)}" fill="${metricColor(grid[r][c], bounds, false)}"/>`,
      );
    }
  }
  return `<svg ${extra} viewBox="0 0 ${size} ${size}" width="${size}" height="${size}">${cells.join("")}</svg>`;
}

function graySvg(grid: number[][], size: number): string {
  const h = grid.length;
  const w = grid[0]?.length ?? 0;
  if (!h || !w) return "<svg/>";
  // downsample display grids so huge images stay light
  const step = Math.max(1, Math.ceil(Math.max(h, w) / 64));
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of grid) for (const v of row) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const span = hi - lo || 1;
  const cells: string[] = [];
  const cw = size / Math.ceil(w / step);
  const ch = size / Math.ceil(h / step);
  for (let r = 0; r < h; r += step) {
    for (let c = 0; c < w; c += step) {
      const v = Math.round(((grid[r][c] - lo) / span) * 255);
      cells.push(
        `<rect x="${((c / step) * cw).toFixed(2)}" y="${((r / step) * ch).toFixed(2)}" width="${cw.toFixed(2)}" height="${ch.toFixed(2)}" fill="rgb(${v},${v},${v})"/>`,
      );
    }
  }
  return `<svg viewBox="0 0 ${size} ${size}" width="${size}" height="${size}">${cells.join("")}</svg>`;
}

export function renderInputPanel(input: InputResponse | null, state: ViewState): string {
  const header = `<section id="input-panel" data-sample-id="${esc(state.selectedSample ?? "")}" data-orbit-index="${state.selectedOrbitIndex}">
<h3>Transformed input</h3>`;
  if (input === null) {
    return `${header}<p class="muted">input unavailable (dataset not reachable)</p></section>`;
  }
  let body = "";
  if (input.kind === "image" && input.image) {
    body = graySvg(toGrayscaleGrid(decodeTensor(input.image)), 200);
  } else if (input.kind === "image_pair" && input.frame_a && input.frame_b) {
    body =
      graySvg(toGrayscaleGrid(decodeTensor(input.frame_a)), 130) +
      graySvg(toGrayscaleGrid(decodeTensor(input.frame_b)), 130);
  } else if (input.kind === "point_cloud" && input.points) {
    const tensor = decodeTensor(input.points);
    const n = tensor.shape[0];
    const dots: string[] = [];
    for (let i = 0; i < n; i++) {
      const x = tensor.values[i * 3];
      const y = tensor.values[i * 3 + 1];
      const z = tensor.values[i * 3 + 2];
      const shade = Math.round(Math.max(0, Math.min(1, z)) * 200) + 30;
      dots.push(
        `<circle cx="${(20 + x * 160).toFixed(1)}" cy="${(180 - y * 160).toFixed(1)}" r="2" fill="rgb(${shade},${shade},${shade})"/>`,
      );
    }
    body = `<svg viewBox="0 0 200 200" width="200" height="200">${dots.join("")}</svg>`;
  }
  return `${header}${body}</section>`;
}

// --- detail ---

export function renderDetailPanel(
  detail: DetailResponse | null,
  state: ViewState,
  compare: DetailResponse | null = null,
): string {
  const header = `<section id="detail-panel" data-sample-id="${esc(state.selectedSample ?? "")}" data-orbit-index="${state.selectedOrbitIndex}">
<h3>Detail</h3>`;
  if (detail === null) {
    return `${header}<p class="muted">no detail available</p></section>`;
  }
  const stale = detail.stale ? `<p class="muted">cached output (model endpoint unavailable)</p>` : "";
  const err = detail.error ? `<p class="error">${esc(detail.error)}</p>` : "";
  let body = "";
  if (detail.kind === "classification" && detail.class_probs) {
    body = classificationBars(detail, compare);
  } else if (detail.kind === "detection") {
    body = detectionDetail(detail);
  } else if (detail.kind === "flow") {
    body = flowDetail(detail);
  }
  return `${header}
<p>metric value: <b>${fmt(detail.metric)}</b></p>
${body}${stale}${err}</section>`;
}

function classificationBars(detail: DetailResponse, compare: DetailResponse | null): string {
  const probs = detail.class_probs ?? [];
  const compareProbs = compare?.class_probs ?? null;
  const n = probs.length;
  const barW = Math.max(10, Math.floor(220 / Math.max(1, n)) - 4);
  const bars: string[] = [];
  probs.forEach((p, i) => {
    const h = (p ?? 0) * 150;
    const x = 10 + i * (barW + 4);
    const truth = i === detail.truth_label;
    bars.push(
      `<rect data-class="${i}" x="${x}" y="${(160 - h).toFixed(1)}" width="${compareProbs ? barW / 2 : barW}" height="${h.toFixed(1)}" fill="${MODEL_A_COLOR}" ${truth ? 'stroke="#2a2" stroke-width="2"' : ""}><title>${fmt(p)}</title></rect>`,
    );
    if (compareProbs) {
      const h2 = (compareProbs[i] ?? 0) * 150;
      bars.push(
        `<rect x="${x + barW / 2}" y="${(160 - h2).toFixed(1)}" width="${barW / 2}" height="${h2.toFixed(1)}" fill="${MODEL_B_COLOR}"><title>${fmt(compareProbs[i])}</title></rect>`,
      );
    }
    bars.push(`<text x="${x + barW / 2}" y="174" font-size="9" text-anchor="middle">${i}</text>`);
  });
  const probText = probs.map((p) => fmt(p)).join(" ");
  return `<svg viewBox="0 0 240 180" width="240" height="180">${bars.join("")}</svg>
<p class="probs">confidences: ${probText}</p>`;
}

function detectionDetail(detail: DetailResponse): string {
  const boxes = detail.boxes ?? [];
  const all = [...boxes.map((b) => b.box), ...(detail.truth_box ? [detail.truth_box] : [])];
  let [minX, minY, maxX, maxY] = [0, 0, 1, 1];
  if (all.length) {
    minX = Math.min(...all.map((b) => b[0]));
    minY = Math.min(...all.map((b) => b[1]));
    maxX = Math.max(...all.map((b) => b[2]));
    maxY = Math.max(...all.map((b) => b[3]));
  }
  const s = 200 / Math.max(maxX - minX, maxY - minY, 1);
  const rect = (b: [number, number, number, number], stroke: string, dash = "") =>
    `<rect x="${((b[0] - minX) * s + 10).toFixed(1)}" y="${((b[1] - minY) * s + 10).toFixed(1)}" width="${((b[2] - b[0]) * s).toFixed(1)}" height="${((b[3] - b[1]) * s).toFixed(1)}" fill="none" stroke="${stroke}" stroke-width="2" ${dash}/>`;
  const shapes: string[] = [];
  if (detail.truth_box) {
    shapes.push(rect(detail.truth_box, "#2a2", 'stroke-dasharray="5 3"'));
  }
  boxes.forEach((b, i) => shapes.push(rect(b.box, i === 0 ? MODEL_A_COLOR : "#888")));
  const rows = boxes
    .map(
      (b) =>
        `<tr><td>${b.class_index}</td><td>${fmt(b.confidence)}</td><td>${fmt(b.iou)}</td></tr>`,
    )
    .join("");
  return `<svg viewBox="0 0 220 220" width="220" height="220">${shapes.join("")}</svg>
<table><thead><tr><th>class</th><th>confidence</th><th>IOU</th></tr></thead><tbody>${rows}</tbody></table>`;
}

function flowDetail(detail: DetailResponse): string {
  const parts: string[] = [];
  if (detail.map) {
    parts.push(mapSvg(detail.map, 180));
  }
  if (detail.pred?.flow) {
    // vector glyphs of the predicted field, subsampled
    const tensor = decodeTensor(detail.pred.flow);
    const [h, w] = tensor.shape;
    const step = Math.max(1, Math.floor(Math.max(h, w) / 12));
    const s = 180 / Math.max(h, w);
    const glyphs: string[] = [];
    for (let r = 0; r < h; r += step) {
      for (let c = 0; c < w; c += step) {
        const vx = tensor.values[(r * w + c) * 2];
        const vy = tensor.values[(r * w + c) * 2 + 1];
        const x = (c + 0.5) * s;
        const y = (r + 0.5) * s;
        glyphs.push(
          `<line x1="${x.toFixed(1)}" y1="${y.toFixed(1)}" x2="${(x + vx * s * 2).toFixed(1)}" y2="${(y - vy * s * 2).toFixed(1)}" stroke="${MODEL_A_COLOR}" stroke-width="1"/>`,
        );
      }
    }
    parts.push(`<svg viewBox="0 0 180 180" width="180" height="180">${glyphs.join("")}</svg>`);
  }
  return parts.join("\n");
}
