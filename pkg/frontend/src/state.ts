/** View state shared by the five linked panels, and its update rules.
 *
 * Invariants kept by every transition: the selected orbit index is inside the
 * orbit, and the selected sample belongs to the selected run. Fresh loads
 * select the identity element and the first sample.
 */

import type { OrbitInfo } from "./types.js";

export interface ViewState {
  runId: string | null;
  /** optional second run for side-by-side comparison (shared selection) */
  compareRunId: string | null;
  subsetClass: number | null;
  sampleIds: string[];
  selectedSample: string | null;
  orbit: OrbitInfo | null;
  selectedOrbitIndex: number;
  coloring: "mean" | "variance";
  averaged: boolean;
  colormapBounds: [number, number];
}

export function initialState(): ViewState {
  return {
    runId: null,
    compareRunId: null,
    subsetClass: null,
    sampleIds: [],
    selectedSample: null,
    orbit: null,
    selectedOrbitIndex: 0,
    coloring: "mean",
    averaged: true,
    colormapBounds: [0, 1],
  };
}

export function selectRun(
  state: ViewState,
  runId: string,
  orbit: OrbitInfo,
  sampleIds: string[],
): ViewState {
  return {
    ...state,
    runId,
    subsetClass: null,
    sampleIds,
    selectedSample: sampleIds[0] ?? null,
    orbit,
    selectedOrbitIndex: orbit.identity_index,
  };
}

export function setCompareRun(state: ViewState, runId: string | null): ViewState {
  return { ...state, compareRunId: runId };
}

export function setSubset(state: ViewState, subsetClass: number | null): ViewState {
  return { ...state, subsetClass };
}

export function setColoring(state: ViewState, coloring: "mean" | "variance"): ViewState {
  return { ...state, coloring };
}

export function toggleAveraged(state: ViewState): ViewState {
  return { ...state, averaged: !state.averaged };
}

/** Click on a DR dot: select that sample. Clicks that hit no dot change nothing. */
export function onDrClick(state: ViewState, sampleId: string | null): ViewState {
  if (sampleId === null || !state.sampleIds.includes(sampleId)) {
    return state;
  }
  return { ...state, selectedSample: sampleId };
}

/** Drag inside the orbit plot: select the nearest orbit element. */
export function onOrbitDrag(state: ViewState, coordinate: [number, number] | null): ViewState {
  if (state.orbit === null || coordinate === null) {
    return state;
  }
  const index = nearestOrbitIndex(state.orbit, coordinate);
  if (index === null) {
    return state;
  }
  return { ...state, selectedOrbitIndex: index };
}

/** Nearest element by layout distance; null when the point is outside the plot. */
export function nearestOrbitIndex(
  orbit: OrbitInfo,
  [x, y]: [number, number],
): number | null {
  if (orbit.layout.length === 0) return null;
  let best = -1;
  let bestD = Infinity;
  for (let i = 0; i < orbit.layout.length; i++) {
    const [lx, ly] = orbit.layout[i];
    const d = Math.hypot(lx - x, ly - y);
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  }
  // reject drags clearly outside the plot: farther than one grid step from
  // every element
  const scale = plotScale(orbit);
  return bestD <= scale ? best : null;
}

/** A tolerance radius: the typical spacing between neighboring layout points. */
export function plotScale(orbit: OrbitInfo): number {
  if (orbit.layout.length < 2) return 1;
  let nearest = Infinity;
  const [x0, y0] = orbit.layout[0];
  for (let i = 1; i < orbit.layout.length; i++) {
    const [x, y] = orbit.layout[i];
    nearest = Math.min(nearest, Math.hypot(x - x0, y - y0));
  }
  return nearest * 1.5;
}
