/** Browser bootstrap: bind DOM events to the controller and inject panel HTML. */

import { ApiClient } from "./api.js";
import { App, PanelName } from "./app.js";

const PANEL_CONTAINERS: Record<PanelName, string> = {
  aggregate: "aggregate-slot",
  dr: "dr-slot",
  individual: "individual-slot",
  input: "input-slot",
  detail: "detail-slot",
};

function plotCoordinate(svg: SVGSVGElement, event: MouseEvent): [number, number] | null {
  const sx = Number(svg.dataset.sx);
  const sy = Number(svg.dataset.sy);
  const ox = Number(svg.dataset.ox);
  const oy = Number(svg.dataset.oy);
  if (!sx || !sy) return null;
  const rect = svg.getBoundingClientRect();
  const viewX = ((event.clientX - rect.left) / rect.width) * svg.viewBox.baseVal.width;
  const viewY = ((event.clientY - rect.top) / rect.height) * svg.viewBox.baseVal.height;
  return [(viewX - ox) / sx, (viewY - oy) / sy];
}

function main(): void {
  const app = new App(new ApiClient(""), (panel, html) => {
    const slot = document.getElementById(PANEL_CONTAINERS[panel]);
    if (slot) slot.innerHTML = html;
  });

  const runSelect = document.getElementById("run-select") as HTMLSelectElement;
  const compareSelect = document.getElementById("compare-select") as HTMLSelectElement;
  const subsetSelect = document.getElementById("subset-select") as HTMLSelectElement;
  const coloringSelect = document.getElementById("coloring-select") as HTMLSelectElement;
  const averagedToggle = document.getElementById("averaged-toggle") as HTMLInputElement;

  app.start().then((runs) => {
    runSelect.innerHTML = runs
      .map((r) => `<option value="${r.id}">${r.run_id} (${r.metric})</option>`)
      .join("");
    compareSelect.innerHTML =
      `<option value="">none</option>` +
      runs.map((r) => `<option value="${r.id}">${r.run_id}</option>`).join("");
    refreshSubsets();
  });

  function refreshSubsets(): void {
    const run = app.runs.find((r) => r.id === runSelect.value) ?? app.runs[0];
    const classes = run?.classes ?? [];
    subsetSelect.innerHTML =
      `<option value="">all samples</option>` +
      classes.map((c) => `<option value="${c}">class ${c}</option>`).join("");
  }

  runSelect.addEventListener("change", () => {
    app.selectRun(runSelect.value).then(refreshSubsets);
  });
  compareSelect.addEventListener("change", () => {
    app.selectCompareRun(compareSelect.value || null);
  });
  subsetSelect.addEventListener("change", () => {
    app.changeSubset(subsetSelect.value === "" ? null : Number(subsetSelect.value));
  });
  coloringSelect.addEventListener("change", () => {
    app.changeColoring(coloringSelect.value as "mean" | "variance");
  });
  averagedToggle.addEventListener("change", () => {
    app.flipAveraged();
  });

  // delegated interactions: DR dot clicks and orbit-plot drag/click
  document.body.addEventListener("click", (event) => {
    const target = event.target as Element;
    const dot = target.closest(".dr-dot") as SVGElement | null;
    if (dot) {
      app.clickDr(dot.getAttribute("data-sample-id"));
      return;
    }
    const plot = target.closest("svg.orbit-plot") as SVGSVGElement | null;
    if (plot) {
      app.dragOrbit(plotCoordinate(plot, event));
    }
  });
  let dragging = false;
  document.body.addEventListener("mousedown", (event) => {
    if ((event.target as Element).closest("svg.orbit-plot")) dragging = true;
  });
  document.body.addEventListener("mouseup", () => {
    dragging = false;
  });
  document.body.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    const plot = (event.target as Element).closest("svg.orbit-plot") as SVGSVGElement | null;
    if (plot) {
      app.dragOrbit(plotCoordinate(plot, event));
    }
  });
}

main();
