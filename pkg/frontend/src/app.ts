/** Controller: owns the view state, fetches API data, renders the five panels.
 *
 * Rendering goes through a sink callback so the controller runs headless in
 * tests. Concurrent fetches are guarded by a sequence number: responses that
 * arrive for an outdated selection are discarded.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  renderAggregatePanel,
  renderDetailPanel,
  renderDrPanel,
  renderIndividualPanel,
  renderInputPanel,
} from "./panels.js";
import {
  ViewState,
  initialState,
  onDrClick,
  onOrbitDrag,
  selectRun,
  setColoring,
  setCompareRun,
  setSubset,
  toggleAveraged,
} from "./state.js";
import type {
  AggregateResponse,
  DetailResponse,
  DrResponse,
  InputResponse,
  RecordResponse,
  RunDetailSummary,
  RunSummary,
} from "./types.js";

export type PanelName = "aggregate" | "dr" | "individual" | "input" | "detail";

export type RenderSink = (panel: PanelName, html: string) => void;

function errorSection(panel: PanelName, message: string): string {
  return `<section id="${panel}-panel"><p class="error">${message}</p></section>`;
}

export class App {
  state: ViewState = initialState();
  runs: RunSummary[] = [];
  private summary: RunDetailSummary | null = null;
  private aggregate: AggregateResponse | null = null;
  private compareAggregate: AggregateResponse | null = null;
  private dr: DrResponse | null = null;
  private record: RecordResponse | null = null;
  private compareRecord: RecordResponse | null = null;
  private seq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly sink: RenderSink,
  ) {}

  async start(): Promise<RunSummary[]> {
    this.runs = await this.api.runs();
    if (this.runs.length > 0) {
      await this.selectRun(this.runs[0].id);
    }
    return this.runs;
  }

  async selectRun(runId: string): Promise<void> {
    const mySeq = ++this.seq;
    const summary = await this.api.run(runId);
    const dr = await this.api.dr(runId, this.state.coloring);
    if (mySeq !== this.seq) return;
    this.summary = summary;
    this.dr = dr;
    this.state = selectRun(this.state, runId, summary.orbit, dr.sample_ids);
    this.aggregate = await this.fetchAggregate(runId);
    await this.refreshSelection(mySeq);
    this.renderOverview();
  }

  async selectCompareRun(runId: string | null): Promise<void> {
    this.state = setCompareRun(this.state, runId);
    this.compareAggregate = null;
    this.compareRecord = null;
    if (runId !== null) {
      this.compareAggregate = await this.fetchAggregate(runId);
      if (this.state.selectedSample !== null) {
        this.compareRecord = await this.fetchOrNull(() =>
          this.api.record(runId, this.state.selectedSample as string),
        );
      }
    }
    this.renderOverview();
    this.renderIndividual();
  }

  async changeColoring(mode: "mean" | "variance"): Promise<void> {
    this.state = setColoring(this.state, mode);
    if (this.state.runId !== null) {
      this.dr = await this.api.dr(this.state.runId, mode);
      this.renderDr();
    }
  }

  async changeSubset(subsetClass: number | null): Promise<void> {
    this.state = setSubset(this.state, subsetClass);
    if (this.state.runId !== null) {
      this.aggregate = await this.fetchAggregate(this.state.runId);
      this.renderAggregate();
    }
  }

  async flipAveraged(): Promise<void> {
    this.state = toggleAveraged(this.state);
    if (this.state.runId !== null) {
      this.aggregate = await this.fetchAggregate(this.state.runId);
      this.renderAggregate();
    }
  }

  /** DR dot click: update the sample selection and every dependent panel. */
  async clickDr(sampleId: string | null): Promise<void> {
    const before = this.state;
    this.state = onDrClick(this.state, sampleId);
    if (this.state === before) return;
    await this.refreshSelection(++this.seq);
    this.renderDr();
  }

  /** Orbit drag: select the nearest element and refresh the element-linked panels. */
  async dragOrbit(coordinate: [number, number] | null): Promise<void> {
    const before = this.state;
    this.state = onOrbitDrag(this.state, coordinate);
    if (this.state === before) return;
    const mySeq = ++this.seq;
    await this.refreshElementViews(mySeq);
    this.renderAggregate();
    this.renderIndividual();
  }

  // --- data fetching ---

  private fetchAggregate(runId: string): Promise<AggregateResponse | null> {
    return this.fetchOrNull(() =>
      this.api.aggregate(runId, {
        classLabel: this.state.subsetClass ?? undefined,
        maps: !this.state.averaged,
      }),
    );
  }

  private async fetchOrNull<T>(thunk: () => Promise<T>): Promise<T | null> {
    try {
      return await thunk();
    } catch (exc) {
      if (exc instanceof ApiError) return null;
      throw exc;
    }
  }

  private async refreshSelection(mySeq: number): Promise<void> {
    const { runId, selectedSample, compareRunId } = this.state;
    if (runId === null || selectedSample === null) return;
    const record = await this.fetchOrNull(() => this.api.record(runId, selectedSample));
    if (mySeq !== this.seq) return;
    this.record = record;
    this.compareRecord =
      compareRunId === null
        ? null
        : await this.fetchOrNull(() => this.api.record(compareRunId, selectedSample));
    await this.refreshElementViews(mySeq);
    this.renderIndividual();
  }

  private async refreshElementViews(mySeq: number): Promise<void> {
    const { runId, selectedSample, selectedOrbitIndex } = this.state;
    if (runId === null || selectedSample === null) return;
    const [detail, input] = await Promise.all([
      this.fetchOrNull(() => this.api.detail(runId, selectedSample, selectedOrbitIndex)),
      this.fetchOrNull(() => this.api.input(runId, selectedSample, selectedOrbitIndex)),
    ]);
    if (mySeq !== this.seq) return;
    this.renderDetail(detail);
    this.renderInput(input);
  }

  // --- rendering ---

  private renderOverview(): void {
    this.renderAggregate();
    this.renderDr();
    this.renderIndividual();
  }

  private renderAggregate(): void {
    if (this.summary === null || this.aggregate === null) {
      this.sink("aggregate", errorSection("aggregate", "aggregate unavailable"));
      return;
    }
    this.sink(
      "aggregate",
      renderAggregatePanel(this.summary.orbit, this.aggregate, this.state, this.compareAggregate),
    );
  }

  private renderDr(): void {
    if (this.dr === null) {
      this.sink("dr", errorSection("dr", "DR layout unavailable"));
      return;
    }
    this.sink("dr", renderDrPanel(this.dr, this.state));
  }

  private renderIndividual(): void {
    if (this.summary === null || this.record === null) {
      this.sink("individual", errorSection("individual", "record unavailable"));
      return;
    }
    this.sink(
      "individual",
      renderIndividualPanel(
        this.summary.orbit,
        this.record,
        this.state,
        this.summary.higher_is_better,
        this.compareRecord,
      ),
    );
  }

  private renderInput(input: InputResponse | null): void {
    this.sink("input", renderInputPanel(input, this.state));
  }

  private renderDetail(detail: DetailResponse | null): void {
    this.sink("detail", renderDetailPanel(detail, this.state));
  }
}
