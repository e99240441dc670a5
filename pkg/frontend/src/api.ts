/** Thin client for the results API. The fetch function is injectable so tests
 * can stub every response; the UI never computes metric values itself. */

import type {
  AggregateResponse,
  DetailResponse,
  DrResponse,
  InputResponse,
  RecordResponse,
  RunDetailSummary,
  RunSummary,
} from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    const payload = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) {
      const err = payload?.error as { message?: string } | undefined;
      throw new ApiError(resp.status, err?.message ?? `request failed (${resp.status})`);
    }
    return payload as T;
  }

  async runs(): Promise<RunSummary[]> {
    const payload = await this.get<{ runs: RunSummary[] }>("/api/v1/runs");
    return payload.runs;
  }

  run(rid: string): Promise<RunDetailSummary> {
    return this.get(`/api/v1/runs/${encodeURIComponent(rid)}`);
  }

  aggregate(rid: string, opts: { classLabel?: number; maps?: boolean } = {}): Promise<AggregateResponse> {
    const params = new URLSearchParams();
    if (opts.classLabel !== undefined) params.set("class_label", String(opts.classLabel));
    if (opts.maps) params.set("maps", "1");
    const qs = params.toString();
    return this.get(`/api/v1/runs/${encodeURIComponent(rid)}/aggregate${qs ? "?" + qs : ""}`);
  }

  dr(rid: string, coloring: "mean" | "variance"): Promise<DrResponse> {
    return this.get(`/api/v1/runs/${encodeURIComponent(rid)}/dr?coloring=${coloring}`);
  }

  record(rid: string, sampleId: string): Promise<RecordResponse> {
    return this.get(
      `/api/v1/runs/${encodeURIComponent(rid)}/records/${encodeURIComponent(sampleId)}`,
    );
  }

  detail(rid: string, sampleId: string, orbitIndex: number): Promise<DetailResponse> {
    return this.get(
      `/api/v1/runs/${encodeURIComponent(rid)}/detail/${encodeURIComponent(sampleId)}/${orbitIndex}`,
    );
  }

  input(rid: string, sampleId: string, orbitIndex: number): Promise<InputResponse> {
    return this.get(
      `/api/v1/runs/${encodeURIComponent(rid)}/input/${encodeURIComponent(sampleId)}/${orbitIndex}`,
    );
  }
}
