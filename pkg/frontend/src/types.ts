/** Response shapes of the read-only results API (see docs/protocol.md). */

export type LayoutKind = "polar" | "cartesian-grid" | "cell-grid" | "triple-polar";

export interface TensorBlock {
  shape: number[];
  dtype: string;
  data: string; // base64 little-endian floats
}

export interface OrbitElement {
  kind: string;
  angle?: number;
  tx?: number;
  ty?: number;
  rot?: number;
  reflect?: boolean;
  time_reverse?: boolean;
  axis?: number[];
}

export interface OrbitInfo {
  kind: string;
  layout_kind: LayoutKind;
  identity_index: number;
  layout: [number, number][];
  elements: OrbitElement[];
}

export interface RunSummary {
  id: string;
  run_id: string;
  created_at: string;
  metric: string;
  higher_is_better: boolean;
  truth_mode: string;
  modality: string;
  model: string;
  orbit_kind: string;
  orbit_size: number;
  sample_count: number;
  classes: number[];
}

export interface RunDetailSummary extends RunSummary {
  orbit: OrbitInfo;
  dr_explained: number[];
}

export interface AggregateResponse {
  metric: string;
  higher_is_better: boolean;
  values: (number | null)[];
  coverage: number[];
  has_maps: boolean;
  maps?: (number | null)[][][];
}

export interface DrResponse {
  method: string;
  coloring: "mean" | "variance";
  explained: number[];
  sample_ids: string[];
  class_labels: (number | null)[];
  coords: [number, number][];
  colors: (number | null)[];
}

export interface RecordResponse {
  sample_id: string;
  class_label: number | null;
  values: (number | null)[];
  mean: number;
  variance: number;
  nan_count: number;
  errors: Record<string, string>;
  truth: unknown;
}

export interface DetailBox {
  box: [number, number, number, number];
  confidence: number;
  class_index: number;
  iou: number | null;
}

export interface DetailResponse {
  sample_id: string;
  orbit_index: number;
  element: OrbitElement;
  metric: number | null;
  stale: boolean;
  error: string | null;
  kind: "classification" | "detection" | "flow" | "unknown";
  class_probs?: (number | null)[] | null;
  truth_label?: number | null;
  num_classes?: number | null;
  boxes?: DetailBox[];
  truth_box?: [number, number, number, number] | null;
  map?: (number | null)[][] | null;
  pred?: { kind: string; flow: TensorBlock };
  truth?: unknown;
}

export interface InputResponse {
  id: string;
  kind: "image" | "image_pair" | "point_cloud";
  image?: TensorBlock;
  frame_a?: TensorBlock;
  frame_b?: TensorBlock;
  points?: TensorBlock;
}
