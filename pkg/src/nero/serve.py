"""Read-only HTTP API over stored results, consumed by the browser UI.

Routes (all JSON, versioned under /api/v1):

    GET /api/v1/runs                                   -> run listing
    GET /api/v1/runs/{rid}                             -> summary + orbit layout
    GET /api/v1/runs/{rid}/aggregate                   -> aggregate vector (+maps flag)
    GET /api/v1/runs/{rid}/dr?coloring=mean|variance   -> DR scatter data
    GET /api/v1/runs/{rid}/records/{sample}            -> one NERO record
    GET /api/v1/runs/{rid}/detail/{sample}/{k}         -> modality-specific detail
    GET /api/v1/runs/{rid}/input/{sample}/{k}          -> transformed input payload

Detail responses prefer a live model call when an endpoint is configured and
reachable; otherwise the outputs cached in the result file are served with
``"stale": true``. Unknown ids answer 404. Nothing mutates stored results.
"""

from __future__ import annotations

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .actions import BBox, ClassLabel, ClassProbs, Detections, FlowField, act_output, output_element
from .dataprep import load_dataset
from .engine import NeroRecord, NeroResult, _transform
from .metrics import iou
from .modelproto import HttpModel, ModelProtocolError, encode_input
from .projection import color_values
from .results import element_to_json, load_result, truth_to_json

API_PREFIX = "/api/v1"


def _clean(value):
    """JSON-safe floats: NaN becomes null."""
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


class RunStore:
    """Loaded results plus lazily loaded datasets for input/detail recompute."""

    def __init__(self, paths, model_url: Optional[str] = None):
        self.results: dict[str, NeroResult] = {}
        self.paths: dict[str, Path] = {}
        self._datasets: dict[str, object] = {}
        self._lock = threading.Lock()
        self.model_url = model_url
        for path in self._expand(paths):
            result = load_result(path)
            rid = result.run_id
            if rid in self.results:
                rid = f"{result.run_id}@{path.stem}"
            self.results[rid] = result
            self.paths[rid] = path

    @staticmethod
    def _expand(paths) -> list[Path]:
        files = []
        for p in map(Path, paths):
            if p.is_dir():
                files.extend(sorted(p.glob("*.json")))
            else:
                files.append(p)
        return files

    def result(self, rid: str) -> Optional[NeroResult]:
        return self.results.get(rid)

    def record(self, rid: str, sample_id: str) -> Optional[NeroRecord]:
        result = self.result(rid)
        if result is None:
            return None
        for record in result.records:
            if record.sample_id == sample_id:
                return record
        return None

    def dataset(self, rid: str):
        """The dataset behind a run, if its manifest is still where the run notes say."""
        with self._lock:
            if rid not in self._datasets:
                result = self.results.get(rid)
                manifest = (result.notes or {}).get("manifest_path") if result else None
                ds = None
                if manifest and Path(manifest).exists():
                    try:
                        ds = load_dataset(manifest)
                    except Exception:
                        ds = None
                self._datasets[rid] = ds
            return self._datasets[rid]

    def eval_sample(self, rid: str, sample_id: str):
        ds = self.dataset(rid)
        if ds is None:
            return None
        for sample in ds.samples:
            if sample.sample_id == sample_id:
                return sample
        return None


def _run_summary(rid: str, result: NeroResult) -> dict:
    return {
        "id": rid,
        "run_id": result.run_id,
        "created_at": result.created_at,
        "metric": result.metric_name,
        "higher_is_better": result.metric_higher_is_better,
        "truth_mode": result.truth_mode,
        "modality": result.model.modality,
        "model": result.model.name,
        "orbit_kind": result.orbit.kind,
        "orbit_size": len(result.orbit),
        "sample_count": len(result.records),
        "classes": sorted({r.class_label for r in result.records if r.class_label is not None}),
    }


class ResultsApi:
    """Route handling, separated from the HTTP plumbing for testability."""

    def __init__(self, store: RunStore):
        self.store = store

    def handle(self, path: str, query: dict) -> tuple[int, dict]:
        parts = [p for p in path.split("/") if p]
        # parts: ["api", "v1", "runs", ...]
        if parts[:2] != ["api", "v1"] or len(parts) < 3 or parts[2] != "runs":
            return 404, {"error": {"code": "not_found", "message": f"no route {path}"}}
        rest = parts[3:]
        if not rest:
            return 200, {
                "runs": [_run_summary(rid, r) for rid, r in sorted(self.store.results.items())]
            }
        rid = rest[0]
        result = self.store.result(rid)
        if result is None:
            return 404, {"error": {"code": "not_found", "message": f"no run {rid!r}"}}
        if len(rest) == 1:
            summary = _run_summary(rid, result)
            summary["orbit"] = {
                "kind": result.orbit.kind,
                "layout_kind": result.orbit.layout_kind,
                "identity_index": result.orbit.identity_index,
                "layout": [list(xy) for xy in result.orbit.layout],
                "elements": [element_to_json(g) for g in result.orbit.elements],
            }
            summary["dr_explained"] = list(result.dr.explained)
            return 200, summary
        if rest[1] == "aggregate":
            return self._aggregate(result, query)
        if rest[1] == "dr":
            return self._dr(result, query)
        if rest[1] == "records" and len(rest) == 3:
            return self._record(result, rid, rest[2])
        if rest[1] == "detail" and len(rest) == 4:
            return self._detail(result, rid, rest[2], rest[3])
        if rest[1] == "input" and len(rest) == 4:
            return self._input(rid, rest[2], rest[3], len(result.orbit))
        return 404, {"error": {"code": "not_found", "message": f"no route {path}"}}

    def _aggregate(self, result: NeroResult, query: dict) -> tuple[int, dict]:
        subset_class = query.get("class_label", [None])[0]
        values = result.aggregate
        coverage = result.aggregate_coverage
        if subset_class is not None:
            from .engine import aggregate_coverage, aggregate_nero, subset_filter

            picked = subset_filter(result.records, class_label=int(subset_class))
            if not picked:
                return 404, {
                    "error": {"code": "not_found", "message": f"no samples of class {subset_class}"}
                }
            values = aggregate_nero(picked)
            coverage = aggregate_coverage(picked)
        payload = {
            "metric": result.metric_name,
            "higher_is_better": result.metric_higher_is_better,
            "values": _clean([float(v) for v in values]),
            "coverage": [int(c) for c in coverage],
            "has_maps": result.aggregate_maps is not None,
        }
        if result.aggregate_maps is not None and query.get("maps", ["0"])[0] == "1":
            payload["maps"] = _clean(result.aggregate_maps.tolist())
        return 200, payload

    def _dr(self, result: NeroResult, query: dict) -> tuple[int, dict]:
        coloring = query.get("coloring", ["mean"])[0]
        if coloring not in ("mean", "variance"):
            return 400, {"error": {"code": "bad_request", "message": f"bad coloring {coloring!r}"}}
        colors = color_values(result.records, coloring)
        return 200, {
            "method": result.dr.method,
            "coloring": coloring,
            "explained": list(result.dr.explained),
            "sample_ids": [r.sample_id for r in result.records],
            "class_labels": [r.class_label for r in result.records],
            "coords": [[float(u), float(v)] for u, v in result.dr.coords],
            "colors": _clean([float(c) for c in colors]),
        }

    def _record(self, result: NeroResult, rid: str, sample_id: str) -> tuple[int, dict]:
        record = self.store.record(rid, sample_id)
        if record is None:
            return 404, {"error": {"code": "not_found", "message": f"no sample {sample_id!r}"}}
        return 200, {
            "sample_id": record.sample_id,
            "class_label": record.class_label,
            "values": _clean([float(v) for v in record.scalars()]),
            "mean": record.mean,
            "variance": record.variance,
            "nan_count": record.nan_count,
            "errors": {str(k): v for k, v in record.errors.items()},
            "truth": truth_to_json(record.truth),
        }

    def _live_output(self, rid: str, sample_id: str, k: int):
        if self.store.model_url is None:
            return None
        sample = self.store.eval_sample(rid, sample_id)
        result = self.store.result(rid)
        if sample is None or result is None:
            return None
        try:
            client = HttpModel(self.store.model_url, timeout_s=5.0, retries=0)
            return client.infer([_transform(sample, result.orbit, k)])[0]
        except ModelProtocolError:
            return None

    def _detail(self, result: NeroResult, rid: str, sample_id: str, k_raw: str) -> tuple[int, dict]:
        record = self.store.record(rid, sample_id)
        if record is None:
            return 404, {"error": {"code": "not_found", "message": f"no sample {sample_id!r}"}}
        try:
            k = int(k_raw)
        except ValueError:
            return 404, {"error": {"code": "not_found", "message": f"bad orbit index {k_raw!r}"}}
        if not 0 <= k < len(record.values):
            return 404, {"error": {"code": "not_found", "message": f"orbit index {k} out of range"}}

        output = self._live_output(rid, sample_id, k)
        stale = output is None
        if output is None:
            output = record.outputs[k] if k < len(record.outputs) else None
        g = result.orbit.elements[k]
        payload: dict = {
            "sample_id": sample_id,
            "orbit_index": k,
            "element": element_to_json(g),
            "metric": _clean(float(record.values[k].value)),
            "stale": stale,
            "error": record.errors.get(k),
        }
        truth = record.truth
        if isinstance(output, ClassProbs) or isinstance(truth, ClassLabel):
            payload["kind"] = "classification"
            payload["class_probs"] = None if output is None else [float(p) for p in output.probs]
            payload["truth_label"] = truth.index if isinstance(truth, ClassLabel) else None
            payload["num_classes"] = truth.num_classes if isinstance(truth, ClassLabel) else None
        elif isinstance(output, Detections) or isinstance(truth, BBox):
            payload["kind"] = "detection"
            moved = act_output(output_element(g), truth) if isinstance(truth, BBox) else None
            payload["truth_box"] = (
                None if moved is None else [moved.xmin, moved.ymin, moved.xmax, moved.ymax]
            )
            boxes = []
            if output is not None:
                for det in output.items:
                    boxes.append(
                        {
                            "box": [det.box.xmin, det.box.ymin, det.box.xmax, det.box.ymax],
                            "confidence": det.confidence,
                            "class_index": det.box.class_index,
                            "iou": None if moved is None else iou(det.box, moved).value,
                        }
                    )
            payload["boxes"] = boxes
        elif isinstance(output, FlowField) or isinstance(truth, FlowField):
            payload["kind"] = "flow"
            per_loc = record.values[k].per_location
            payload["map"] = None if per_loc is None else _clean(per_loc.tolist())
            if output is not None:
                from .modelproto import encode_output

                payload["pred"] = encode_output(output)
            if isinstance(truth, FlowField):
                moved = act_output(output_element(g), truth)
                payload["truth"] = truth_to_json(moved)
        else:
            payload["kind"] = "unknown"
        return 200, payload

    def _input(self, rid: str, sample_id: str, k_raw: str, orbit_size: int) -> tuple[int, dict]:
        try:
            k = int(k_raw)
        except ValueError:
            return 404, {"error": {"code": "not_found", "message": f"bad orbit index {k_raw!r}"}}
        if not 0 <= k < orbit_size:
            return 404, {"error": {"code": "not_found", "message": f"orbit index {k} out of range"}}
        sample = self.store.eval_sample(rid, sample_id)
        if sample is None:
            return 404, {
                "error": {
                    "code": "no_dataset",
                    "message": "dataset manifest is not available to regenerate inputs",
                }
            }
        result = self.store.result(rid)
        moved = _transform(sample, result.orbit, k)
        return 200, encode_input(moved)


def _handler_for(api: ResultsApi, ui_dir: Optional[Path]):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):
            pass

        def _send(self, status: int, body: bytes, content_type: str):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            url = urlparse(self.path)
            if url.path.startswith(API_PREFIX):
                status, payload = api.handle(url.path, parse_qs(url.query))
                self._send(status, json.dumps(payload).encode("utf-8"), "application/json")
                return
            if ui_dir is not None:
                self._static(url.path)
                return
            self._send(
                200,
                json.dumps({"service": "nero-results", "api": API_PREFIX + "/runs"}).encode(),
                "application/json",
            )

        def _static(self, path: str):
            rel = path.lstrip("/") or "index.html"
            target = (ui_dir / rel).resolve()
            if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
                self._send(404, b"not found", "text/plain")
                return
            types = {
                ".html": "text/html",
                ".js": "text/javascript",
                ".css": "text/css",
                ".map": "application/json",
            }
            self._send(200, target.read_bytes(), types.get(target.suffix, "application/octet-stream"))

    return Handler


class ResultsServer:
    def __init__(self, store: RunStore, host: str = "127.0.0.1", port: int = 0, ui_dir=None):
        ui = Path(ui_dir) if ui_dir else None
        self.api = ResultsApi(store)
        self._httpd = ThreadingHTTPServer((host, port), _handler_for(self.api, ui))
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ResultsServer":
        self._thread.start()
        return self

    def serve_forever(self):
        self._thread.start()
        self._thread.join()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "ResultsServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()
