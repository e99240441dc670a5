"""Serve an arbitrary predict function over the NERO inference protocol.

The adapter is framework-agnostic: it accepts any callable and handles the
wire format (JSON with base64 little-endian float32 tensor blocks, see the
evaluation engine's docs/protocol.md). The callable's contract depends on the
declared modality:

    image-classification      list[np.ndarray (H,W,C)]           -> list[probs (K,)]
    image-detection           list[np.ndarray (H,W,C)]           -> list[list[dict]]
                              each dict: {"box": (x0,y0,x1,y1), "confidence": c,
                                          "class_index": i}
    image-pair-flow           list[(frame_a, frame_b)]           -> list[np.ndarray (H,W,2)]
    pointcloud-classification list[np.ndarray (N,3)]             -> list[probs (K,)]

Calls into the predict function are serialized with a lock, so the function
itself need not be thread-safe even though the engine sends concurrent
requests. A predict exception becomes a protocol error envelope; the server
stays up.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional

import numpy as np

PROTOCOL_VERSION = "1"

MODALITIES = (
    "image-classification",
    "image-detection",
    "image-pair-flow",
    "pointcloud-classification",
)

INPUT_KIND = {
    "image-classification": "image",
    "image-detection": "image",
    "image-pair-flow": "image_pair",
    "pointcloud-classification": "point_cloud",
}


class PayloadError(ValueError):
    """Request outside the protocol schema."""


@dataclass(frozen=True)
class AdapterConfig:
    modality: str
    class_count: Optional[int] = None
    host: str = "127.0.0.1"
    port: int = 9000
    batch_limit: int = 32
    name: str = "adapter"

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if self.batch_limit < 1:
            raise ValueError("batch limit must be >= 1")


# --- tensor blocks ---


def decode_block(block) -> np.ndarray:
    if not isinstance(block, dict):
        raise PayloadError("tensor block must be an object")
    try:
        shape = tuple(int(s) for s in block["shape"])
        dtype = np.dtype(block["dtype"])
        raw = base64.b64decode(block["data"], validate=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise PayloadError(f"bad tensor block: {exc}") from exc
    expected = int(np.prod(shape)) * dtype.itemsize if shape else dtype.itemsize
    if len(raw) != expected:
        raise PayloadError(f"tensor data has {len(raw)} bytes, shape {shape} needs {expected}")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def encode_block(array: np.ndarray, dtype: str = "<f4") -> dict:
    arr = np.ascontiguousarray(np.asarray(array), dtype=np.dtype(dtype))
    return {
        "shape": list(arr.shape),
        "dtype": dtype,
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


# --- batch decode / output encode ---


def decode_batch(payload, modality: str) -> list:
    """Wire inputs -> the arrays the predict function sees, validating shapes."""
    inputs = payload.get("inputs") if isinstance(payload, dict) else None
    if not isinstance(inputs, list) or not inputs:
        raise PayloadError("request needs a nonempty 'inputs' list")
    kind = INPUT_KIND[modality]
    batch = []
    for item in inputs:
        if not isinstance(item, dict) or item.get("kind") != kind:
            got = item.get("kind") if isinstance(item, dict) else type(item).__name__
            raise PayloadError(f"{modality} expects {kind!r} inputs, got {got!r}")
        if kind == "image":
            img = decode_block(item.get("image"))
            if img.ndim != 3:
                raise PayloadError(f"image must be (H, W, C), got shape {list(img.shape)}")
            batch.append(img)
        elif kind == "image_pair":
            a = decode_block(item.get("frame_a"))
            b = decode_block(item.get("frame_b"))
            if a.shape != b.shape:
                raise PayloadError(f"frame shapes differ: {list(a.shape)} vs {list(b.shape)}")
            batch.append((a, b))
        else:
            pts = decode_block(item.get("points"))
            if pts.ndim != 2 or pts.shape[1] != 3:
                raise PayloadError(f"points must be (N, 3), got shape {list(pts.shape)}")
            batch.append(pts)
    return batch


def encode_outputs(results, modality: str) -> list[dict]:
    """Predict-function results -> wire outputs."""
    outputs = []
    for result in results:
        if modality in ("image-classification", "pointcloud-classification"):
            probs = np.asarray(result, dtype=np.float64).reshape(-1)
            outputs.append({"kind": "class_probs", "class_probs": [float(p) for p in probs]})
        elif modality == "image-detection":
            detections = []
            for det in result:
                x0, y0, x1, y1 = det["box"]
                detections.append(
                    {
                        "box": [float(x0), float(y0), float(x1), float(y1)],
                        "class_index": int(det.get("class_index", 0)),
                        "confidence": float(det["confidence"]),
                    }
                )
            outputs.append({"kind": "detections", "detections": detections})
        else:
            outputs.append({"kind": "flow", "flow": encode_block(result)})
    return outputs


# --- HTTP plumbing ---


def _handler_for(predict_fn: Callable, config: AdapterConfig, lock: threading.Lock):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):
            pass

        def _reply(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            request_id = self.headers.get("X-Request-Id")
            if request_id:
                self.send_header("X-Request-Id", request_id)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _error(self, status: int, code: str, message: str):
            self._reply(status, {"error": {"code": code, "message": message}})

        def do_GET(self):
            if self.path == "/v1/describe":
                self._reply(
                    200,
                    {
                        "name": config.name,
                        "modality": config.modality,
                        "class_count": config.class_count,
                        "max_batch": config.batch_limit,
                        "protocol_version": PROTOCOL_VERSION,
                    },
                )
            else:
                self._error(404, "not_found", f"no such endpoint {self.path}")

        def do_POST(self):
            if self.path != "/v1/infer":
                self._error(404, "not_found", f"no such endpoint {self.path}")
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length))
                batch = decode_batch(payload, config.modality)
            except (PayloadError, ValueError, json.JSONDecodeError) as exc:
                self._error(400, "bad_request", str(exc))
                return
            if len(batch) > config.batch_limit:
                self._error(413, "batch_limit", f"batch of {len(batch)} exceeds {config.batch_limit}")
                return
            try:
                with lock:
                    results = predict_fn(batch)
                outputs = encode_outputs(results, config.modality)
                if len(outputs) != len(batch):
                    raise ValueError(f"predict returned {len(outputs)} outputs for {len(batch)} inputs")
            except Exception as exc:  # keep serving
                self._error(500, "inference_failed", f"{type(exc).__name__}: {exc}")
                return
            self._reply(200, {"outputs": outputs})

    return Handler


class AdapterServer:
    def __init__(self, predict_fn: Callable, config: AdapterConfig):
        self.config = config
        self._httpd = ThreadingHTTPServer(
            (config.host, config.port), _handler_for(predict_fn, config, threading.Lock())
        )
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "AdapterServer":
        self._thread.start()
        return self

    def serve_forever(self):
        self._thread.start()
        self._thread.join()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "AdapterServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve(predict_fn: Callable, config: AdapterConfig) -> AdapterServer:
    """Start serving ``predict_fn``; returns the running server."""
    return AdapterServer(predict_fn, config).start()
