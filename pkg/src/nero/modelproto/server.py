"""HTTP server exposing any in-process model over the inference protocol."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .encoding import WireError, decode_input, encode_output
from .errors import BatchLimitError, ModalityMismatchError


def _handler_for(model):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):  # quiet by default
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
                self._reply(200, model.describe().to_json())
            else:
                self._error(404, "not_found", f"no such endpoint {self.path}")

        def do_POST(self):
            if self.path != "/v1/infer":
                self._error(404, "not_found", f"no such endpoint {self.path}")
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length))
                inputs = payload.get("inputs")
                if not isinstance(inputs, list) or not inputs:
                    raise WireError("request needs a nonempty 'inputs' list")
                batch = [decode_input(p) for p in inputs]
            except (WireError, ValueError, json.JSONDecodeError) as exc:
                self._error(400, "bad_request", str(exc))
                return
            try:
                outputs = model.infer(batch)
            except ModalityMismatchError as exc:
                self._error(409, "modality_mismatch", str(exc))
                return
            except BatchLimitError as exc:
                self._error(413, "batch_limit", str(exc))
                return
            except Exception as exc:  # model bug: report, stay up
                self._error(500, "inference_failed", f"{type(exc).__name__}: {exc}")
                return
            self._reply(200, {"outputs": [encode_output(y) for y in outputs]})

    return Handler


class ModelServer:
    """Threaded protocol server; use as a context manager in tests and demos."""

    def __init__(self, model, host: str = "127.0.0.1", port: int = 0):
        self._httpd = ThreadingHTTPServer((host, port), _handler_for(model))
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ModelServer":
        self._thread.start()
        return self

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "ModelServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve_model(model, host: str = "127.0.0.1", port: int = 0) -> ModelServer:
    return ModelServer(model, host, port).start()
