"""HTTP client for the inference protocol.

Requests are idempotent and carry an ``X-Request-Id`` header; responses
correlate by that id, never by arrival order. Transient failures (transport
errors and 5xx statuses) are retried with exponential backoff up to a bounded
number of attempts. A semaphore caps concurrent in-flight requests.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from typing import Optional, Sequence

import requests

from ..actions import InputSample, ModelOutput
from .encoding import PROTOCOL_VERSION, decode_output, encode_input
from .errors import (
    BatchLimitError,
    HandshakeError,
    MalformedResponseError,
    ModalityMismatchError,
    TransportError,
)
from .synthetic import ModelDescriptor

DEFAULT_IN_FLIGHT = 4


class HttpModel:
    """Protocol client bound to one endpoint; usable as an engine model."""

    def __init__(
        self,
        base_url: str,
        timeout_s: float = 10.0,
        retries: int = 2,
        backoff_s: float = 0.25,
        max_in_flight: int = DEFAULT_IN_FLIGHT,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._descriptor: Optional[ModelDescriptor] = None
        self._describe_lock = threading.Lock()

    def describe(self) -> ModelDescriptor:
        with self._describe_lock:
            if self._descriptor is None:
                payload = self._request("GET", "/v1/describe")
                try:
                    descriptor = ModelDescriptor.from_json(payload)
                except (KeyError, TypeError, ValueError) as exc:
                    raise MalformedResponseError(f"bad describe payload: {exc}") from exc
                if descriptor.protocol_version != PROTOCOL_VERSION:
                    raise HandshakeError(
                        f"server speaks protocol {descriptor.protocol_version!r}, "
                        f"client needs {PROTOCOL_VERSION!r}"
                    )
                self._descriptor = descriptor
        return self._descriptor

    def infer(self, batch: Sequence[InputSample]) -> list[ModelOutput]:
        if not batch:
            raise BatchLimitError("empty batch")
        body = {"inputs": [encode_input(x) for x in batch]}
        payload = self._request("POST", "/v1/infer", body)
        outputs = payload.get("outputs") if isinstance(payload, dict) else None
        if not isinstance(outputs, list) or len(outputs) != len(batch):
            got = len(outputs) if isinstance(outputs, list) else "none"
            raise MalformedResponseError(f"expected {len(batch)} outputs, got {got}")
        return [decode_output(o) for o in outputs]

    def _request(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        url = self.base_url + path
        headers = {"X-Request-Id": str(uuid.uuid4()), "Content-Type": "application/json"}
        data = None if body is None else json.dumps(body).encode("utf-8")
        last_exc: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = requests.request(
                        method, url, data=data, headers=headers, timeout=self.timeout_s
                    )
            except requests.RequestException as exc:
                last_exc = TransportError(f"{method} {url}: {exc}")
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"{method} {url}: server error {resp.status_code}")
                continue
            return self._parse(resp)
        raise last_exc  # type: ignore[misc]

    @staticmethod
    def _parse(resp: requests.Response) -> dict:
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponseError(f"non-JSON response ({resp.status_code})") from exc
        if resp.status_code >= 400:
            err = payload.get("error", {}) if isinstance(payload, dict) else {}
            code = err.get("code", str(resp.status_code))
            message = err.get("message", "")
            if code == "modality_mismatch":
                raise ModalityMismatchError(message)
            if code == "batch_limit":
                raise BatchLimitError(message)
            raise MalformedResponseError(f"{code}: {message}")
        if not isinstance(payload, dict):
            raise MalformedResponseError("response is not a JSON object")
        return payload
