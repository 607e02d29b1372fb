"""Black-box classifier interface, builtin analytic models, and the
subprocess adapter that attaches external models over a line protocol.

Wire protocol (one UTF-8 JSON document per line):

* child -> parent on start:  ``{"protocol_version": 1, "n_classes": N,
  "input_kind": "image"}``
* parent -> child:           ``{"id": k, "inputs": [...]}`` where an image
  input is ``{"w": W, "h": H, "c": C, "data_b64": "<base64 of little-endian
  float32, row-major, channel-interleaved>"}`` and a 2-d point input is
  ``{"x": [f1, f2]}``
* child -> parent:           ``{"id": k, "probs": [[...], ...]}``

Requests are serialized on one child; responses must preserve input order.
"""

from __future__ import annotations

import base64
import json
import queue
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .core import Image
from .errors import AdapterError, AdapterTimeoutError, DimensionError, ParameterError

PROTOCOL_VERSION = 1
INPUT_KINDS = ("image", "point2d")
DEFAULT_TIMEOUT = 120.0


@dataclass(frozen=True)
class AdapterHandshake:
    protocol_version: int
    n_classes: int
    input_kind: str

    def __post_init__(self):
        if self.protocol_version != PROTOCOL_VERSION:
            raise AdapterError(
                f"handshake: unsupported protocol version {self.protocol_version}"
            )
        if self.n_classes < 1:
            raise AdapterError("handshake: n_classes must be >= 1")
        if self.input_kind not in INPUT_KINDS:
            raise AdapterError(f"handshake: unknown input kind {self.input_kind!r}")


def validate_probabilities(rows, n_classes: int, n_inputs: int, where: str) -> np.ndarray:
    """Check shape, non-negativity and normalization of probability rows."""
    probs = np.asarray(rows, dtype=np.float64)
    if probs.ndim != 2 or probs.shape != (n_inputs, n_classes):
        raise AdapterError(
            f"{where}: expected {n_inputs} x {n_classes} probabilities, "
            f"got shape {probs.shape}"
        )
    if not np.isfinite(probs).all():
        raise AdapterError(f"{where}: non-finite probabilities")
    if (probs < 0).any():
        raise AdapterError(f"{where}: negative probabilities")
    sums = probs.sum(axis=1)
    bad = np.abs(sums - 1.0) > 1e-6
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise AdapterError(f"{where}: row {i} sums to {sums[i]!r}, expected 1")
    return probs


class QuadrantClassifier:
    """Deterministic 4-class image classifier over quadrant luminance.

    Logits are 4 times the mean luminance of the top-left, top-right,
    bottom-left and bottom-right quadrants, passed through a softmax.
    """

    n_classes = 4
    input_kind = "image"

    def predict_batch(self, inputs) -> np.ndarray:
        out = np.empty((len(inputs), 4))
        for i, img in enumerate(inputs):
            out[i] = self._predict_one(img)
        return out

    @staticmethod
    def _predict_one(img: Image) -> np.ndarray:
        lum = img.luminance()
        h2, w2 = img.height // 2, img.width // 2
        logits = 4.0 * np.array(
            [
                np.mean(lum[:h2, :w2]),
                np.mean(lum[:h2, w2:]),
                np.mean(lum[h2:, :w2]),
                np.mean(lum[h2:, w2:]),
            ]
        )
        z = np.exp(logits - logits.max())
        return z / z.sum()


def builtin_quadrant_classifier() -> QuadrantClassifier:
    return QuadrantClassifier()


class ConstantClassifier:
    """Returns the same probability vector for every input; test fixture."""

    input_kind = "image"

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
            raise ParameterError("probs must be a normalized non-negative vector")
        self.probs = p
        self.n_classes = p.size

    def predict_batch(self, inputs) -> np.ndarray:
        return np.tile(self.probs, (len(inputs), 1))


def encode_image_payload(img: Image) -> dict:
    data = np.ascontiguousarray(img.data, dtype="<f4")
    return {
        "w": img.width,
        "h": img.height,
        "c": img.channels,
        "data_b64": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def decode_image_payload(doc: dict) -> np.ndarray:
    w, h, c = int(doc["w"]), int(doc["h"]), int(doc["c"])
    raw = base64.b64decode(doc["data_b64"])
    arr = np.frombuffer(raw, dtype="<f4")
    if arr.size != w * h * c:
        raise AdapterError(f"payload holds {arr.size} floats, expected {w * h * c}")
    return arr.reshape(h, w, c).astype(np.float64)


class SubprocessBlackBox:
    """Black-box served by a child process speaking the line protocol."""

    def __init__(self, command, input_kind: str = "image",
                 timeout: float = DEFAULT_TIMEOUT):
        if input_kind not in INPUT_KINDS:
            raise ParameterError(f"unknown input kind {input_kind!r}")
        self._timeout = timeout
        self._next_id = 0
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"spawn: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

        hs = self._read_json("handshake")
        try:
            self.handshake = AdapterHandshake(
                protocol_version=int(hs["protocol_version"]),
                n_classes=int(hs["n_classes"]),
                input_kind=str(hs["input_kind"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            self.close()
            raise AdapterError(f"handshake: malformed document {hs!r}") from exc
        if self.handshake.input_kind != input_kind:
            self.close()
            raise AdapterError(
                f"handshake: child serves {self.handshake.input_kind!r}, "
                f"expected {input_kind!r}"
            )
        self.n_classes = self.handshake.n_classes
        self.input_kind = input_kind

    def _pump(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _read_json(self, phase: str) -> dict:
        try:
            line = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            raise AdapterTimeoutError(
                f"{phase}: no response within {self._timeout} s"
            ) from None
        if line is None:
            code = self._proc.poll()
            raise AdapterError(f"{phase}: child exited (code {code})")
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"{phase}: invalid JSON {line!r}") from exc
        if not isinstance(doc, dict):
            raise AdapterError(f"{phase}: expected a JSON object, got {doc!r}")
        return doc

    def _encode(self, item) -> dict:
        if self.input_kind == "image":
            if not isinstance(item, Image):
                raise ParameterError("image adapter expects Image inputs")
            return encode_image_payload(item)
        vec = np.asarray(item, dtype=np.float64).ravel()
        if vec.size != 2:
            raise DimensionError("point2d adapter expects 2-vectors")
        return {"x": [float(vec[0]), float(vec[1])]}

    def predict_batch(self, inputs) -> np.ndarray:
        if len(inputs) == 0:
            return np.zeros((0, self.n_classes))
        with self._lock:
            req_id = self._next_id
            self._next_id += 1
            request = {"id": req_id, "inputs": [self._encode(i) for i in inputs]}
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(json.dumps(request) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise AdapterError(f"request: child pipe closed ({exc})") from exc
            doc = self._read_json("response")
        if "error" in doc:
            raise AdapterError(f"response: child error: {doc['error']}")
        if doc.get("id") != req_id:
            raise AdapterError(f"response: id {doc.get('id')!r} != request id {req_id}")
        if "probs" not in doc:
            raise AdapterError(f"response: missing 'probs' in {doc!r}")
        return validate_probabilities(doc["probs"], self.n_classes, len(inputs),
                                      "response validation")

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            if proc.stdin is not None:
                proc.stdin.close()
            proc.wait(timeout=5)
        except Exception:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def subprocess_adapter(command, input_kind: str = "image",
                       timeout: float = DEFAULT_TIMEOUT) -> SubprocessBlackBox:
    """Spawn ``command`` and wrap it as a BlackBox over the wire protocol."""
    return SubprocessBlackBox(command, input_kind=input_kind, timeout=timeout)
