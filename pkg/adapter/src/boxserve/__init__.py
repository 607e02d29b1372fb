"""Serve a batch classifier over the line-delimited JSON wire protocol.

The parent process speaks one JSON document per UTF-8 line:

* on start this side emits ``{"protocol_version": 1, "n_classes": N,
  "input_kind": "image"}``
* each request is ``{"id": k, "inputs": [...]}`` where an image input is
  ``{"w": W, "h": H, "c": C, "data_b64": "<base64 little-endian float32,
  row-major, channel-interleaved>"}`` and a 2-d point is ``{"x": [f1, f2]}``
* each response is ``{"id": k, "probs": [[...], ...]}``; malformed requests
  get ``{"id": k, "error": "..."}`` and the loop continues.

Every line is flushed as soon as it is written. EOF on stdin ends the loop.
"""

from __future__ import annotations

import base64
import json
import sys

import numpy as np

PROTOCOL_VERSION = 1

__all__ = ["serve", "decode_input", "PROTOCOL_VERSION"]


def decode_input(doc: dict, input_kind: str) -> np.ndarray:
    """Decode one request input into a float64 array."""
    if input_kind == "point2d":
        vec = np.asarray(doc["x"], dtype=np.float64)
        if vec.shape != (2,):
            raise ValueError(f"point2d input must have 2 coordinates, got {vec.shape}")
        return vec
    w, h, c = int(doc["w"]), int(doc["h"]), int(doc["c"])
    raw = base64.b64decode(doc["data_b64"])
    flat = np.frombuffer(raw, dtype="<f4")
    if flat.size != w * h * c:
        raise ValueError(f"payload holds {flat.size} floats, expected {w * h * c}")
    return flat.reshape(h, w, c).astype(np.float64)


def _emit(stream, doc: dict) -> None:
    stream.write(json.dumps(doc) + "\n")
    stream.flush()


def _validated(rows, n_inputs: int, n_classes: int) -> list:
    probs = np.asarray(rows, dtype=np.float64)
    if probs.shape != (n_inputs, n_classes):
        raise ValueError(f"model returned shape {probs.shape}, "
                         f"expected ({n_inputs}, {n_classes})")
    if not np.isfinite(probs).all() or (probs < 0).any():
        raise ValueError("model returned invalid probabilities")
    if np.abs(probs.sum(axis=1) - 1.0).max() > 1e-6:
        raise ValueError("model probabilities do not sum to 1")
    return probs.tolist()


def serve(model, n_classes: int, input_kind: str = "image",
          stdin=None, stdout=None) -> None:
    """Answer requests until stdin closes.

    ``model`` maps a list of decoded inputs (H x W x C float64 arrays for
    images, 2-vectors for points) to an (n, n_classes) array of class
    probabilities. Blocks for the lifetime of the parent connection;
    returns only at EOF, after which the caller should exit 0.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    _emit(stdout, {"protocol_version": PROTOCOL_VERSION, "n_classes": int(n_classes),
                   "input_kind": input_kind})
    for line in stdin:
        if not line.strip():
            continue
        req_id = None
        try:
            req = json.loads(line)
            req_id = req.get("id") if isinstance(req, dict) else None
            inputs = [decode_input(item, input_kind) for item in req["inputs"]]
            rows = _validated(model(inputs), len(inputs), n_classes)
            _emit(stdout, {"id": req_id, "probs": rows})
        except Exception as exc:
            _emit(stdout, {"id": req_id, "error": str(exc)})
