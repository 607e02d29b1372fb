"""Deterministic stub models for protocol tests and verification.

``quadrant_model`` mirrors the explainer toolkit's builtin quadrant
classifier operation for operation, so a round trip through the wire
protocol must reproduce its probabilities bit for bit on float32 payloads.
A hook for wrapping a real pretrained classifier is sketched in the README;
no model weights ship with this package.
"""

from __future__ import annotations

import numpy as np


def fixed_model(probs):
    """Model that answers the same probability row for every input."""
    row = [float(p) for p in probs]
    if abs(sum(row) - 1.0) > 1e-9 or any(p < 0 for p in row):
        raise ValueError("fixed probabilities must be non-negative and sum to 1")

    def model(inputs):
        return [row for _ in inputs]

    return model, len(row)


def _luminance(arr: np.ndarray) -> np.ndarray:
    if arr.shape[2] == 1:
        return arr[:, :, 0]
    r, g, b = arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]
    return 0.299 * r + 0.587 * g + 0.114 * b


def quadrant_model():
    """4-class softmax over 4x the mean luminance of each image quadrant."""

    def model(inputs):
        out = np.empty((len(inputs), 4))
        for i, arr in enumerate(inputs):
            lum = _luminance(arr)
            h2, w2 = arr.shape[0] // 2, arr.shape[1] // 2
            logits = 4.0 * np.array(
                [
                    np.mean(lum[:h2, :w2]),
                    np.mean(lum[:h2, w2:]),
                    np.mean(lum[h2:, :w2]),
                    np.mean(lum[h2:, w2:]),
                ]
            )
            z = np.exp(logits - logits.max())
            out[i] = z / z.sum()
        return out

    return model, 4


def mean_logit_model():
    """2-class model whose class-1 logit is the mean pixel value."""

    def model(inputs):
        out = np.empty((len(inputs), 2))
        for i, arr in enumerate(inputs):
            p1 = 1.0 / (1.0 + np.exp(-float(arr.mean())))
            out[i] = (1.0 - p1, p1)
        return out

    return model, 2


def resolve(spec: str):
    """Map a --model spec to (model, n_classes)."""
    if spec == "quadrant":
        return quadrant_model()
    if spec == "meanlogit":
        return mean_logit_model()
    if spec.startswith("fixed:"):
        return fixed_model([float(p) for p in spec[6:].split(",")])
    raise ValueError(f"unknown model spec {spec!r}; "
                     "use quadrant, meanlogit, or fixed:p1,p2,...")
