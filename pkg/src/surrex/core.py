"""Shared domain types: images, segmentations, masks, neighbourhoods, explanations.

All types freeze their array payloads after construction, so instances are
safe to share between threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Image:
    """A dense H x W x C raster of float intensities in [0, 1].

    ``data`` is row-major and channel-interleaved; C is 1 (gray) or 3 (RGB).
    A 2-d array is accepted and treated as a single gray channel.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise DimensionError(f"image must be HxW or HxWxC, got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise DimensionError(f"channel count must be 1 or 3, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError("image must have at least one pixel")
        if not np.isfinite(arr).all():
            raise ParameterError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ParameterError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def luminance(self) -> np.ndarray:
        """H x W luminance plane (Rec. 601 weights for RGB)."""
        if self.channels == 1:
            return self.data[:, :, 0]
        r, g, b = self.data[:, :, 0], self.data[:, :, 1], self.data[:, :, 2]
        return 0.299 * r + 0.587 * g + 0.114 * b


@dataclass(frozen=True)
class SuperpixelSegmentation:
    """Integer label per pixel; labels cover exactly {0..n_segments-1}."""

    labels: np.ndarray
    n_segments: int = field(init=False)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise DimensionError(f"label map must be HxW, got shape {lab.shape}")
        if not np.issubdtype(lab.dtype, np.integer):
            raise ParameterError("labels must be integers")
        lab = lab.astype(np.int32, copy=True)
        if lab.min() < 0:
            raise ParameterError("labels must be non-negative")
        n = int(lab.max()) + 1
        counts = np.bincount(lab.ravel(), minlength=n)
        if (counts == 0).any():
            missing = np.flatnonzero(counts == 0)[:5].tolist()
            raise ParameterError(f"labels must cover 0..{n - 1}; missing {missing}")
        object.__setattr__(self, "labels", _frozen(lab))
        object.__setattr__(self, "n_segments", n)

    @property
    def shape(self) -> tuple:
        return self.labels.shape


@dataclass(frozen=True)
class InterpretableMask:
    """Binary vector over superpixels: 1 keeps a superpixel, 0 perturbs it."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 1 or b.size < 1:
            raise DimensionError("mask must be a non-empty 1-d vector")
        b = b.astype(np.uint8, copy=True)
        if not np.isin(b, (0, 1)).all():
            raise ParameterError("mask bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(b))

    def __len__(self) -> int:
        return self.bits.size

    @property
    def all_ones(self) -> bool:
        return bool((self.bits == 1).all())


def full_mask(n_segments: int) -> InterpretableMask:
    """The all-ones mask representing the unperturbed query."""
    if n_segments < 1:
        raise ParameterError("n_segments must be >= 1")
    return InterpretableMask(np.ones(n_segments, dtype=np.uint8))


@dataclass(frozen=True)
class Neighbourhood:
    """Sampled masks with black-box targets and kernel weights.

    Entry 0 is always the all-ones mask, i.e. the query itself.
    """

    masks: tuple
    targets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        masks = tuple(self.masks)
        t = np.asarray(self.targets, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        n = len(masks)
        if n < 1:
            raise ParameterError("neighbourhood must contain at least one sample")
        if t.shape != (n,) or w.shape != (n,):
            raise DimensionError("masks, targets and weights must have equal length")
        if (w < 0).any():
            raise ParameterError("kernel weights must be non-negative")
        if not masks[0].all_ones:
            raise ParameterError("first neighbourhood entry must be the all-ones mask")
        sizes = {len(m) for m in masks}
        if len(sizes) != 1:
            raise DimensionError("all masks must have equal length")
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "targets", _frozen(t))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self) -> int:
        return len(self.masks)

    def design_matrix(self) -> np.ndarray:
        """n x S matrix of raw mask bits, rows ordered as sampled."""
        return np.stack([m.bits for m in self.masks]).astype(np.float64)


@dataclass(frozen=True)
class Explanation:
    """Surrogate coefficients per superpixel for one explained class."""

    coefficients: np.ndarray
    intercept: float
    class_id: int
    config_digest: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.ndim != 1 or c.size < 1:
            raise DimensionError("coefficients must be a non-empty 1-d vector")
        object.__setattr__(self, "coefficients", _frozen(c))
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "class_id", int(self.class_id))

    def to_json(self) -> str:
        doc = {
            "class_id": self.class_id,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "config_digest": self.config_digest,
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "Explanation":
        doc = json.loads(text)
        return Explanation(
            coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
            intercept=doc["intercept"],
            class_id=doc["class_id"],
            config_digest=doc.get("config_digest", ""),
        )


@dataclass(frozen=True)
class RelevanceMap:
    """Pixel-space projection of an explanation: one float per pixel."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DimensionError(f"relevance map must be HxW, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def shape(self) -> tuple:
        return self.values.shape


def project_explanation(expl: Explanation, seg: SuperpixelSegmentation) -> RelevanceMap:
    """Project superpixel coefficients to a pixel relevance map.

    Each pixel receives the coefficient of the superpixel it belongs to;
    the intercept carries no spatial attribution and is dropped.
    """
    if expl.coefficients.size != seg.n_segments:
        raise DimensionError(
            f"{expl.coefficients.size} coefficients for {seg.n_segments} segments"
        )
    return RelevanceMap(expl.coefficients[seg.labels])


def derive_seed(*parts) -> int:
    """Deterministic sub-seed from integer parts.

    Work units (masks, trees, query/quantile cells, pairs) draw their own
    RNG streams from seeds derived this way, which keeps results independent
    of scheduling order.
    """
    seq = np.random.SeedSequence([int(p) % 2**63 for p in parts])
    return int(seq.generate_state(1, np.uint64)[0] >> 1)


def config_digest(sampler_kind: str, sampler_level: float, distance_kind: str,
                  seed: int, n_samples: int) -> str:
    """Short stable identifier of the (sampler, distance, seed, n_samples) tuple."""
    doc = json.dumps(
        {
            "sampler": [sampler_kind, float(sampler_level)],
            "distance": distance_kind,
            "seed": int(seed),
            "n_samples": int(n_samples),
        },
        sort_keys=True,
    )
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]
