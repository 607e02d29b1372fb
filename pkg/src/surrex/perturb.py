"""Neighbourhood generation: mask sampling and image realization.

A realized sample keeps pixels of superpixels whose mask bit is 1 untouched
and replaces the rest according to the sampler kind:

* ``zero``      black patches
* ``mean``      per-segment mean color (the default LIME occlusion)
* ``noise``     additive zero-mean Gaussian noise, clipped to [0, 1]
* ``blur``      values from a Gaussian blur of the whole image
* ``contrast``  pixels pulled toward the per-channel whole-image mean

``distort`` applies the same transforms to the whole image (no mask) and is
used to build reference/distorted evaluation pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import Image, InterpretableMask, SuperpixelSegmentation, full_mask
from .errors import DimensionError, ParameterError
from .segment import segment_stats

SAMPLER_KINDS = ("zero", "mean", "noise", "blur", "contrast")


@dataclass(frozen=True)
class SamplerSpec:
    """Sampler kind plus its single level parameter.

    ``level`` is the noise standard deviation, the blur kernel size, or the
    contrast factor; it is ignored for ``zero`` and ``mean``.
    """

    kind: str
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ParameterError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "noise" and not self.level > 0:
            raise ParameterError("noise std must be > 0")
        if self.kind == "blur":
            k = self.level
            if k != int(k) or int(k) % 2 == 0 or int(k) < 3:
                raise ParameterError("blur kernel size must be an odd integer >= 3")
        if self.kind == "contrast" and not 0.0 <= self.level <= 1.0:
            raise ParameterError("contrast factor must lie in [0, 1]")

    def label(self) -> str:
        if self.kind in ("zero", "mean"):
            return self.kind
        if self.kind == "blur":
            return f"blur@{int(self.level)}"
        return f"{self.kind}@{self.level:g}"


class DistortionSpec(SamplerSpec):
    """A sampler spec applied to the whole image instead of masked segments."""


def sample_masks(n_samples: int, n_segments: int, rng_seed: int) -> list:
    """Draw the interpretable-domain neighbourhood masks.

    The first mask is all ones (the query); the remaining ``n_samples - 1``
    masks have i.i.d. Bernoulli(0.5) bits. Deterministic given the seed.
    """
    if n_samples < 1:
        raise ParameterError("n_samples must be >= 1")
    if n_segments < 1:
        raise ParameterError("n_segments must be >= 1")
    masks = [full_mask(n_segments)]
    if n_samples > 1:
        rng = np.random.default_rng(rng_seed)
        bits = rng.integers(0, 2, size=(n_samples - 1, n_segments), dtype=np.uint8)
        masks.extend(InterpretableMask(row) for row in bits)
    return masks


def _gaussian_kernel(ksize: int) -> np.ndarray:
    # size-to-sigma convention: sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8
    sigma = 0.3 * ((ksize - 1) / 2.0 - 1.0) + 0.8
    x = np.arange(ksize, dtype=np.float64) - (ksize - 1) / 2.0
    kern = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kern / kern.sum()


def gaussian_blur(image: Image, ksize: int) -> Image:
    """Separable Gaussian blur with clamp-to-edge padding."""
    if ksize != int(ksize) or int(ksize) % 2 == 0 or int(ksize) < 3:
        raise ParameterError("blur kernel size must be an odd integer >= 3")
    kern = _gaussian_kernel(int(ksize))
    out = np.empty_like(image.data)
    for c in range(image.channels):
        tmp = ndimage.correlate1d(image.data[:, :, c], kern, axis=0, mode="nearest")
        out[:, :, c] = ndimage.correlate1d(tmp, kern, axis=1, mode="nearest")
    return Image(np.clip(out, 0.0, 1.0))


def _transformed(image: Image, seg, spec: SamplerSpec, rng_seed: int) -> np.ndarray:
    """Whole-image replacement raster for the given sampler kind."""
    data = image.data
    if spec.kind == "zero":
        return np.zeros_like(data)
    if spec.kind == "mean":
        means = segment_stats(seg, image)
        return means[seg.labels]
    if spec.kind == "noise":
        rng = np.random.default_rng(rng_seed)
        noisy = data + rng.normal(0.0, spec.level, size=data.shape)
        return np.clip(noisy, 0.0, 1.0)
    if spec.kind == "blur":
        return gaussian_blur(image, int(spec.level)).data
    # contrast: anchor at the per-channel whole-image mean; level 1 must be
    # a strict identity, which float re-association would break
    if spec.level == 1.0:
        return data.copy()
    mean_c = data.mean(axis=(0, 1))
    return np.clip(mean_c + spec.level * (data - mean_c), 0.0, 1.0)


def realize(image: Image, seg: SuperpixelSegmentation, mask: InterpretableMask,
            spec: SamplerSpec, rng_seed: int = 0) -> Image:
    """Materialize one neighbourhood sample from its interpretable mask."""
    if seg.shape != (image.height, image.width):
        raise DimensionError("segmentation does not match image")
    if len(mask) != seg.n_segments:
        raise DimensionError(
            f"mask length {len(mask)} does not match {seg.n_segments} segments"
        )
    if mask.all_ones:
        return image
    ablated = mask.bits[seg.labels] == 0
    replacement = _transformed(image, seg, spec, rng_seed)
    out = image.data.copy()
    out[ablated] = replacement[ablated]
    return Image(out)


def distort(image: Image, spec: SamplerSpec, rng_seed: int = 0) -> Image:
    """Apply a distortion to the whole image.

    Equivalent to ``realize`` with an all-zeros mask over a single segment
    spanning the image, so ``mean`` degenerates to a flat mean-color image.
    """
    whole = SuperpixelSegmentation(np.zeros((image.height, image.width), dtype=np.int32))
    replacement = _transformed(image, whole, spec, rng_seed)
    return Image(replacement)
