"""Distances: cosine mask distance, MS-SSIM, the exponential kernel,
explanation distance, and one-dimensional Wasserstein distances.

MS-SSIM follows the standard multi-scale construction: the contrast and
structure terms are evaluated at every scale, the luminance term only at the
coarsest, and the per-scale means are combined by a weighted geometric
product. Scores are computed on the luminance plane with a Gaussian window
and valid-region cropping; scales are linked by 2x2 block averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import Image, InterpretableMask, RelevanceMap
from .errors import DimensionError, ParameterError

# Canonical five-scale exponents, normalized so they sum to exactly 1
# (the published constants 0.0448/0.2856/0.3001/0.2363/0.1333 sum to 1.0001).
_RAW_SCALE_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MSSSIM_WEIGHTS = tuple(w / sum(_RAW_SCALE_WEIGHTS) for w in _RAW_SCALE_WEIGHTS)

DISTANCE_KINDS = ("cosine_mask", "msssim")


DEFAULT_SIGMA = {"cosine_mask": 0.25, "msssim": 0.15}


@dataclass(frozen=True)
class KernelConfig:
    """Width and distance choice of the exponential neighbourhood kernel.

    When ``sigma`` is omitted it defaults per distance: 0.25 for the cosine
    mask distance and 0.15 for the perceptual distance, whose informative
    range (realistic distortions sit below ~0.3, occlusions far above) is
    narrower.

    ``raw_similarity`` feeds the MS-SSIM score itself into the kernel in
    place of 1 - MS-SSIM; with it the kernel favors dissimilar samples, so
    it exists only to probe that alternative reading.
    """

    sigma: float | None = None
    distance_kind: str = "cosine_mask"
    raw_similarity: bool = False

    def __post_init__(self):
        if self.distance_kind not in DISTANCE_KINDS:
            raise ParameterError(f"unknown distance kind {self.distance_kind!r}")
        if self.raw_similarity and self.distance_kind != "msssim":
            raise ParameterError("raw_similarity applies to the msssim distance only")
        if self.sigma is None:
            object.__setattr__(self, "sigma", DEFAULT_SIGMA[self.distance_kind])
        if not self.sigma > 0:
            raise ParameterError("kernel sigma must be > 0")


@dataclass(frozen=True)
class MsssimConfig:
    n_scales: int = 5
    scale_weights: tuple = MSSSIM_WEIGHTS
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.scale_weights)
        object.__setattr__(self, "scale_weights", w)
        if self.n_scales < 1:
            raise ParameterError("n_scales must be >= 1")
        if len(w) != self.n_scales:
            raise ParameterError("scale_weights length must equal n_scales")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ParameterError("scale_weights must sum to 1")
        if self.window_size % 2 == 0 or self.window_size < 3:
            raise ParameterError("window_size must be odd and >= 3")
        if not self.window_sigma > 0:
            raise ParameterError("window_sigma must be > 0")
        if not self.dynamic_range > 0:
            raise ParameterError("dynamic_range must be > 0")

    @property
    def min_side(self) -> int:
        """Smallest image side the scale pyramid can accommodate."""
        return self.window_size * 2 ** (self.n_scales - 1)

    @staticmethod
    def for_min_side(side: int, window_size: int = 11) -> "MsssimConfig":
        """Config with as many canonical scales as fit images of this size."""
        n = 1
        while n < 5 and window_size * 2**n <= side:
            n += 1
        w = np.asarray(_RAW_SCALE_WEIGHTS[:n])
        return MsssimConfig(n_scales=n, scale_weights=tuple(w / w.sum()),
                            window_size=window_size)


def cosine_mask_distance(mask: InterpretableMask) -> float:
    """Cosine distance between a mask and the all-ones query vector.

    With k ones out of S bits this is 1 - sqrt(k / S); the zero mask has no
    direction and is assigned the maximal distance 1.
    """
    s = len(mask)
    k = int(mask.bits.sum())
    if k == 0:
        return 1.0
    return 1.0 - np.sqrt(k / s)


def exponential_kernel(d, sigma: float):
    """Proximity weight exp(-(d / sigma)^2); 1 at d = 0."""
    if not sigma > 0:
        raise ParameterError("sigma must be > 0")
    d = np.asarray(d, dtype=np.float64)
    out = np.exp(-((d / sigma) ** 2))
    return float(out) if out.ndim == 0 else out


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _filter_valid(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    r = window.size // 2
    tmp = ndimage.correlate1d(plane, window, axis=0, mode="nearest")
    tmp = ndimage.correlate1d(tmp, window, axis=1, mode="nearest")
    return tmp[r:-r, r:-r]


def _ssim_terms(x: np.ndarray, y: np.ndarray, cfg: MsssimConfig) -> tuple:
    """Mean full SSIM and mean contrast-structure term at one scale."""
    window = _gaussian_window(cfg.window_size, cfg.window_sigma)
    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    mu_x = _filter_valid(x, window)
    mu_y = _filter_valid(y, window)
    var_x = _filter_valid(x * x, window) - mu_x * mu_x
    var_y = _filter_valid(y * y, window) - mu_y * mu_y
    cov = _filter_valid(x * y, window) - mu_x * mu_y
    lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    cs = (2.0 * cov + c2) / (var_x + var_y + c2)
    return float((lum * cs).mean()), float(cs.mean())


def _downsample2(plane: np.ndarray) -> np.ndarray:
    h2, w2 = plane.shape[0] // 2, plane.shape[1] // 2
    return plane[: h2 * 2, : w2 * 2].reshape(h2, 2, w2, 2).mean(axis=(1, 3))


def msssim(x: Image, y: Image, cfg: MsssimConfig = MsssimConfig()) -> float:
    """Multi-scale structural similarity between two images."""
    if (x.height, x.width, x.channels) != (y.height, y.width, y.channels):
        raise DimensionError("images must have identical dimensions")
    if min(x.height, x.width) < cfg.min_side:
        raise ParameterError(
            f"image min side {min(x.height, x.width)} cannot hold "
            f"{cfg.n_scales} scales with window {cfg.window_size}"
        )
    px, py = x.luminance(), y.luminance()
    score = 1.0
    for scale in range(cfg.n_scales):
        full, cs = _ssim_terms(px, py, cfg)
        if scale + 1 < cfg.n_scales:
            # contrast-structure only at the finer scales
            score *= max(cs, 0.0) ** cfg.scale_weights[scale]
            px, py = _downsample2(px), _downsample2(py)
        else:
            # the coarsest scale carries the luminance comparison
            score *= max(full, 0.0) ** cfg.scale_weights[scale]
    return float(score)


def perceptual_distance(x: Image, y: Image, cfg: MsssimConfig = MsssimConfig()) -> float:
    """1 - MS-SSIM, clamped so identical images sit at exactly 0."""
    d = 1.0 - msssim(x, y, cfg)
    return max(d, 0.0)


def explanation_distance(maps_a, maps_b) -> float:
    """Mean squared Frobenius distance over K paired relevance maps."""
    if len(maps_a) != len(maps_b) or len(maps_a) < 1:
        raise DimensionError("need equal, non-empty lists of relevance maps")
    total = 0.0
    for ma, mb in zip(maps_a, maps_b):
        va = ma.values if isinstance(ma, RelevanceMap) else np.asarray(ma, dtype=np.float64)
        vb = mb.values if isinstance(mb, RelevanceMap) else np.asarray(mb, dtype=np.float64)
        if va.shape != vb.shape:
            raise DimensionError(f"map shapes differ: {va.shape} vs {vb.shape}")
        diff = va - vb
        total += float((diff * diff).sum())
    return total / len(maps_a)


def wasserstein_1d(a, b) -> float:
    """Exact W1 between two empirical distributions on the line.

    Integrates |CDF_a - CDF_b|; for equal sample counts this reduces to the
    mean absolute difference of the sorted samples.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ParameterError("samples must be non-empty")
    support = np.sort(np.concatenate([a, b]))
    deltas = np.diff(support)
    cdf_a = np.searchsorted(a, support[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, support[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * deltas))


def marginal_wasserstein(points_a, points_b) -> float:
    """Mean of per-coordinate W1 distances between two d-dimensional samples."""
    pa = np.atleast_2d(np.asarray(points_a, dtype=np.float64))
    pb = np.atleast_2d(np.asarray(points_b, dtype=np.float64))
    if pa.shape[1] != pb.shape[1]:
        raise DimensionError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise ParameterError("point sets must be non-empty")
    dists = [wasserstein_1d(pa[:, j], pb[:, j]) for j in range(pa.shape[1])]
    return float(np.mean(dists))
