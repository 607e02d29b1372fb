"""Weighted ridge surrogates and the explanation pipelines.

The local surrogate minimizes the kernel-weighted square loss between the
black-box class probability and a linear model over interpretable features,
plus an L2 penalty on the coefficients. The intercept is unpenalized: the
fit centers features and targets under the sample weights, solves the
regularized normal equations, and recovers the intercept from the weighted
means.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (Explanation, Image, Neighbourhood, config_digest)
from .errors import (DegenerateWeightsError, DimensionError, NumericError,
                     ParameterError)
from .metrics import (KernelConfig, MsssimConfig, cosine_mask_distance,
                      exponential_kernel, msssim, perceptual_distance)
from .perturb import SamplerSpec, realize, sample_masks
from .segment import SegmentConfig, slic_segment

DEFAULT_BATCH_SIZE = 32


@dataclass(frozen=True)
class RidgeConfig:
    """Penalty strength and intercept handling of the surrogate family."""

    alpha: float = 1.0
    fit_intercept: bool = True

    def __post_init__(self):
        if self.alpha < 0:
            raise ParameterError("alpha must be >= 0")


@dataclass(frozen=True)
class ExplainConfig:
    """Everything an image explanation needs besides the image and model."""

    n_samples: int = 1000
    sampler: SamplerSpec = SamplerSpec("mean")
    kernel: KernelConfig = KernelConfig()
    ridge: RidgeConfig = RidgeConfig()
    segments: SegmentConfig = SegmentConfig()
    msssim: MsssimConfig | None = None  # None: fit scales to the image
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ParameterError("n_samples must be >= 2")

    def digest(self) -> str:
        return config_digest(self.sampler.kind, self.sampler.level,
                             self.kernel.distance_kind, self.seed, self.n_samples)


def fit_weighted_ridge(X, y, w, cfg: RidgeConfig = RidgeConfig()):
    """Minimize sum_i w_i (y_i - beta.x_i - b)^2 + alpha ||beta||^2.

    Returns (coefficients, intercept); the intercept is not penalized.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise DimensionError("X must be a 2-d design matrix")
    n, d = X.shape
    if y.shape != (n,) or w.shape != (n,):
        raise DimensionError("X, y and w must agree on the sample count")
    if n < 1:
        raise ParameterError("need at least one sample")
    if not (np.isfinite(X).all() and np.isfinite(y).all() and np.isfinite(w).all()):
        raise NumericError("inputs must be finite")
    if (w < 0).any():
        raise ParameterError("weights must be non-negative")
    wsum = w.sum()
    if wsum <= 0.0:
        raise DegenerateWeightsError("all sample weights are zero")

    if cfg.fit_intercept:
        x_mean = (w @ X) / wsum
        y_mean = (w @ y) / wsum
        Xc = X - x_mean
        yc = y - y_mean
    else:
        x_mean = np.zeros(d)
        y_mean = 0.0
        Xc, yc = X, y

    wx = Xc * w[:, None]
    lhs = wx.T @ Xc + cfg.alpha * np.eye(d)
    rhs = wx.T @ yc
    try:
        beta = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        beta = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    intercept = float(y_mean - x_mean @ beta) if cfg.fit_intercept else 0.0
    return beta, intercept


def _sample_distances(masks, images, query: Image, kernel: KernelConfig,
                      ms_cfg: MsssimConfig) -> np.ndarray:
    if kernel.distance_kind == "cosine_mask":
        return np.array([cosine_mask_distance(m) for m in masks])
    if kernel.raw_similarity:
        return np.array([msssim(query, img, ms_cfg) for img in images])
    return np.array([perceptual_distance(query, img, ms_cfg) for img in images])


def explain_image(image: Image, blackbox, cfg: ExplainConfig = ExplainConfig(),
                  batch_size: int = DEFAULT_BATCH_SIZE):
    """Explain the black-box's most likely class for one image.

    Pipeline: segment, sample masks, realize each mask with the configured
    sampler, query the black-box in batches, weight samples by the
    exponential kernel over the configured distance, and fit the weighted
    ridge surrogate on the raw mask bits.

    Returns (Explanation, Neighbourhood, SuperpixelSegmentation).
    """
    seg = slic_segment(image, cfg.segments.n_segments, cfg.segments.compactness,
                       cfg.segments.max_iters, cfg.seed)
    if seg.n_segments == 1:
        warnings.warn("segmentation produced a single superpixel", stacklevel=2)
    masks = sample_masks(cfg.n_samples, seg.n_segments, cfg.seed)
    # per-mask seeds decouple realization order from the schedule
    images = [
        realize(image, seg, m, cfg.sampler, rng_seed=cfg.seed ^ i)
        for i, m in enumerate(masks)
    ]

    probs = np.empty((len(images), blackbox.n_classes))
    for start in range(0, len(images), batch_size):
        chunk = images[start:start + batch_size]
        try:
            probs[start:start + len(chunk)] = blackbox.predict_batch(chunk)
        except Exception as exc:
            exc.args = (
                f"black-box failed on samples {start}..{start + len(chunk) - 1}: {exc}",
            )
            raise

    class_id = int(np.argmax(probs[0]))
    targets = probs[:, class_id]

    ms_cfg = cfg.msssim
    if ms_cfg is None and cfg.kernel.distance_kind == "msssim":
        ms_cfg = MsssimConfig.for_min_side(min(image.height, image.width))
    dists = _sample_distances(masks, images, image, cfg.kernel, ms_cfg)
    weights = exponential_kernel(dists, cfg.kernel.sigma)

    neigh = Neighbourhood(masks=tuple(masks), targets=targets, weights=weights)
    beta, intercept = fit_weighted_ridge(neigh.design_matrix(), targets, weights,
                                         cfg.ridge)
    expl = Explanation(coefficients=beta, intercept=intercept, class_id=class_id,
                       config_digest=cfg.digest())
    return expl, neigh, seg


@dataclass(frozen=True)
class Explanation2D:
    """Planar surrogate: two coefficients plus intercept for one class."""

    coefficients: np.ndarray
    intercept: float
    class_id: int

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.shape != (2,):
            raise DimensionError("2-d explanation needs exactly 2 coefficients")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "intercept", float(self.intercept))


def explain_point2d(query, samples, blackbox,
                    cfg: RidgeConfig = RidgeConfig()) -> Explanation2D:
    """Ridge surrogate of the query's predicted class over raw coordinates.

    Weights are uniform: locality comes from the bounded sampling that
    produced ``samples``, not from a kernel.
    """
    query = np.asarray(query, dtype=np.float64).ravel()
    samples = np.asarray(samples, dtype=np.float64)
    if query.shape != (2,) or samples.ndim != 2 or samples.shape[1] != 2:
        raise DimensionError("query must be a 2-vector and samples n x 2")
    if samples.shape[0] < 3:
        raise ParameterError("need at least 3 samples for a planar fit")
    class_id = int(np.argmax(blackbox.predict_batch(query[None, :])[0]))
    targets = np.asarray(blackbox.predict_batch(samples))[:, class_id]
    beta, intercept = fit_weighted_ridge(samples, targets,
                                         np.ones(samples.shape[0]), cfg)
    return Explanation2D(coefficients=beta, intercept=intercept, class_id=class_id)


def surrogate_param_distance(a, b) -> float:
    """Euclidean distance between two surrogates' coefficient vectors."""
    ca = np.asarray(a.coefficients, dtype=np.float64)
    cb = np.asarray(b.coefficients, dtype=np.float64)
    if ca.shape != cb.shape:
        raise DimensionError(f"coefficient shapes differ: {ca.shape} vs {cb.shape}")
    return float(np.linalg.norm(ca - cb))
