"""Local surrogate explainers with distribution-aligned sampling and
perceptual distance weighting, plus the evaluation pipelines that measure
their effect on a 2D sampling study and on image explanation robustness.
"""

from .core import (Explanation, Image, InterpretableMask, Neighbourhood,
                   RelevanceMap, SuperpixelSegmentation, full_mask,
                   project_explanation)
from .errors import (AdapterError, AdapterTimeoutError, ConfigurationError,
                     DegenerateWeightsError, DimensionError, EmptyRegionError,
                     NumericError, ParameterError, SurrexError)
from .blackbox import (builtin_quadrant_classifier, subprocess_adapter)
from .forest import Forest, ForestConfig, predict_proba, train_forest
from .imgio import read_image, write_image
from .metrics import (KernelConfig, MsssimConfig, cosine_mask_distance,
                      exponential_kernel, explanation_distance,
                      marginal_wasserstein, msssim, perceptual_distance,
                      wasserstein_1d)
from .perturb import (DistortionSpec, SamplerSpec, distort, gaussian_blur,
                      realize, sample_masks)
from .segment import (SegmentConfig, boundary_overlay, segment_stats,
                      slic_segment)
from .surrogate import (ExplainConfig, Explanation2D, RidgeConfig,
                        explain_image, explain_point2d, fit_weighted_ridge,
                        surrogate_param_distance)
from .synth2d import (QuantileTransform, Synth2DConfig, fit_quantile_transform,
                      forward, inverse, run_synth_experiment,
                      sample_neighbourhood_2d, true_local_samples, two_moons)
from .imagexp import (PairRecord, RobustnessResult, bilinear_resize,
                      build_pairs, render_heatmap, run_robustness)

__version__ = "0.1.0"

__all__ = [
    "AdapterError", "AdapterTimeoutError", "ConfigurationError",
    "DegenerateWeightsError", "DimensionError", "EmptyRegionError",
    "Explanation", "Explanation2D", "ExplainConfig", "Forest", "ForestConfig",
    "Image", "InterpretableMask", "KernelConfig", "MsssimConfig",
    "Neighbourhood", "NumericError", "PairRecord", "ParameterError",
    "QuantileTransform", "RelevanceMap", "RidgeConfig", "RobustnessResult",
    "SamplerSpec", "DistortionSpec", "SegmentConfig", "SuperpixelSegmentation",
    "SurrexError", "Synth2DConfig", "bilinear_resize", "build_pairs",
    "builtin_quadrant_classifier", "cosine_mask_distance", "distort",
    "explain_image", "explain_point2d", "explanation_distance",
    "exponential_kernel", "fit_quantile_transform", "fit_weighted_ridge",
    "forward", "full_mask", "gaussian_blur", "inverse", "marginal_wasserstein",
    "msssim", "perceptual_distance", "predict_proba", "project_explanation",
    "read_image", "realize", "render_heatmap", "run_robustness",
    "run_synth_experiment", "sample_masks", "sample_neighbourhood_2d",
    "segment_stats", "slic_segment", "subprocess_adapter",
    "surrogate_param_distance", "train_forest", "true_local_samples",
    "two_moons", "wasserstein_1d", "write_image",
]
