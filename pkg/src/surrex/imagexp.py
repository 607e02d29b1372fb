"""Explanation robustness over reference/distorted image pairs.

Each pair is explained twice under the same (sampler, distance) combination,
the two surrogates are projected to pixel relevance maps, and their mean
squared Frobenius distance is aggregated per distortion and normalized
against the mean-occlusion + cosine baseline.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import Image, RelevanceMap, derive_seed, project_explanation
from .errors import ConfigurationError, ParameterError
from .imgio import read_image, to_uint8, write_image
from .metrics import explanation_distance
from .perturb import DistortionSpec, distort
from .surrogate import ExplainConfig, explain_image

_IMAGE_EXTS = (".png", ".ppm", ".pgm")


@dataclass(frozen=True)
class PairRecord:
    """One reference image together with a distorted counterpart."""

    reference: Image
    distorted: Image
    distortion: DistortionSpec
    source_id: str

    def __post_init__(self):
        ref, dst = self.reference, self.distorted
        if (ref.height, ref.width, ref.channels) != (dst.height, dst.width, dst.channels):
            raise ParameterError("pair images must have equal dimensions")


def bilinear_resize(image: Image, size: int) -> Image:
    """Resize to a size x size square with bilinear interpolation.

    Pixel centers align at the corners, so resizing to the native size is
    the identity.
    """
    if size < 1:
        raise ParameterError("size must be >= 1")
    h, w = image.height, image.width
    if (h, w) == (size, size):
        return image

    def axis_coords(n_in, n_out):
        if n_out == 1:
            return np.zeros(1), np.zeros(1, dtype=np.int64)
        pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
        i0 = np.clip(np.floor(pos).astype(np.int64), 0, n_in - 2)
        return pos - i0, i0

    fy, y0 = axis_coords(h, size)
    fx, x0 = axis_coords(w, size)
    d = image.data
    top = d[y0][:, x0] * (1 - fx)[None, :, None] + d[y0][:, x0 + 1] * fx[None, :, None]
    bot = d[y0 + 1][:, x0] * (1 - fx)[None, :, None] + d[y0 + 1][:, x0 + 1] * fx[None, :, None]
    out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
    return Image(np.clip(out, 0.0, 1.0))


def build_pairs(image_dir: str, distortions, resize_to: int = 224,
                seed: int = 0) -> list:
    """Load every readable image, resize it, and pair it with each distortion."""
    names = sorted(
        f for f in os.listdir(image_dir)
        if os.path.splitext(f)[1].lower() in _IMAGE_EXTS
    )
    pairs = []
    n_read = 0
    for name in names:
        path = os.path.join(image_dir, name)
        try:
            ref = bilinear_resize(read_image(path), resize_to)
        except Exception as exc:
            warnings.warn(f"skipping unreadable image {path!r}: {exc}", stacklevel=2)
            continue
        for d_idx, spec in enumerate(distortions):
            dst = distort(ref, spec, rng_seed=derive_seed(seed, n_read, d_idx))
            pairs.append(PairRecord(ref, dst, spec, source_id=name))
        n_read += 1
    if n_read == 0:
        raise ParameterError(f"no usable images found in {image_dir!r}")
    return pairs


@dataclass
class RobustnessResult:
    """Aggregate rows plus per-run diagnostics.

    Rows are keyed by (sampler label, distance kind, distortion label) and
    carry the mean explanation distance, the pair count, and the ratio to
    the default-LIME baseline for the same distortion.
    """

    rows: list
    diagnostics: dict


def _is_baseline(cfg: ExplainConfig) -> bool:
    return cfg.sampler.kind == "mean" and cfg.kernel.distance_kind == "cosine_mask"


def _explain_pair(pair: PairRecord, cfg: ExplainConfig, blackbox):
    expl_r, _, seg_r = explain_image(pair.reference, blackbox, cfg)
    expl_d, _, seg_d = explain_image(pair.distorted, blackbox, cfg)
    map_r = project_explanation(expl_r, seg_r)
    map_d = project_explanation(expl_d, seg_d)
    dexp = explanation_distance([map_r], [map_d])
    return dexp, expl_r.class_id, expl_d.class_id


def run_robustness(pairs, configs, blackbox, seed: int = 0,
                   threads: int = 1) -> RobustnessResult:
    """Explain all pairs under all configs and aggregate distances.

    Reference and distorted images are segmented and explained
    independently but share the per-unit seed, so an identical pair yields
    an explanation distance of exactly zero.
    """
    configs = list(configs)
    if not any(_is_baseline(c) for c in configs):
        raise ConfigurationError(
            "configs must include the mean-occlusion + cosine baseline"
        )
    if not pairs:
        raise ParameterError("need at least one pair")

    dist_labels = []
    for p in pairs:
        lbl = p.distortion.label()
        if lbl not in dist_labels:
            dist_labels.append(lbl)

    dexp = np.full((len(configs), len(pairs)), np.nan)
    class_split = np.zeros((len(configs), len(pairs)), dtype=bool)
    failures = []

    def work(unit):
        c_idx, p_idx = unit
        run_cfg = replace(configs[c_idx], seed=derive_seed(seed, p_idx, c_idx))
        try:
            d, cls_r, cls_d = _explain_pair(pairs[p_idx], run_cfg, blackbox)
            dexp[c_idx, p_idx] = d
            class_split[c_idx, p_idx] = cls_r != cls_d
        except Exception as exc:  # recorded and excluded from the means
            failures.append({"config": c_idx, "pair": p_idx, "error": str(exc)})

    units = [(ci, pi) for ci in range(len(configs)) for pi in range(len(pairs))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, units))
    else:
        for u in units:
            work(u)

    pair_lbl = np.array([p.distortion.label() for p in pairs])
    base_idx = next(i for i, c in enumerate(configs) if _is_baseline(c))
    baseline_mean = {}
    for lbl in dist_labels:
        sel = (pair_lbl == lbl) & ~np.isnan(dexp[base_idx])
        baseline_mean[lbl] = float(np.mean(dexp[base_idx, sel])) if sel.any() else float("nan")

    rows = []
    for c_idx, cfg in enumerate(configs):
        for lbl in dist_labels:
            sel = (pair_lbl == lbl) & ~np.isnan(dexp[c_idx])
            if not sel.any():
                continue
            mean_d = float(np.mean(dexp[c_idx, sel]))
            base = baseline_mean[lbl]
            rows.append(
                {
                    "sampler": cfg.sampler.label(),
                    "distance": cfg.kernel.distance_kind,
                    "distortion": lbl,
                    "mean_dexp": mean_d,
                    "count": int(sel.sum()),
                    "normalized": mean_d / base if base > 0 else float("nan"),
                }
            )
    failures.sort(key=lambda r: (r["config"], r["pair"]))
    diagnostics = {
        "failures": failures,
        "divergent_class_pairs": int(class_split.sum()),
    }
    return RobustnessResult(rows=rows, diagnostics=diagnostics)


def render_heatmap(image: Image, rmap: RelevanceMap, out_path: str) -> None:
    """Write a diverging relevance overlay as a PNG.

    Positive relevance tints green and negative red; the tint strength is
    |value| / max|value| blended at alpha 0.5, so zero relevance leaves the
    source pixel untouched.
    """
    if rmap.shape != (image.height, image.width):
        raise ParameterError("relevance map does not match image size")
    rgb = image.data if image.channels == 3 else np.repeat(image.data, 3, axis=2)
    v = rmap.values
    peak = float(np.abs(v).max())
    if peak == 0.0:
        blended = rgb
    else:
        t = np.abs(v) / peak
        color = np.zeros_like(rgb)
        color[:, :, 0] = np.where(v < 0, 1.0, 0.0)
        color[:, :, 1] = np.where(v > 0, 1.0, 0.0)
        a = (0.5 * t)[:, :, None]
        blended = (1.0 - a) * rgb + a * color
    write_image(Image(np.clip(blended, 0.0, 1.0)), out_path)
