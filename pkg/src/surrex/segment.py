"""Deterministic SLIC superpixel segmentation.

Clusters pixels in CIELAB (L only for gray images) with grid-seeded centers
and the additive distance d = d_lab + (compactness / grid_step) * d_xy.
After at most ``max_iters`` Lloyd iterations, disconnected fragments are
absorbed into the largest adjacent label so every final label is one
4-connected region. The whole procedure is free of randomness: identical
inputs give bit-identical label maps regardless of the seed argument, which
is accepted for interface stability and recorded nowhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import Image, SuperpixelSegmentation
from .errors import DimensionError, ParameterError

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# sRGB (D65) to XYZ, IEC 61966-2-1
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


@dataclass(frozen=True)
class SegmentConfig:
    """Granularity parameters used by the explanation pipelines."""

    n_segments: int = 50
    compactness: float = 10.0
    max_iters: int = 10

    def __post_init__(self):
        if self.n_segments < 1:
            raise ParameterError("n_segments must be >= 1")
        if self.compactness <= 0:
            raise ParameterError("compactness must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")


def _srgb_to_linear(v: np.ndarray) -> np.ndarray:
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def _lab_features(image: Image) -> np.ndarray:
    """H x W x F CIELAB feature planes: (L, a, b) for RGB, (L,) for gray."""
    delta = 6.0 / 29.0

    def f(t):
        return np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)

    if image.channels == 1:
        y = _srgb_to_linear(image.data[:, :, 0])
        lum = 116.0 * f(y) - 16.0
        return lum[:, :, None]
    lin = _srgb_to_linear(image.data)
    xyz = lin @ _SRGB_TO_XYZ.T
    t = f(xyz / _D65_WHITE)
    lum = 116.0 * t[:, :, 1] - 16.0
    a = 500.0 * (t[:, :, 0] - t[:, :, 1])
    b = 200.0 * (t[:, :, 1] - t[:, :, 2])
    return np.stack([lum, a, b], axis=2)


def _seed_grid(height: int, width: int, n_segments: int) -> tuple:
    """Rows/cols of the initial center grid, never exceeding n_segments cells."""
    step = math.sqrt(height * width / n_segments)
    ny = min(height, max(1, round(height / step)))
    nx = min(width, max(1, round(width / step)))
    while ny * nx > n_segments:
        if ny >= nx and ny > 1:
            ny -= 1
        elif nx > 1:
            nx -= 1
        else:
            break
    return ny, nx


def slic_segment(image: Image, n_segments: int = 50, compactness: float = 10.0,
                 max_iters: int = 10, seed: int = 0) -> SuperpixelSegmentation:
    """Segment an image into at most ``n_segments`` connected superpixels."""
    del seed  # the algorithm is deterministic; kept for interface stability
    h, w = image.height, image.width
    if n_segments < 1:
        raise ParameterError("n_segments must be >= 1")
    if n_segments > h * w:
        raise ParameterError(f"n_segments={n_segments} exceeds pixel count {h * w}")
    if compactness <= 0:
        raise ParameterError("compactness must be positive")

    feats = _lab_features(image)
    ny, nx = _seed_grid(h, w, n_segments)
    k = ny * nx
    step = math.sqrt((h / ny) * (w / nx))
    ratio = compactness / step

    # grid-seeded centers in pixel coordinates; row-major center ordering
    cy = (np.arange(ny) + 0.5) * (h / ny) - 0.5
    cx = (np.arange(nx) + 0.5) * (w / nx) - 0.5
    centers_y = np.repeat(cy, nx)
    centers_x = np.tile(cx, ny)
    iy = np.clip(np.round(centers_y).astype(int), 0, h - 1)
    ix = np.clip(np.round(centers_x).astype(int), 0, w - 1)
    centers_f = feats[iy, ix, :].astype(np.float64)

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    labels = np.zeros((h, w), dtype=np.int32)
    reach = 2.0 * step

    for _ in range(max_iters):
        best = np.full((h, w), np.inf)
        for c in range(k):
            y0 = max(0, int(math.floor(centers_y[c] - reach)))
            y1 = min(h, int(math.ceil(centers_y[c] + reach)) + 1)
            x0 = max(0, int(math.floor(centers_x[c] - reach)))
            x1 = min(w, int(math.ceil(centers_x[c] + reach)) + 1)
            d_xy = np.hypot(yy[y0:y1, x0:x1] - centers_y[c], xx[y0:y1, x0:x1] - centers_x[c])
            diff = feats[y0:y1, x0:x1, :] - centers_f[c]
            d_lab = np.sqrt((diff * diff).sum(axis=2))
            d = d_lab + ratio * d_xy
            win = d < best[y0:y1, x0:x1]
            best[y0:y1, x0:x1][win] = d[win]
            labels[y0:y1, x0:x1][win] = c

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k).astype(np.float64)
        nonzero = counts > 0
        sums_y = np.bincount(flat, weights=yy.ravel(), minlength=k)
        sums_x = np.bincount(flat, weights=xx.ravel(), minlength=k)
        new_y = np.where(nonzero, sums_y / np.maximum(counts, 1.0), centers_y)
        new_x = np.where(nonzero, sums_x / np.maximum(counts, 1.0), centers_x)
        new_f = centers_f.copy()
        for f_idx in range(feats.shape[2]):
            s = np.bincount(flat, weights=feats[:, :, f_idx].ravel(), minlength=k)
            new_f[nonzero, f_idx] = s[nonzero] / counts[nonzero]
        moved = (np.abs(new_y - centers_y).max() + np.abs(new_x - centers_x).max())
        centers_y, centers_x, centers_f = new_y, new_x, new_f
        if moved == 0.0:
            break

    labels = _enforce_connectivity(labels)
    return SuperpixelSegmentation(labels)


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Keep each label's largest 4-connected component; absorb the rest.

    Fragments are merged, in raster order of their first pixel, into the
    largest currently adjacent label whose territory is already settled
    (a keeper or a previously absorbed fragment), so the result is one
    connected region per surviving label. Labels are then compacted.
    """
    h, w = labels.shape
    out = labels.copy()
    region_id = np.full((h, w), -1, dtype=np.int64)
    region_label: list = []
    region_size: list = []
    n_regions = 0
    for lab in np.unique(out):
        comp, n_comp = ndimage.label(out == lab, structure=_FOUR_CONN)
        for c in range(1, n_comp + 1):
            mask = comp == c
            region_id[mask] = n_regions
            region_label.append(int(lab))
            region_size.append(int(mask.sum()))
            n_regions += 1

    # keeper = biggest fragment per label (first in scan order on ties)
    first_pixel = np.full(n_regions, np.iinfo(np.int64).max, dtype=np.int64)
    flat_rid = region_id.ravel()
    order = np.arange(flat_rid.size)
    np.minimum.at(first_pixel, flat_rid, order)
    keeper: dict = {}
    for rid in range(n_regions):
        lab = region_label[rid]
        cur = keeper.get(lab)
        if cur is None or (region_size[rid], -first_pixel[rid]) > (region_size[cur], -first_pixel[cur]):
            keeper[lab] = rid

    settled = np.isin(region_id, list(keeper.values()))
    label_size = np.bincount(out.ravel())
    pending = sorted(
        (rid for rid in range(n_regions) if rid != keeper[region_label[rid]]),
        key=lambda rid: first_pixel[rid],
    )
    while pending:
        progressed = False
        for i, rid in enumerate(pending):
            mask = region_id == rid
            ring = ndimage.binary_dilation(mask, structure=_FOUR_CONN) & ~mask & settled
            if not ring.any():
                continue
            neigh = out[ring]
            cand = np.unique(neigh)
            sizes = label_size[cand]
            target = int(cand[np.lexsort((cand, -sizes))[0]])
            old = region_label[rid]
            label_size[old] -= int(mask.sum())
            label_size[target] += int(mask.sum())
            out[mask] = target
            settled |= mask
            pending.pop(i)
            progressed = True
            break
        if not progressed:  # unreachable: the settled set always borders pending
            raise RuntimeError("connectivity enforcement failed to converge")

    # compact surviving labels to 0..S-1 in ascending old-id order
    survivors = np.unique(out)
    remap = np.zeros(survivors.max() + 1, dtype=np.int32)
    remap[survivors] = np.arange(survivors.size, dtype=np.int32)
    return remap[out]


def segment_stats(seg: SuperpixelSegmentation, image: Image) -> np.ndarray:
    """Per-segment mean color, shape (n_segments, channels)."""
    if seg.shape != (image.height, image.width):
        raise DimensionError(
            f"segmentation {seg.shape} does not match image {(image.height, image.width)}"
        )
    flat = seg.labels.ravel()
    counts = np.bincount(flat, minlength=seg.n_segments).astype(np.float64)
    means = np.empty((seg.n_segments, image.channels))
    for c in range(image.channels):
        sums = np.bincount(flat, weights=image.data[:, :, c].ravel(), minlength=seg.n_segments)
        means[:, c] = sums / counts
    return means


def boundary_mask(seg: SuperpixelSegmentation) -> np.ndarray:
    """Boolean H x W mask of pixels that touch a different label to the right or below."""
    lab = seg.labels
    edge = np.zeros(lab.shape, dtype=bool)
    edge[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    edge[:-1, :] |= lab[:-1, :] != lab[1:, :]
    return edge


def boundary_overlay(image: Image, seg: SuperpixelSegmentation) -> Image:
    """Copy of the image with segment boundaries painted yellow."""
    if seg.shape != (image.height, image.width):
        raise DimensionError("segmentation does not match image")
    rgb = image.data if image.channels == 3 else np.repeat(image.data, 3, axis=2)
    out = rgb.copy()
    edge = boundary_mask(seg)
    out[edge] = (1.0, 1.0, 0.0)
    return Image(out)
