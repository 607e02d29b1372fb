"""Procedural textured test images.

Six deterministic 64x64 RGB textures combining gratings, filtered noise and
smooth gradients ship with the package (``data/``); they give the
desk-scale robustness experiment images whose quadrants differ in mean
luminance while still carrying structure at several spatial frequencies.
"""

from __future__ import annotations

import os

import numpy as np

from .core import Image
from .perturb import gaussian_blur

N_BUNDLED = 6


def _grid(size: int):
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    return y, x


def _fractal_noise(size: int, rng, octaves=(4, 8, 16)) -> np.ndarray:
    out = np.zeros((size, size))
    for i, cells in enumerate(octaves):
        coarse = rng.uniform(-1.0, 1.0, size=(cells, cells))
        yy = np.linspace(0, cells - 1, size)
        xx = np.linspace(0, cells - 1, size)
        y0 = np.clip(yy.astype(int), 0, cells - 2)
        x0 = np.clip(xx.astype(int), 0, cells - 2)
        fy = (yy - y0)[:, None]
        fx = (xx - x0)[None, :]
        top = coarse[y0][:, x0] * (1 - fx) + coarse[y0][:, x0 + 1] * fx
        bot = coarse[y0 + 1][:, x0] * (1 - fx) + coarse[y0 + 1][:, x0 + 1] * fx
        out += (top * (1 - fy) + bot * fy) / (i + 1)
    return out / np.abs(out).max()


def generate_texture(index: int, size: int = 64) -> Image:
    """One of the six bundled texture patterns at the requested size."""
    rng = np.random.default_rng([7321, index])
    y, x = _grid(size)
    if index % N_BUNDLED == 0:
        base = 0.5 + 0.2 * np.sin(2 * np.pi * 6 * x) * np.sin(2 * np.pi * 4 * y)
        ramp = 0.25 * x + 0.15 * y
        r, g, b = base + ramp - 0.1, base, base - 0.1 * x
    elif index % N_BUNDLED == 1:
        n = _fractal_noise(size, rng)
        ramp = 0.3 * (1 - y)
        r, g, b = 0.45 + 0.25 * n, 0.5 + 0.2 * n + ramp * 0.4, 0.4 + 0.15 * n + ramp
    elif index % N_BUNDLED == 2:
        check = ((np.floor(x * 8) + np.floor(y * 8)) % 2)
        vign = 0.3 * ((x - 0.2) ** 2 + (y - 0.8) ** 2)
        r = 0.3 + 0.35 * check + vign
        g = 0.35 + 0.3 * check + 0.5 * vign
        b = 0.4 + 0.25 * check
    elif index % N_BUNDLED == 3:
        rad = np.hypot(x - 0.3, y - 0.35)
        waves = 0.5 + 0.22 * np.sin(2 * np.pi * 7 * rad)
        r, g, b = waves + 0.2 * x, waves, waves + 0.2 * (1 - y) - 0.1
    elif index % N_BUNDLED == 4:
        stripes = 0.5 + 0.25 * np.sin(2 * np.pi * 9 * (x + y) / 2)
        blotch = _fractal_noise(size, rng) * 0.18
        r = stripes + blotch + 0.12 * y
        g = stripes - 0.08 * x + 0.15
        b = stripes * 0.8 + blotch
    else:
        n = _fractal_noise(size, rng, octaves=(3, 6, 12, 24))
        swirl = 0.5 + 0.2 * np.sin(2 * np.pi * (3 * x + 2 * n))
        r = swirl + 0.18 * (1 - x)
        g = swirl + 0.1 * n + 0.08
        b = swirl - 0.15 * y + 0.2
    raw = np.stack([r, g, b], axis=2)
    img = Image(np.clip(raw, 0.02, 0.98))
    # a light blur keeps the 8-bit quantization from looking like dither
    return gaussian_blur(img, 3)


def texture_dir() -> str:
    """Directory holding the bundled texture PNGs."""
    return os.path.join(os.path.dirname(__file__), "data")


def write_textures(out_dir: str, size: int = 64, count: int = N_BUNDLED) -> list:
    """Regenerate the bundled texture set into a directory."""
    from .imgio import write_image

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(count):
        path = os.path.join(out_dir, f"texture_{i:02d}.png")
        write_image(generate_texture(i, size), path)
        paths.append(path)
    return paths
