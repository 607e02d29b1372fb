"""Image file I/O: 8-bit PNG via Pillow, binary PPM/PGM natively.

Intensities are quantized as round(v * 255) on write and divided by 255 on
read. Alpha channels, palettes and 16-bit rasters are outside the supported
formats; palette/alpha PNGs are converted to plain RGB on read.
"""

from __future__ import annotations

import os
import re

import numpy as np
from PIL import Image as PilImage

from .core import Image
from .errors import ParameterError

_PNM_HEADER = re.compile(rb"^(P[56])\s+(\d+)\s+(\d+)\s+(\d+)\s")


def to_uint8(img: Image) -> np.ndarray:
    """Quantize an image to uint8 (H x W x C)."""
    return np.round(img.data * 255.0).astype(np.uint8)


def from_uint8(raw: np.ndarray) -> Image:
    return Image(np.asarray(raw, dtype=np.float64) / 255.0)


def read_image(path: str) -> Image:
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic in (b"P5", b"P6"):
        return _read_pnm(path)
    with PilImage.open(path) as pil:
        if pil.mode in ("I", "I;16", "I;16B", "F"):
            raise ParameterError(f"unsupported bit depth in {path!r} (mode {pil.mode})")
        if pil.mode not in ("L", "RGB"):
            pil = pil.convert("RGB")
        arr = np.asarray(pil, dtype=np.float64) / 255.0
    return Image(arr)


def write_image(img: Image, path: str) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext in (".ppm", ".pgm"):
        _write_pnm(img, path)
        return
    raw = to_uint8(img)
    if img.channels == 1:
        pil = PilImage.fromarray(raw[:, :, 0], mode="L")
    else:
        pil = PilImage.fromarray(raw, mode="RGB")
    pil.save(path, format="PNG")


def _read_pnm(path: str) -> Image:
    with open(path, "rb") as fh:
        blob = fh.read()
    m = _PNM_HEADER.match(blob)
    if m is None:
        raise ParameterError(f"{path!r} is not a binary PPM/PGM file")
    kind, width, height, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise ParameterError(f"only maxval 255 PNM supported, got {maxval}")
    channels = 3 if kind == b"P6" else 1
    payload = blob[m.end():]
    expected = width * height * channels
    if len(payload) < expected:
        raise ParameterError(f"truncated PNM payload in {path!r}")
    raw = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(height, width, channels)
    return from_uint8(raw)


def _write_pnm(img: Image, path: str) -> None:
    raw = to_uint8(img)
    if path.lower().endswith(".pgm"):
        if img.channels != 1:
            raise ParameterError("PGM requires a single-channel image")
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        payload = raw[:, :, 0].tobytes()
    else:
        if img.channels == 1:
            raw = np.repeat(raw, 3, axis=2)
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        payload = raw.tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)


def write_label_pgm(labels: np.ndarray, path: str) -> None:
    """Write an integer label map as a 16-bit binary PGM (big-endian samples)."""
    lab = np.asarray(labels)
    if lab.ndim != 2:
        raise ParameterError("label map must be 2-d")
    if lab.min() < 0 or lab.max() > 65535:
        raise ParameterError("labels must fit 0..65535 for PGM output")
    h, w = lab.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    payload = lab.astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)
