"""Procedural image datasets."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..numerics import Rng
from .pnm import load_pnm


def _one_image(rng: Rng, shape) -> np.ndarray:
    c, h, w = shape
    yy, xx = np.meshgrid(np.linspace(0.0, 1.0, h), np.linspace(0.0, 1.0, w), indexing="ij")
    img = np.empty((c, h, w))
    # random linear gradient background
    base = rng.uniform(0.15, 0.85, c)
    gx, gy = rng.uniform(-0.35, 0.35, 2)
    for ch in range(c):
        img[ch] = base[ch] + gx * (xx - 0.5) + gy * (yy - 0.5)
    # band-limited sinusoidal texture
    if rng.uniform(0, 1) < 0.6:
        fx, fy = rng.integers(1, 5, 2)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.05, 0.2)
        img += amp * np.sin(2 * np.pi * (fx * xx + fy * yy) + phase)
    for _ in range(int(rng.integers(1, 4))):
        value = rng.uniform(0.0, 1.0, c)
        if rng.uniform(0, 1) < 0.5:
            y0, x0 = rng.integers(0, h - 4), rng.integers(0, w - 4)
            y1 = y0 + int(rng.integers(4, max(5, h // 2)))
            x1 = x0 + int(rng.integers(4, max(5, w // 2)))
            mask = (yy * (h - 1) >= y0) & (yy * (h - 1) < y1) & (xx * (w - 1) >= x0) & (xx * (w - 1) < x1)
        else:
            cy, cx = rng.uniform(0.15, 0.85, 2)
            r = rng.uniform(0.08, 0.3)
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        for ch in range(c):
            img[ch][mask] = value[ch]
    return np.clip(img, 0.0, 1.0)


def synth_dataset(seed: int, n: int, shape=(1, 32, 32)) -> np.ndarray:
    """``n`` procedural images of ``shape``: gradients, textures, rectangles, discs.

    Returned as an (n, C, H, W) float64 array with values in [0, 1].
    """
    if n < 1:
        raise ConfigurationError("dataset size must be at least 1")
    rng = Rng(seed)
    return np.stack([_one_image(rng, tuple(shape)) for _ in range(n)])


def load_directory(path, shape=None) -> np.ndarray:
    """All .pgm/.ppm/.pnm images of a directory in sorted order."""
    files = sorted(p for p in Path(path).iterdir() if p.suffix.lower() in (".pgm", ".ppm", ".pnm"))
    if not files:
        raise ConfigurationError(f"no NetPBM images in {path}")
    images = [load_pnm(f) for f in files]
    if shape is not None:
        for f, img in zip(files, images):
            if img.shape != tuple(shape):
                raise ConfigurationError(f"{f.name}: shape {img.shape}, expected {tuple(shape)}")
    return np.stack(images)


def make_pairs(images: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a stack into (cover, secret) halves by alternating index."""
    n = len(images) // 2
    if n == 0:
        raise ConfigurationError("need at least two images to form a cover/secret pair")
    return images[0 : 2 * n : 2], images[1 : 2 * n : 2]
