"""Image quality metrics."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError

PSNR_CAP = 100.0


def psnr(a, b, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE), capped at 100 dB when MSE < 1e-10."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"PSNR of differently shaped images: {a.shape} vs {b.shape}")
    err = float(np.mean((a - b) ** 2))
    if err < 1e-10:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(peak * peak / err))


def ssim(a, b, peak: float = 1.0, window: int = 8, stride: int = 4) -> float:
    """Mean SSIM over uniform ``window`` x ``window`` patches taken every ``stride`` pixels.

    Works on (C, H, W) images or (N, C, H, W) batches; the average runs over
    windows, channels and batch entries.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"SSIM of differently shaped images: {a.shape} vs {b.shape}")
    if a.shape[-1] < window or a.shape[-2] < window:
        raise ShapeError(f"SSIM needs images of at least {window}x{window}")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    wa = sliding_window_view(a, (window, window), axis=(-2, -1))[..., ::stride, ::stride, :, :]
    wb = sliding_window_view(b, (window, window), axis=(-2, -1))[..., ::stride, ::stride, :, :]
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    var_a = wa.var(axis=(-2, -1))
    var_b = wb.var(axis=(-2, -1))
    cov = (wa * wb).mean(axis=(-2, -1)) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def batch_psnr(a, b, peak: float = 1.0) -> float:
    """Mean of per-image PSNR over a batch."""
    return float(np.mean([psnr(x, y, peak) for x, y in zip(a, b)]))
