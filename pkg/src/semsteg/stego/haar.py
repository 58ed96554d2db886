"""Single-level orthonormal 2-D Haar transform and high-frequency preprocessing."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


def haar_dwt(image):
    """Return ``(LL, LH, HL, HH)`` bands, each of shape (..., H/2, W/2).

    For a 2x2 block ``[a b; c d]``: LL=(a+b+c+d)/2, LH=(a-b+c-d)/2,
    HL=(a+b-c-d)/2, HH=(a-b-c+d)/2.
    """
    x = np.asarray(image, dtype=np.float64)
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ConfigurationError(f"Haar DWT needs even height and width, got {h}x{w}")
    a = x[..., 0::2, 0::2]
    b = x[..., 0::2, 1::2]
    c = x[..., 1::2, 0::2]
    d = x[..., 1::2, 1::2]
    ll = (a + b + c + d) / 2
    lh = (a - b + c - d) / 2
    hl = (a + b - c - d) / 2
    hh = (a - b - c + d) / 2
    return ll, lh, hl, hh


def inverse_haar(ll, lh, hl, hh) -> np.ndarray:
    ll, lh, hl, hh = (np.asarray(t, dtype=np.float64) for t in (ll, lh, hl, hh))
    shape = ll.shape[:-2] + (2 * ll.shape[-2], 2 * ll.shape[-1])
    x = np.empty(shape)
    x[..., 0::2, 0::2] = (ll + lh + hl + hh) / 2
    x[..., 0::2, 1::2] = (ll - lh + hl - hh) / 2
    x[..., 1::2, 0::2] = (ll + lh - hl - hh) / 2
    x[..., 1::2, 1::2] = (ll - lh - hl + hh) / 2
    return x


def rescale_unit(x: np.ndarray) -> np.ndarray:
    """Affine map of [min, max] onto [0, 1]; a constant maps to 0.5.

    A batch (N, C, H, W) is rescaled per sample.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 4:
        return np.stack([rescale_unit(s) for s in x])
    lo, hi = x.min(), x.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        return np.full_like(x, 0.5)
    return (x - lo) / (hi - lo)


def highfreq_preprocess(secret, return_ll_mean: bool = False):
    """Drop the LL band of ``secret`` and rescale the detail image into [0, 1].

    With ``return_ll_mean`` the mean of the removed LL band is returned as
    well (it is only ever reported, never used for reconstruction).
    """
    x = np.asarray(secret, dtype=np.float64)
    ll, lh, hl, hh = haar_dwt(x)
    detail = inverse_haar(np.zeros_like(ll), lh, hl, hh)
    out = rescale_unit(detail)
    if return_ll_mean:
        return out, float(ll.mean())
    return out
