"""Pure-numpy im2col / col2im, used when the compiled extension is missing."""

import numpy as np


def im2col(xp: np.ndarray, k: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    n, c = xp.shape[:2]
    out = np.empty((n, c, k, k, out_h, out_w), dtype=np.float64)
    h_end = stride * (out_h - 1) + 1
    w_end = stride * (out_w - 1) + 1
    for ki in range(k):
        for kj in range(k):
            out[:, :, ki, kj] = xp[:, :, ki : ki + h_end : stride, kj : kj + w_end : stride]
    return out


def col2im(cols: np.ndarray, hp: int, wp: int, stride: int) -> np.ndarray:
    n, c, k, _, out_h, out_w = cols.shape
    out = np.zeros((n, c, hp, wp), dtype=np.float64)
    h_end = stride * (out_h - 1) + 1
    w_end = stride * (out_w - 1) + 1
    for ki in range(k):
        for kj in range(k):
            out[:, :, ki : ki + h_end : stride, kj : kj + w_end : stride] += cols[:, :, ki, kj]
    return out
