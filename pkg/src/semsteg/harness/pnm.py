"""Binary NetPBM (P5 grayscale, P6 RGB) reading and writing, maxval 255 only."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import FormatError, UnsupportedFormatError

_WS = b" \t\n\r\v\f"


def _read_header(buf: bytes):
    """Parse magic, width, height, maxval; return them and the payload offset."""
    if len(buf) < 2:
        raise FormatError("file too short for a NetPBM header", offset=0)
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        if magic[:1] == b"P":
            raise UnsupportedFormatError(f"unsupported NetPBM variant {magic!r}", offset=0)
        raise FormatError(f"bad magic {magic!r}", offset=0)
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(buf):
            raise FormatError("truncated header", offset=pos)
        ch = buf[pos : pos + 1]
        if ch in (b"#",):
            while pos < len(buf) and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if ch in _WS or ch == b"":
            pos += 1
            continue
        start = pos
        while pos < len(buf) and buf[pos : pos + 1] not in _WS and buf[pos : pos + 1] != b"#":
            pos += 1
        token = buf[start:pos]
        if not token.isdigit():
            raise FormatError(f"expected an integer header field, got {token!r}", offset=start)
        fields.append((int(token), start))
    if pos >= len(buf) or buf[pos : pos + 1] not in _WS:
        raise FormatError("header must end with a single whitespace byte", offset=pos)
    pos += 1
    (width, _), (height, hoff), (maxval, moff) = fields
    if width < 1 or height < 1:
        raise FormatError("image dimensions must be positive", offset=hoff)
    if maxval != 255:
        raise UnsupportedFormatError(f"maxval {maxval} not supported (only 255)", offset=moff)
    return magic, width, height, pos


def load_pnm(path) -> np.ndarray:
    """Read a P5/P6 file into a (C, H, W) float array with values ``p / 255``."""
    buf = Path(path).read_bytes()
    magic, width, height, offset = _read_header(buf)
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    payload = buf[offset : offset + need]
    if len(payload) < need:
        raise FormatError(f"truncated payload: need {need} bytes, found {len(payload)}", offset=offset + len(payload))
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return pixels.reshape(height, width, channels).transpose(2, 0, 1).copy()


def save_pnm(image, path):
    """Write a (C, H, W) image in [0, 1] as P5 (C=1) or P6 (C=3)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[None]
    if img.ndim != 3 or img.shape[0] not in (1, 3):
        raise FormatError(f"cannot store image of shape {img.shape} as NetPBM")
    c, h, w = img.shape
    data = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    magic = b"P5" if c == 1 else b"P6"
    header = magic + f"\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.transpose(1, 2, 0).tobytes())
