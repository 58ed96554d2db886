"""``SSCKPT1`` checkpoint files.

Layout::

    b"SSCKPT1\\n"
    8-byte little-endian unsigned header length L
    L bytes of UTF-8 JSON: {"tensors": [{"name", "shape", "offset"}...],
                            "payload_bytes": P, "config": {...}}
    P bytes: little-endian float64 values of every tensor, in header order

``offset`` is in bytes from the start of the payload.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..codec import CodecModel
from ..errors import MagicMismatchError, ShapeConflictError, TruncatedCheckpointError
from ..numerics import Module
from ..stego.models import StegoModel

MAGIC = b"SSCKPT1\n"
_LEN = struct.Struct("<Q")

MODEL_KINDS = {"codec": CodecModel, "stego": StegoModel}


def save_checkpoint(model: Module, path, config: dict | None = None):
    """Write every named parameter of ``model`` plus a config echo."""
    if config is None:
        config = model.config_dict() if hasattr(model, "config_dict") else {}
    entries, chunks, offset = [], [], 0
    for name, p in model.named_parameters():
        data = np.ascontiguousarray(p.data, dtype="<f8")
        entries.append({"name": name, "shape": list(p.shape), "offset": offset})
        chunks.append(data.tobytes())
        offset += data.nbytes
    header = json.dumps(
        {"tensors": entries, "payload_bytes": offset, "config": config}, sort_keys=True
    ).encode("utf-8")
    Path(path).write_bytes(MAGIC + _LEN.pack(len(header)) + header + b"".join(chunks))


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Parse a checkpoint into ``(header, {name: array})``."""
    buf = Path(path).read_bytes()
    if buf[: len(MAGIC)] != MAGIC:
        raise MagicMismatchError(f"not an SSCKPT1 file: magic {buf[:len(MAGIC)]!r}", offset=0)
    pos = len(MAGIC)
    if len(buf) < pos + _LEN.size:
        raise TruncatedCheckpointError("file ends inside the header length", offset=len(buf))
    (hlen,) = _LEN.unpack_from(buf, pos)
    pos += _LEN.size
    if len(buf) < pos + hlen:
        raise TruncatedCheckpointError(f"header needs {hlen} bytes", offset=len(buf))
    try:
        header = json.loads(buf[pos : pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TruncatedCheckpointError(f"malformed header: {exc}", offset=pos) from exc
    pos += hlen
    payload = buf[pos:]
    need = int(header["payload_bytes"])
    if len(payload) < need:
        raise TruncatedCheckpointError(
            f"payload truncated: {len(payload)} of {need} bytes", offset=pos + len(payload)
        )
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = int(entry["offset"])
        if start + 8 * count > need:
            raise TruncatedCheckpointError(f"tensor {entry['name']} exceeds payload", offset=pos + start)
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=start)
        tensors[entry["name"]] = arr.astype(np.float64).reshape(shape)
    return header, tensors


def _config_shapes(cfg: dict) -> dict:
    codec = cfg.get("codec", {})
    out = {}
    if codec:
        c, h, w = codec.get("channels"), codec.get("height"), codec.get("width")
        fc = codec.get("feat_channels")
        out["image"] = (c, h, w)
        if None not in (fc, h, w):
            out["feature"] = (fc, h // 4, w // 4)
    return out


def load_checkpoint(path, into: Module | None = None, expect_config: dict | None = None) -> Module:
    """Rebuild a model from a checkpoint.

    With ``into`` the tensors are loaded into that model, whose parameter
    shapes must match. ``expect_config`` (a config dict of the loading
    context) is compared against the echoed image and feature shapes.
    Conflicts raise :class:`ShapeConflictError`.
    """
    header, tensors = read_checkpoint(path)
    cfg = header.get("config", {})
    if expect_config is not None:
        have, want = _config_shapes(cfg), _config_shapes(expect_config)
        for key in want:
            if key in have and tuple(have[key]) != tuple(want[key]):
                raise ShapeConflictError(
                    f"checkpoint {key} shape {tuple(have[key])} conflicts with expected {tuple(want[key])}"
                )
    if into is None:
        kind = cfg.get("kind")
        if kind not in MODEL_KINDS:
            raise ShapeConflictError(f"checkpoint does not describe a known model kind ({kind!r})")
        into = MODEL_KINDS[kind].from_config_dict(cfg)
    params = dict(into.named_parameters())
    if set(params) != set(tensors):
        missing = sorted(set(params) - set(tensors))
        extra = sorted(set(tensors) - set(params))
        raise ShapeConflictError(f"parameter names differ: missing={missing[:5]} unexpected={extra[:5]}")
    for name, p in params.items():
        if tuple(tensors[name].shape) != tuple(p.shape):
            raise ShapeConflictError(f"{name}: checkpoint shape {tensors[name].shape}, model expects {p.shape}")
    for name, p in params.items():
        p.data = tensors[name].copy()
    return into
