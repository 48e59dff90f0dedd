"""Versioned binary checkpoint: JSON shape manifest + flat float64 LE arrays."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

_MAGIC = b"FXCK"
_VERSION = 1


def save_params(path, params: dict[str, np.ndarray], meta: dict | None = None) -> None:
    """Write parameters to ``path``; names are stored sorted for stable bytes."""
    names = sorted(params.keys())
    header = {
        "format": "flexrank-checkpoint",
        "version": _VERSION,
        "names": names,
        "shapes": {n: list(params[n].shape) for n in names},
        "meta": meta or {},
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(len(hbytes).to_bytes(4, "little"))
        f.write(hbytes)
        for n in names:
            f.write(np.ascontiguousarray(params[n], dtype="<f8").tobytes())


def load_params(path) -> tuple[dict[str, np.ndarray], dict]:
    """Read a checkpoint back into (params, meta)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a flexrank checkpoint")
    hlen = int.from_bytes(raw[4:8], "little")
    header = json.loads(raw[8:8 + hlen].decode("utf-8"))
    if header.get("version") != _VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
    params = {}
    offset = 8 + hlen
    for n in header["names"]:
        shape = tuple(header["shapes"][n])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        params[n] = arr.reshape(shape).astype(np.float64)
        offset += count * 8
    return params, header.get("meta", {})
