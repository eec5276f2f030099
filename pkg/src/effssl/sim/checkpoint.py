"""Checkpoints: a text manifest (``name dim,dim,...`` per line) plus raw little-endian float32."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def save_checkpoint(params: dict, prefix):
    prefix = Path(prefix)
    lines, chunks = [], []
    for name, arr in params.items():
        lines.append(f"{name} {','.join(str(d) for d in arr.shape)}")
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    prefix.with_suffix(".manifest").write_text("\n".join(lines) + "\n")
    prefix.with_suffix(".bin").write_bytes(b"".join(chunks))
    return prefix.with_suffix(".manifest"), prefix.with_suffix(".bin")


def load_checkpoint(prefix) -> dict:
    prefix = Path(prefix)
    blob = prefix.with_suffix(".bin").read_bytes()
    params, offset = {}, 0
    for line in prefix.with_suffix(".manifest").read_text().splitlines():
        if not line.strip():
            continue
        name, dims = line.split()
        shape = tuple(int(d) for d in dims.split(",") if d)
        count = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        params[name] = arr.reshape(shape).astype(np.float32)
        offset += 4 * count
    if offset != len(blob):
        raise ValueError(f"checkpoint payload has {len(blob) - offset} trailing bytes")
    return params
