"""Writer for the xmeat embedding bundle format.

A bundle directory holds `manifest` (JSON) and `vectors.bin`
(little-endian float32, row-major, in manifest id order, sha256 of the
raw bytes recorded in the manifest).
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

FORMAT = "xmeat-bundle-v1"


class BundleWriteError(ValueError):
    pass


def write_bundle(path, model_id, ids, matrix, meta=None):
    """Write vectors for `ids` (row i of `matrix` belongs to ids[i])."""
    matrix = np.asarray(matrix, dtype="<f4")
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise BundleWriteError(
            f"matrix shape {matrix.shape} does not match {len(ids)} ids")
    if not np.all(np.isfinite(matrix)):
        raise BundleWriteError("non-finite embedding values")
    if len(set(ids)) != len(ids):
        raise BundleWriteError("duplicate stimulus ids")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    payload = matrix.tobytes(order="C")
    manifest = {
        "format": FORMAT,
        "model_id": model_id,
        "dim": int(matrix.shape[1]),
        "row_count": len(ids),
        "ids": list(ids),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "meta": meta or {},
    }
    (path / "vectors.bin").write_bytes(payload)
    (path / "manifest").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path
