"""On-disk embedding bundles: one model's vectors for a stimulus registry.

A bundle is a directory with two files:

    manifest      JSON: model_id, dim, row_count, ordered id list,
                  registry hash, payload checksum, free-form meta
    vectors.bin   contiguous little-endian float32, row-major, in
                  manifest id order

Vectors are stored raw (not normalized); normalization happens at test
time.  Bundles are immutable after writing.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MANIFEST_NAME = "manifest"
VECTORS_NAME = "vectors.bin"


class BundleError(ValueError):
    """Invalid, corrupt, or incomplete embedding bundle."""


@dataclass
class EmbeddingBundle:
    model_id: str
    dim: int
    rows: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def validate(self):
        if self.dim <= 0:
            raise BundleError("invalid bundle: non-positive dim")
        for sid, vec in self.rows.items():
            vec = np.asarray(vec)
            if vec.shape != (self.dim,):
                raise BundleError(
                    f"invalid bundle: vector for {sid!r} has shape "
                    f"{vec.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise BundleError(f"invalid bundle: non-finite entry in {sid!r}")

    def vector(self, stimulus_id):
        if stimulus_id not in self.rows:
            raise BundleError(f"stimulus {stimulus_id!r} not in bundle")
        return self.rows[stimulus_id]


def write_bundle(bundle: EmbeddingBundle, path):
    """Write a validated bundle to a directory; round trip is bit-exact."""
    bundle.validate()
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    ids = list(bundle.rows)
    mat = np.stack([np.asarray(bundle.rows[i], dtype="<f4") for i in ids]) \
        if ids else np.zeros((0, bundle.dim), dtype="<f4")
    payload = mat.tobytes(order="C")
    manifest = {
        "format": "xmeat-bundle-v1",
        "model_id": bundle.model_id,
        "dim": bundle.dim,
        "row_count": len(ids),
        "ids": ids,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "meta": bundle.meta,
    }
    (path / VECTORS_NAME).write_bytes(payload)
    (path / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def read_bundle(path) -> EmbeddingBundle:
    """Read and validate a bundle directory (checksum, shape, finiteness)."""
    path = Path(path)
    mpath = path / MANIFEST_NAME
    vpath = path / VECTORS_NAME
    if not mpath.exists() or not vpath.exists():
        raise BundleError(f"not a bundle directory: {path}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"corrupt manifest: {exc}") from exc
    if manifest.get("format") != "xmeat-bundle-v1":
        raise BundleError("unrecognized bundle format")
    ids = manifest["ids"]
    dim = manifest["dim"]
    if manifest["row_count"] != len(ids):
        raise BundleError("corrupt manifest: row_count != len(ids)")
    payload = vpath.read_bytes()
    if hashlib.sha256(payload).hexdigest() != manifest["payload_sha256"]:
        raise BundleError("payload checksum failure")
    expected = len(ids) * dim * 4
    if len(payload) != expected:
        raise BundleError(
            f"dimension mismatch: payload is {len(payload)} bytes, "
            f"expected {expected}")
    mat = np.frombuffer(payload, dtype="<f4").reshape(len(ids), dim)
    bundle = EmbeddingBundle(
        model_id=manifest["model_id"], dim=dim,
        rows={sid: mat[i] for i, sid in enumerate(ids)},
        meta=manifest.get("meta", {}))
    bundle.validate()
    return bundle


@dataclass
class CoverageReport:
    model_id: str
    missing: dict[str, list[str]]  # test_id -> missing stimulus ids

    @property
    def runnable(self):
        return [tid for tid, miss in self.missing.items() if not miss]

    @property
    def n_runnable(self):
        return len(self.runnable)


def coverage_check(bundle, suite, registry) -> CoverageReport:
    """Report which tests a bundle can run (report-only, never raises).

    A test is runnable iff the bundle covers every stimulus id in its
    four sets.
    """
    have = set(bundle.rows)
    missing = {}
    for spec in suite:
        ids = []
        for s in registry.resolve_sets(spec):
            ids.extend(s.ids)
        missing[spec.test_id] = [i for i in ids if i not in have]
    return CoverageReport(model_id=bundle.model_id, missing=missing)
