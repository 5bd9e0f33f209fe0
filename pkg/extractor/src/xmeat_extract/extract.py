"""Run a backend over a registry and assemble the bundle matrix."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .backends import make_backend
from .bundle_io import write_bundle
from .registry_io import load_stimuli


def extract_bundle(registry_dir, out_dir, model, *, pretrained=None,
                   backend="transformers", device="auto", batch_size=32,
                   model_id=None, check_hashes=True):
    """Embed every stimulus and write an xmeat bundle; returns the path.

    Vectors keep manifest order.  Identical payloads (the same word
    appearing in several sets) are embedded once and shared.
    """
    registry_dir = Path(registry_dir)
    stimuli = load_stimuli(registry_dir, check_hashes=check_hashes)
    be = make_backend(backend, model, pretrained=pretrained, device=device)

    texts, image_paths = {}, {}
    for s in stimuli:
        if s.kind == "text":
            texts.setdefault(s.payload, None)
        else:
            image_paths.setdefault(s.payload, None)
    text_list = list(texts)
    image_list = list(image_paths)
    if text_list:
        vecs = be.embed_texts(text_list, batch_size=batch_size)
        texts = dict(zip(text_list, vecs))
    if image_list:
        vecs = be.embed_images([registry_dir / p for p in image_list],
                               batch_size=max(1, batch_size // 2))
        image_paths = dict(zip(image_list, vecs))

    ids = [s.id for s in stimuli]
    matrix = np.stack([
        texts[s.payload] if s.kind == "text" else image_paths[s.payload]
        for s in stimuli])
    if model_id is None:
        model_id = model.replace("/", "_")
        if pretrained:
            model_id += f"_{pretrained}"
    meta = {
        "backend": be.name,
        "model": str(model),
        "pretrained": pretrained,
        "device": be.device,
        "pre_resize": "500x400",
    }
    return write_bundle(out_dir, model_id, ids, matrix, meta=meta)
