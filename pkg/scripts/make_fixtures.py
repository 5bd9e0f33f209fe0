"""Regenerate the committed synthetic test fixtures.

Writes tests/fixtures/: a full registry with placeholder images, eight
synthetic embedding bundles with planted bias structure of varying
strength, and matching model metadata / performance tables.  Everything
is seeded, so re-running reproduces the same bytes.
"""
from pathlib import Path

import numpy as np

from xmeat.registry import load_registry, write_registry
from xmeat.store import EmbeddingBundle, write_bundle

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DIM = 16

# model_id -> (bias strength, param count, arch family, dataset family,
#              dataset size)
MODELS = {
    "model_a": (0.2, 120e6, "vit", "cc12m", 12e6),
    "model_b": (0.4, 150e6, "convnext", "cc12m", 12e6),
    "model_c": (0.9, 300e6, "vit", "laion", 400e6),
    "model_d": (1.1, 450e6, "vit", "laion", 2e9),
    "model_e": (0.8, 200e6, "convnext", "laion", 400e6),
    "model_f": (1.6, 600e6, "vit", "dfn", 2e9),
    "model_g": (1.4, 900e6, "convnext", "dfn", 5e9),
    "model_h": (0.6, 250e6, "vit", "cc12m", 12e6),
}


def make_bundle(registry, model_id, strength, rng):
    rows = {}
    axis = np.zeros(DIM)
    axis[0] = 1.0
    for item in registry.items.values():
        sign = 1.0 if item.pole == "first" else -1.0
        noise = rng.normal(size=DIM)
        rows[item.id] = (noise + strength * sign * axis).astype(np.float32)
    return EmbeddingBundle(model_id=model_id, dim=DIM, rows=rows,
                           meta={"synthetic": True, "strength": strength})


def main():
    regdir = FIXTURES / "registry"
    write_registry(regdir, placeholder_images=True)
    registry = load_registry(regdir)

    rng = np.random.default_rng(20240817)
    for model_id, (strength, *_rest) in MODELS.items():
        bundle = make_bundle(registry, model_id, strength, rng)
        write_bundle(bundle, FIXTURES / "bundles" / model_id)

    lines = ["model_id,param_count,arch_family,dataset_family,dataset_size"]
    for model_id, (_s, params, arch, dataset, ds_size) in MODELS.items():
        lines.append(f"{model_id},{int(params)},{arch},{dataset},{int(ds_size)}")
    (FIXTURES / "models.csv").write_text("\n".join(lines) + "\n")

    # Performance scores correlate with planted bias strength.
    perf_rng = np.random.default_rng(99)
    rows = ["model_id,task,score"]
    for model_id, (strength, *_rest) in MODELS.items():
        for task in ("imagenet", "caltech101", "retrieval"):
            score = 0.4 + 0.2 * strength + perf_rng.normal(0, 0.01)
            rows.append(f"{model_id},{task},{score:.6f}")
    (FIXTURES / "vtab.csv").write_text("\n".join(rows) + "\n")
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
