"""Model backends that map stimuli to joint-space embeddings.

Both backends return L2-unnormalized projection-space vectors; xmeat
normalizes at test time.  Images are pre-resized to 500x400 before the
checkpoint's own preprocessing so that differently sized source images
enter every model's transform pipeline identically.
"""
from __future__ import annotations

import numpy as np
from PIL import Image

PRE_RESIZE = (500, 400)  # width, height


class BackendError(RuntimeError):
    pass


def resolve_device(device):
    import torch
    if device != "auto":
        return device
    return "cuda" if torch.cuda.is_available() else "cpu"


def load_image(path):
    img = Image.open(path).convert("RGB")
    return img.resize(PRE_RESIZE, Image.BICUBIC)


def _batched(seq, size):
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def _features(result):
    # transformers < 5 returns the projected tensor directly; >= 5
    # returns a model output with it in pooler_output
    if hasattr(result, "pooler_output"):
        result = result.pooler_output
    return result.cpu().numpy()


class TransformersClipBackend:
    """CLIP checkpoints in Hugging Face format (hub name or local path)."""

    name = "transformers"

    def __init__(self, model, pretrained=None, device="auto"):
        if pretrained is not None:
            raise BackendError(
                "--pretrained applies to the open_clip backend only; "
                "transformers checkpoints are addressed by a single name")
        import torch
        from transformers import CLIPModel, CLIPProcessor
        self.device = resolve_device(device)
        try:
            self.model = CLIPModel.from_pretrained(model)
        except Exception as exc:
            raise BackendError(f"cannot load checkpoint {model!r}: {exc}")
        self.model.to(self.device).eval()
        self.processor = CLIPProcessor.from_pretrained(model)
        self.dim = int(self.model.config.projection_dim)
        self._torch = torch

    def embed_texts(self, texts, batch_size=64):
        out = []
        with self._torch.inference_mode():
            for chunk in _batched(texts, batch_size):
                enc = self.processor(text=list(chunk), return_tensors="pt",
                                     padding=True, truncation=True)
                enc = {k: v.to(self.device) for k, v in enc.items()}
                out.append(_features(self.model.get_text_features(**enc)))
        return np.concatenate(out, axis=0)

    def embed_images(self, paths, batch_size=16):
        out = []
        with self._torch.inference_mode():
            for chunk in _batched(paths, batch_size):
                images = [load_image(p) for p in chunk]
                enc = self.processor(images=images, return_tensors="pt")
                enc = {k: v.to(self.device) for k, v in enc.items()}
                out.append(_features(self.model.get_image_features(**enc)))
        return np.concatenate(out, axis=0)


class OpenClipBackend:
    """open_clip checkpoints addressed by (model, pretrained tag)."""

    name = "open_clip"

    def __init__(self, model, pretrained=None, device="auto"):
        try:
            import open_clip
        except ImportError:
            raise BackendError(
                "the open_clip backend requires the open-clip-torch "
                "package; install it or use --backend transformers")
        import torch
        self.device = resolve_device(device)
        self.model, _, self.preprocess = open_clip.create_model_and_transforms(
            model, pretrained=pretrained, device=self.device)
        self.model.eval()
        self.tokenizer = open_clip.get_tokenizer(model)
        self.dim = int(self.model.text_projection.shape[1]) \
            if hasattr(self.model, "text_projection") else None
        self._torch = torch

    def embed_texts(self, texts, batch_size=64):
        out = []
        with self._torch.inference_mode():
            for chunk in _batched(texts, batch_size):
                tokens = self.tokenizer(list(chunk)).to(self.device)
                feats = self.model.encode_text(tokens)
                out.append(feats.cpu().numpy())
        return np.concatenate(out, axis=0)

    def embed_images(self, paths, batch_size=16):
        out = []
        with self._torch.inference_mode():
            for chunk in _batched(paths, batch_size):
                tensors = self._torch.stack(
                    [self.preprocess(load_image(p)) for p in chunk])
                feats = self.model.encode_image(tensors.to(self.device))
                out.append(feats.cpu().numpy())
        return np.concatenate(out, axis=0)


BACKENDS = {
    "transformers": TransformersClipBackend,
    "open_clip": OpenClipBackend,
}


def make_backend(backend, model, pretrained=None, device="auto"):
    if backend not in BACKENDS:
        raise BackendError(f"unknown backend {backend!r}")
    return BACKENDS[backend](model, pretrained=pretrained, device=device)


def list_models(backend):
    """Known checkpoint names for a backend, best effort."""
    if backend == "open_clip":
        try:
            import open_clip
        except ImportError:
            raise BackendError(
                "the open_clip backend requires the open-clip-torch package")
        return [f"{m}:{p}" for m, p in open_clip.list_pretrained()]
    return [
        "openai/clip-vit-base-patch32",
        "openai/clip-vit-base-patch16",
        "openai/clip-vit-large-patch14",
        "laion/CLIP-ViT-B-32-laion2B-s34B-b79K",
        "laion/CLIP-ViT-H-14-laion2B-s32B-b79K",
        "facebook/metaclip-b32-400m",
    ]
