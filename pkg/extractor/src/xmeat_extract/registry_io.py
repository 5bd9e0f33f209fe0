"""Read-only view of an xmeat registry directory.

The registry format is the interface contract with xmeat: stimulus ids
produced here must match the ids xmeat derives from the same manifest,
otherwise the emitted bundle cannot cover any test.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

FORMAT = "xmeat-registry-v1"
PLACEHOLDER = "[WORD]"


class RegistryReadError(ValueError):
    """Missing, malformed, or corrupt registry input."""


@dataclass(frozen=True)
class Stimulus:
    id: str
    kind: str  # "text" | "image"
    payload: str  # sentence/word for text, path relative to root for image


def slugify(text):
    """Lowercase, collapse non-alphanumerics to single underscores."""
    out = []
    for ch in text.lower():
        out.append(ch if ch.isalnum() else "_")
    slug = "".join(out)
    while "__" in slug:
        slug = slug.replace("__", "_")
    return slug.strip("_")


def _text_items(entry, templates):
    name = entry["name"]
    words = entry["items"]
    if not entry.get("expand_templates"):
        return [Stimulus(id=f"{name}/{slugify(w)}", kind="text", payload=w)
                for w in words]
    items = []
    for word in words:
        slug = slugify(word)
        for j, tpl in enumerate(templates):
            if tpl.count(PLACEHOLDER) != 1:
                raise RegistryReadError(f"malformed template: {tpl!r}")
            items.append(Stimulus(
                id=f"{name}/{slug}/t{j}", kind="text",
                payload=tpl.replace(PLACEHOLDER, word)))
    return items


def _image_items(entry, root, check_hashes):
    name = entry["name"]
    items = []
    for e in entry["items"]:
        rel = e["path"]
        path = root / rel
        if not path.exists():
            raise RegistryReadError(f"missing image file: {rel}")
        if check_hashes and e.get("sha256"):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            if digest != e["sha256"]:
                raise RegistryReadError(f"image hash mismatch: {rel}")
        slug = slugify(Path(rel).with_suffix("").as_posix())
        items.append(Stimulus(id=f"{name}/{slug}", kind="image", payload=rel))
    return items


def load_stimuli(root, check_hashes=True) -> list[Stimulus]:
    """Enumerate every stimulus in manifest order, ids deduplicated.

    The same id can appear only once; duplicate ids across sets are a
    registry defect and rejected.
    """
    root = Path(root)
    manifest_path = root / "registry.json"
    if not manifest_path.exists():
        raise RegistryReadError(f"not a registry directory: {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RegistryReadError(f"corrupt registry manifest: {exc}") from exc
    if manifest.get("format") != FORMAT:
        raise RegistryReadError(
            f"unrecognized registry format {manifest.get('format')!r}")
    templates = manifest.get("templates", [])
    stimuli, seen = [], set()
    for entry in manifest["sets"]:
        if entry["modality"] == "image":
            items = _image_items(entry, root, check_hashes)
        else:
            items = _text_items(entry, templates)
        for item in items:
            if item.id in seen:
                raise RegistryReadError(f"duplicate stimulus id {item.id!r}")
            seen.add(item.id)
            stimuli.append(item)
    return stimuli
