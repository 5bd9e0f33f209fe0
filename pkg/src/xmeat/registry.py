"""Stimulus registry: items, sets, and the 26-test suite.

A registry is a directory containing a ``registry.json`` manifest plus an
``images/`` tree.  The manifest stores base word lists; text attribute
sets are expanded through the bleached templates at load time.  The
registry is immutable once loaded.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import stimulus_data as data

MODALITIES = ("text", "image")
ROLES = ("target", "attribute")
POLES = ("first", "second")
CATEGORIES = ("flower_insect", "instrument_weapon", "gender", "race", "age")
VARIANTS = ("names", "words", "image", "classic_attr", "controlled_attr")
MODALITY_COMBOS = ("all_image", "all_text", "image_as_target", "text_as_target")

# modality_combo -> (target modality, attribute modality)
COMBO_MODALITIES = {
    "all_image": ("image", "image"),
    "all_text": ("text", "text"),
    "image_as_target": ("image", "text"),
    "text_as_target": ("text", "image"),
}

PLACEHOLDER = "[WORD]"


class RegistryError(ValueError):
    """Invalid stimulus data or an incomplete registry."""


@dataclass(frozen=True)
class StimulusItem:
    id: str
    modality: str
    payload: str  # text string, or image path relative to the registry dir
    role: str
    pole: str
    category: str | None
    variant: str
    sha256: str | None = None  # content hash, image items only

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise RegistryError(f"unknown modality {self.modality!r}")
        if self.role not in ROLES:
            raise RegistryError(f"unknown role {self.role!r}")
        if self.pole not in POLES:
            raise RegistryError(f"unknown pole {self.pole!r}")
        if self.category is not None and self.category not in CATEGORIES:
            raise RegistryError(f"unknown category {self.category!r}")
        if self.variant not in VARIANTS:
            raise RegistryError(f"unknown variant {self.variant!r}")
        if self.modality == "text" and not self.payload.strip():
            raise RegistryError(f"empty text payload for {self.id!r}")


@dataclass(frozen=True)
class StimulusSet:
    name: str
    items: tuple[StimulusItem, ...]
    pole: str
    modality: str
    role: str

    def __post_init__(self):
        for it in self.items:
            if it.modality != self.modality or it.role != self.role or it.pole != self.pole:
                raise RegistryError(
                    f"set {self.name!r}: item {it.id!r} does not share the "
                    f"set's modality/role/pole"
                )

    @property
    def ids(self):
        return [it.id for it in self.items]

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class EatTestSpec:
    """One association test: targets X/Y vs. valence attributes A/B.

    X is the stereotype-congruent-positive target group and A the
    pleasant attribute set, so positive effect sizes mean human-congruent
    bias.  Set fields are registry set names.
    """
    test_id: str
    category: str
    modality_combo: str
    X: str
    Y: str
    A: str
    B: str
    attr_variant: str  # "classic" | "controlled"


def select_top_valence(lexicon_rows, k):
    """Pick the k most and k least pleasant terms from valence ratings.

    Args:
        lexicon_rows: iterable of (term, valence) with valence in [0, 1].
        k: number of terms per pole.

    Returns:
        (pleasant, unpleasant) term lists, each of length k, disjoint.
        Ties are broken by lexicographic term order for determinism.
    """
    rows = list(lexicon_rows)
    if k <= 0:
        raise RegistryError("k must be positive")
    if not rows or k > len(rows) // 2:
        raise RegistryError("lexicon too small")
    for term, val in rows:
        if not math.isfinite(val):
            raise RegistryError(f"invalid rating for {term!r}")
    by_high = sorted(rows, key=lambda r: (-r[1], r[0]))
    by_low = sorted(rows, key=lambda r: (r[1], r[0]))
    pleasant = [t for t, _ in by_high[:k]]
    unpleasant = [t for t, _ in by_low[:k]]
    return pleasant, unpleasant


def expand_templates(words, templates, *, pole="first", variant="controlled_attr",
                     category=None, id_prefix="attr"):
    """Expand each word through each bleached template (word-major order).

    Returns |words| x |templates| text StimulusItems whose payloads are the
    templates with the placeholder substituted.
    """
    for tpl in templates:
        if tpl.count(PLACEHOLDER) != 1:
            raise RegistryError(f"malformed template: {tpl!r}")
    items = []
    for word in words:
        slug = data.slugify(word)
        for j, tpl in enumerate(templates):
            items.append(StimulusItem(
                id=f"{id_prefix}/{slug}/t{j}",
                modality="text",
                payload=tpl.replace(PLACEHOLDER, word),
                role="attribute",
                pole=pole,
                category=category,
                variant=variant,
            ))
    return items


class Registry:
    """Immutable collection of stimulus sets plus the template list."""

    def __init__(self, sets, templates, root=None, content_hash=None):
        self.templates = list(templates)
        self.sets = {}
        self.items = {}
        self.root = Path(root) if root is not None else None
        self.content_hash = content_hash
        for s in sets:
            if s.name in self.sets:
                raise RegistryError(f"duplicate set name {s.name!r}")
            self.sets[s.name] = s
            for it in s.items:
                if it.id in self.items:
                    raise RegistryError(f"duplicate stimulus id {it.id!r}")
                self.items[it.id] = it

    def set(self, name):
        if name not in self.sets:
            raise RegistryError(f"incomplete registry: missing set {name!r}")
        return self.sets[name]

    def resolve_sets(self, spec: EatTestSpec):
        """Return the (X, Y, A, B) StimulusSets for a test spec."""
        return (self.set(spec.X), self.set(spec.Y),
                self.set(spec.A), self.set(spec.B))

    def all_ids(self):
        return list(self.items)


def _target_set_name(category, variant, pole):
    return f"target:{category}:{variant}:{pole}"


def _attr_set_name(attr_variant, modality, pole):
    return f"attr:{attr_variant}:{modality}:{pole}"


def _check_spec(registry, spec):
    X, Y, A, B = registry.resolve_sets(spec)
    tmod, amod = COMBO_MODALITIES[spec.modality_combo]
    if X.modality != Y.modality or X.modality != tmod:
        raise RegistryError(f"{spec.test_id}: target modality mismatch")
    if A.modality != B.modality or A.modality != amod:
        raise RegistryError(f"{spec.test_id}: attribute modality mismatch")
    if len(X) != len(Y):
        raise RegistryError(f"{spec.test_id}: |X| != |Y|")
    if X.pole != "first" or Y.pole != "second" or A.pole != "first" or B.pole != "second":
        raise RegistryError(f"{spec.test_id}: pole ordering violated")


# Text-target variants per category for the eight all-text tests: the two
# non-human categories have word stimuli only; human categories have both
# name and word stimuli.
TEXT_TARGET_VARIANTS = {
    "flower_insect": ("words",),
    "instrument_weapon": ("words",),
    "gender": ("names", "words"),
    "race": ("names", "words"),
    "age": ("names", "words"),
}


def build_test_suite(registry, attr_variant="controlled"):
    """Construct the 26 test specs (5 + 8 + 5 + 8 by modality combo).

    Raises RegistryError naming the gap if a required stimulus set is
    absent.  Construction is deterministic.
    """
    if attr_variant not in ("classic", "controlled"):
        raise RegistryError(f"unknown attribute variant {attr_variant!r}")
    avar = attr_variant + "_attr"

    def need(name, gap):
        if name not in registry.sets:
            raise RegistryError(f"incomplete registry: missing {gap} ({name})")
        return name

    specs = []
    for combo in MODALITY_COMBOS:
        tmod, amod = COMBO_MODALITIES[combo]
        A = need(_attr_set_name(avar, amod, "first"),
                 f"{attr_variant}/{amod}/attribute")
        B = need(_attr_set_name(avar, amod, "second"),
                 f"{attr_variant}/{amod}/attribute")
        for category in CATEGORIES:
            variants = ("image",) if tmod == "image" else TEXT_TARGET_VARIANTS[category]
            for tvar in variants:
                X = need(_target_set_name(category, tvar, "first"),
                         f"{category}/{tmod}/target")
                Y = need(_target_set_name(category, tvar, "second"),
                         f"{category}/{tmod}/target")
                test_id = f"{category}:{combo}"
                if tmod == "text" and len(TEXT_TARGET_VARIANTS[category]) > 1:
                    test_id += f":{tvar}"
                spec = EatTestSpec(
                    test_id=test_id, category=category, modality_combo=combo,
                    X=X, Y=Y, A=A, B=B, attr_variant=attr_variant,
                )
                _check_spec(registry, spec)
                specs.append(spec)
    assert len(specs) == 26
    return specs


# ---------------------------------------------------------------------------
# Manifest I/O


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest_hash(manifest):
    canon = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _text_set_entry(name, words, role, pole, category, variant, expand):
    return {
        "name": name, "modality": "text", "role": role, "pole": pole,
        "category": category, "variant": variant, "expand_templates": expand,
        "items": list(words),
    }


def _image_set_entry(name, paths, role, pole, category, variant):
    return {
        "name": name, "modality": "image", "role": role, "pole": pole,
        "category": category, "variant": variant, "expand_templates": False,
        "items": [{"path": p} for p in paths],
    }


def default_manifest():
    """Manifest for the shipped stimulus data (hashes unset)."""
    sets = []
    word_targets = {
        ("flower_insect", "words"): (data.FLOWERS, data.INSECTS),
        ("instrument_weapon", "words"): (data.INSTRUMENTS, data.WEAPONS),
        ("gender", "names"): (data.WOMEN_NAMES, data.MEN_NAMES),
        ("gender", "words"): (data.WOMEN_WORDS, data.MEN_WORDS),
        ("race", "names"): (data.EUROPEAN_AMERICAN_NAMES, data.AFRICAN_AMERICAN_NAMES),
        ("race", "words"): (data.EUROPEAN_AMERICAN_WORDS, data.AFRICAN_AMERICAN_WORDS),
        ("age", "names"): (data.YOUNG_NAMES, data.OLD_NAMES),
        ("age", "words"): (data.YOUNG_WORDS, data.OLD_WORDS),
    }
    for (category, variant), (first, second) in word_targets.items():
        for pole, words in (("first", first), ("second", second)):
            sets.append(_text_set_entry(
                _target_set_name(category, variant, pole), words,
                "target", pole, category, variant, expand=False))
    for category, (gdir1, gdir2, count) in data.IMAGE_TARGET_GROUPS.items():
        for pole, gdir in (("first", gdir1), ("second", gdir2)):
            paths = [f"images/{gdir}/{i:02d}.png" for i in range(count)]
            sets.append(_image_set_entry(
                _target_set_name(category, "image", pole), paths,
                "target", pole, category, "image"))
    attr_words = {
        ("classic_attr", "first"): data.CLASSIC_PLEASANT,
        ("classic_attr", "second"): data.CLASSIC_UNPLEASANT,
        ("controlled_attr", "first"): data.CONTROLLED_PLEASANT,
        ("controlled_attr", "second"): data.CONTROLLED_UNPLEASANT,
    }
    for (variant, pole), words in attr_words.items():
        sets.append(_text_set_entry(
            _attr_set_name(variant, "text", pole), words,
            "attribute", pole, None, variant, expand=True))
    pdir, udir = data.CLASSIC_IMAGE_ATTR_DIRS
    for pole, gdir in (("first", pdir), ("second", udir)):
        paths = [f"images/{gdir}/{i:02d}.png"
                 for i in range(data.CLASSIC_IMAGE_ATTR_COUNT)]
        sets.append(_image_set_entry(
            _attr_set_name("classic_attr", "image", pole), paths,
            "attribute", pole, None, "classic_attr"))
    oasis = {
        "first": [data.oasis_path(n) for n in data.OASIS_PLEASANT],
        "second": [data.oasis_path(n) for n in data.OASIS_UNPLEASANT],
    }
    for pole, paths in oasis.items():
        sets.append(_image_set_entry(
            _attr_set_name("controlled_attr", "image", pole), paths,
            "attribute", pole, None, "controlled_attr"))
    return {"format": "xmeat-registry-v1", "templates": data.TEMPLATES,
            "sets": sets}


def _placeholder_png(seed_text):
    """Deterministic tiny PNG whose pixels derive from the text's hash."""
    import struct
    import zlib

    digest = hashlib.sha256(seed_text.encode("utf-8")).digest()
    size = 4
    raw = b""
    for y in range(size):
        raw += b"\x00"
        for x in range(size):
            k = (y * size + x) * 3
            raw += bytes(digest[(k + i) % len(digest)] for i in range(3))

    def chunk(tag, payload):
        out = struct.pack(">I", len(payload)) + tag + payload
        return out + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", size, size, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b""))


def write_registry(root, manifest=None, placeholder_images=False):
    """Materialize a registry directory from a manifest.

    With placeholder_images=True, deterministic 4x4 PNG stand-ins are
    generated for every referenced image path; otherwise the image files
    must already exist under root.  Content hashes are (re)computed from
    the files present.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest = json.loads(json.dumps(manifest or default_manifest()))
    for s in manifest["sets"]:
        if s["modality"] != "image":
            continue
        for entry in s["items"]:
            path = root / entry["path"]
            if placeholder_images and not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(_placeholder_png(entry["path"]))
            if not path.exists():
                raise RegistryError(f"image file missing: {entry['path']}")
            entry["sha256"] = file_sha256(path)
    out = root / "registry.json"
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    return out


def _items_from_set_entry(entry, templates):
    name = entry["name"]
    role, pole = entry["role"], entry["pole"]
    category, variant = entry["category"], entry["variant"]
    if entry["modality"] == "image":
        items = []
        for e in entry["items"]:
            slug = data.slugify(Path(e["path"]).with_suffix("").as_posix())
            items.append(StimulusItem(
                id=f"{name}/{slug}", modality="image", payload=e["path"],
                role=role, pole=pole, category=category, variant=variant,
                sha256=e.get("sha256")))
        return items
    words = entry["items"]
    if entry.get("expand_templates"):
        return expand_templates(words, templates, pole=pole, variant=variant,
                                category=category, id_prefix=name)
    return [StimulusItem(
        id=f"{name}/{data.slugify(w)}", modality="text", payload=w,
        role=role, pole=pole, category=category, variant=variant)
        for w in words]


def load_registry(root, check_images=True):
    """Load and validate a registry directory.

    Validates manifest structure, id uniqueness, set homogeneity, image
    existence and content hashes, and controlled-attribute set sizes.
    """
    root = Path(root)
    manifest_path = root / "registry.json"
    if not manifest_path.exists():
        raise RegistryError(f"no registry.json under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "xmeat-registry-v1":
        raise RegistryError("unrecognized registry format")
    templates = manifest["templates"]
    sets = []
    for entry in manifest["sets"]:
        items = _items_from_set_entry(entry, templates)
        sets.append(StimulusSet(
            name=entry["name"], items=tuple(items), pole=entry["pole"],
            modality=entry["modality"], role=entry["role"]))
    reg = Registry(sets, templates, root=root,
                   content_hash=_manifest_hash(manifest))
    if check_images:
        for it in reg.items.values():
            if it.modality != "image":
                continue
            path = root / it.payload
            if not path.exists():
                raise RegistryError(f"image file missing: {it.payload}")
            if it.sha256 and file_sha256(path) != it.sha256:
                raise RegistryError(f"image hash mismatch: {it.payload}")
    for name, s in reg.sets.items():
        if s.items and s.items[0].variant == "controlled_attr":
            want = 150 if s.modality == "text" else 25
            if len(s) != want:
                raise RegistryError(
                    f"controlled attribute set {name!r} has {len(s)} items, "
                    f"expected {want}")
    return reg
