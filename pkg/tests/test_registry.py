from collections import Counter

import pytest

from xmeat import stimulus_data as data
from xmeat.registry import (RegistryError, build_test_suite,
                            default_manifest, expand_templates, load_registry,
                            select_top_valence, write_registry)


class TestSelectTopValence:
    def test_two_element_extremes(self):
        assert select_top_valence([("a", 0.9), ("b", 0.1)], 1) == (["a"], ["b"])

    def test_matches_sort_oracle(self):
        import random
        rng = random.Random(5)
        rows = [(f"w{i}", rng.random()) for i in range(10)]
        pleasant, unpleasant = select_top_valence(rows, 3)
        ordered = sorted(rows, key=lambda r: -r[1])
        assert pleasant == [t for t, _ in ordered[:3]]
        assert unpleasant == [t for t, _ in reversed(ordered[-3:])]
        assert not set(pleasant) & set(unpleasant)

    def test_ties_broken_lexicographically(self):
        rows = [("b", 0.5), ("a", 0.5), ("c", 0.1), ("d", 0.1)]
        pleasant, unpleasant = select_top_valence(rows, 1)
        assert pleasant == ["a"]
        assert unpleasant == ["c"]

    def test_lexicon_too_small(self):
        with pytest.raises(RegistryError, match="lexicon too small"):
            select_top_valence([("a", 0.5)], 1)

    def test_nan_rating_rejected(self):
        with pytest.raises(RegistryError, match="invalid rating"):
            select_top_valence([("a", float("nan")), ("b", 0.1)], 1)

    def test_shipped_controlled_lists_start_as_published(self):
        assert data.CONTROLLED_PLEASANT[:3] == ["very positive", "enjoyable",
                                                "generous"]
        assert data.CONTROLLED_UNPLEASANT[:3] == ["shit", "nightmare", "toxic"]
        assert len(data.CONTROLLED_PLEASANT) == 25
        assert len(data.CONTROLLED_UNPLEASANT) == 25


class TestExpandTemplates:
    def test_25_by_6_gives_150(self):
        items = expand_templates(data.CONTROLLED_PLEASANT, data.TEMPLATES)
        assert len(items) == 150
        assert len({it.id for it in items}) == 150

    def test_substitution(self):
        items = expand_templates(["love"], ["This is the word [WORD]"])
        assert items[0].payload == "This is the word love"

    def test_empty_words(self):
        assert expand_templates([], data.TEMPLATES) == []

    def test_word_major_order(self):
        items = expand_templates(["a", "b"], ["x [WORD]", "y [WORD]"])
        assert [it.payload for it in items] == ["x a", "y a", "x b", "y b"]

    def test_malformed_template(self):
        with pytest.raises(RegistryError, match="malformed template"):
            expand_templates(["a"], ["no placeholder"])
        with pytest.raises(RegistryError, match="malformed template"):
            expand_templates(["a"], ["[WORD] twice [WORD]"])


class TestBuildTestSuite:
    def test_counts_by_modality_combo(self, suite):
        counts = Counter(s.modality_combo for s in suite)
        assert counts == {"all_image": 5, "all_text": 8,
                          "image_as_target": 5, "text_as_target": 8}
        assert len(suite) == 26

    def test_each_category_in_four_combos(self, suite):
        combos = {}
        for s in suite:
            combos.setdefault(s.category, set()).add(s.modality_combo)
        assert all(len(v) == 4 for v in combos.values())

    def test_deterministic(self, registry):
        assert build_test_suite(registry) == build_test_suite(registry)

    def test_variant_swap_changes_only_attrs(self, suite, classic_suite):
        for ctl, cls in zip(suite, classic_suite):
            assert (ctl.test_id, ctl.X, ctl.Y) == (cls.test_id, cls.X, cls.Y)
            assert ctl.A != cls.A and ctl.B != cls.B

    def test_missing_set_names_gap(self, tmp_path):
        manifest = default_manifest()
        manifest["sets"] = [s for s in manifest["sets"]
                            if s["name"] != "target:age:image:first"]
        write_registry(tmp_path, manifest, placeholder_images=True)
        reg = load_registry(tmp_path)
        with pytest.raises(RegistryError, match="age/image/target"):
            build_test_suite(reg)

    def test_controlled_attr_sizes(self, registry):
        for pole in ("first", "second"):
            assert len(registry.set(f"attr:controlled_attr:text:{pole}")) == 150
            assert len(registry.set(f"attr:controlled_attr:image:{pole}")) == 25


class TestRegistryValidation:
    def test_unique_ids(self, registry):
        assert len(registry.items) == len(set(registry.items))

    def test_image_hash_mismatch_detected(self, tmp_path):
        write_registry(tmp_path, placeholder_images=True)
        victim = next((tmp_path / "images").rglob("*.png"))
        victim.write_bytes(b"corrupted")
        with pytest.raises(RegistryError, match="hash mismatch"):
            load_registry(tmp_path)

    def test_missing_image_detected(self, tmp_path):
        write_registry(tmp_path, placeholder_images=True)
        victim = next((tmp_path / "images").rglob("*.png"))
        victim.unlink()
        with pytest.raises(RegistryError, match="missing"):
            load_registry(tmp_path)

    def test_wrong_controlled_size_rejected(self, tmp_path):
        manifest = default_manifest()
        for s in manifest["sets"]:
            if s["name"] == "attr:controlled_attr:text:first":
                s["items"] = s["items"][:10]
        write_registry(tmp_path, manifest, placeholder_images=True)
        with pytest.raises(RegistryError, match="expected 150"):
            load_registry(tmp_path)

    def test_spec_invariant_checks(self, registry, suite):
        # every spec passes pole/modality/balance invariants via resolve
        for spec in suite:
            X, Y, A, B = registry.resolve_sets(spec)
            assert X.modality == Y.modality
            assert A.modality == B.modality
            assert len(X) == len(Y)
            assert X.pole == "first" and A.pole == "first"

    def test_attributes_carry_no_category(self, registry):
        for item in registry.items.values():
            if item.role == "attribute":
                assert item.category is None
