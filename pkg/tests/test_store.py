import numpy as np
import pytest

from xmeat.store import (BundleError, EmbeddingBundle, coverage_check,
                         read_bundle, write_bundle)


def small_bundle(dim=4, ids=("s1", "s2"), model_id="m"):
    rng = np.random.default_rng(0)
    rows = {i: rng.normal(size=dim).astype(np.float32) for i in ids}
    return EmbeddingBundle(model_id=model_id, dim=dim, rows=rows)


class TestRoundTrip:
    def test_payload_size_arithmetic(self, tmp_path):
        write_bundle(small_bundle(dim=4, ids=("a", "b")), tmp_path)
        assert (tmp_path / "vectors.bin").stat().st_size == 2 * 4 * 4

    @pytest.mark.parametrize("dim,n", [(4, 2), (1, 1), (64, 7)])
    def test_bit_exact_round_trip(self, tmp_path, dim, n):
        bundle = small_bundle(dim=dim, ids=tuple(f"id{i}" for i in range(n)))
        write_bundle(bundle, tmp_path)
        back = read_bundle(tmp_path)
        assert back.model_id == bundle.model_id
        assert back.dim == bundle.dim
        assert list(back.rows) == list(bundle.rows)
        for sid in bundle.rows:
            assert back.rows[sid].tobytes() == \
                bundle.rows[sid].astype("<f4").tobytes()

    def test_meta_round_trip(self, tmp_path):
        b = small_bundle()
        b.meta = {"encoder": "test", "note": 1}
        write_bundle(b, tmp_path)
        assert read_bundle(tmp_path).meta == b.meta


class TestValidation:
    def test_mismatched_vector_length(self, tmp_path):
        b = small_bundle()
        b.rows["bad"] = np.zeros(3, dtype=np.float32)
        with pytest.raises(BundleError, match="invalid bundle"):
            write_bundle(b, tmp_path)

    def test_non_finite_rejected(self, tmp_path):
        b = small_bundle()
        b.rows["s1"] = np.array([1, np.nan, 0, 0], dtype=np.float32)
        with pytest.raises(BundleError, match="invalid bundle"):
            write_bundle(b, tmp_path)

    def test_corrupt_manifest(self, tmp_path):
        write_bundle(small_bundle(), tmp_path)
        (tmp_path / "manifest").write_text("{not json")
        with pytest.raises(BundleError, match="corrupt manifest"):
            read_bundle(tmp_path)

    def test_single_byte_corruption_detected(self, tmp_path):
        # property: flipping any single payload byte trips the checksum
        write_bundle(small_bundle(dim=8, ids=("a", "b", "c")), tmp_path)
        payload = bytearray((tmp_path / "vectors.bin").read_bytes())
        rng = np.random.default_rng(42)
        for _ in range(25):
            pos = int(rng.integers(len(payload)))
            corrupted = bytearray(payload)
            corrupted[pos] ^= 0xFF
            (tmp_path / "vectors.bin").write_bytes(bytes(corrupted))
            with pytest.raises(BundleError, match="checksum failure"):
                read_bundle(tmp_path)

    def test_truncated_payload(self, tmp_path):
        write_bundle(small_bundle(), tmp_path)
        data = (tmp_path / "vectors.bin").read_bytes()
        (tmp_path / "vectors.bin").write_bytes(data[:-4])
        with pytest.raises(BundleError):
            read_bundle(tmp_path)


class TestCoverage:
    def test_full_coverage(self, registry, suite, bundle_a):
        rep = coverage_check(bundle_a, suite, registry)
        assert rep.n_runnable == 26

    def test_missing_image_id_flags_exactly_its_tests(self, registry, suite,
                                                      bundle_a):
        victim = next(i for i in bundle_a.rows
                      if i.startswith("target:age:image:first"))
        rows = {k: v for k, v in bundle_a.rows.items() if k != victim}
        partial = EmbeddingBundle(model_id="p", dim=bundle_a.dim, rows=rows)
        rep = coverage_check(partial, suite, registry)
        # oracle: set difference over the resolved id lists
        expect_flagged = set()
        for spec in suite:
            ids = [i for s in registry.resolve_sets(spec) for i in s.ids]
            if victim in ids:
                expect_flagged.add(spec.test_id)
        flagged = {tid for tid, miss in rep.missing.items() if miss}
        assert flagged == expect_flagged
        assert all(miss == [victim] for tid, miss in rep.missing.items()
                   if tid in flagged)

    def test_empty_bundle(self, registry, suite):
        empty = EmbeddingBundle(model_id="e", dim=4, rows={})
        rep = coverage_check(empty, suite, registry)
        assert rep.n_runnable == 0
