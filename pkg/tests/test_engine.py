import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance
from xmeat.engine import (EngineError, association,
                          association_scores, cosine, effect_size,
                          permutation_p, run_test)
from xmeat.registry import EatTestSpec


# --- independent oracles -------------------------------------------------

def cosine_oracle(u, v):
    # extended-precision dot products via mpmath
    import mpmath
    mpmath.mp.dps = 50
    dot = mpmath.fsum(mpmath.mpf(float(a)) * mpmath.mpf(float(b))
                      for a, b in zip(u, v))
    nu = mpmath.sqrt(mpmath.fsum(mpmath.mpf(float(a)) ** 2 for a in u))
    nv = mpmath.sqrt(mpmath.fsum(mpmath.mpf(float(b)) ** 2 for b in v))
    return float(dot / (nu * nv))


def association_oracle(w, A, B):
    # naive double loop, no vectorization
    sa = sum(cosine_oracle(w, a) for a in A) / len(A)
    sb = sum(cosine_oracle(w, b) for b in B) / len(B)
    return sa - sb


def effect_size_oracle(X, Y, A, B):
    # written from scratch: plain python means and population std-dev
    s_x = [association_oracle(x, A, B) for x in X]
    s_y = [association_oracle(y, A, B) for y in Y]
    pooled = s_x + s_y
    mean = sum(pooled) / len(pooled)
    sd = math.sqrt(sum((v - mean) ** 2 for v in pooled) / len(pooled))
    return (sum(s_x) / len(s_x) - sum(s_y) / len(s_y)) / sd


def exact_permutation_oracle(X, Y, A, B):
    # exhaustive enumeration using plain python sums
    s = [association_oracle(w, A, B) for w in np.vstack([X, Y])]
    n = len(X)
    t_obs = sum(s[:n]) - sum(s[n:])
    count = total = 0
    for idx in combinations(range(2 * n), n):
        rest = [i for i in range(2 * n) if i not in idx]
        t = sum(s[i] for i in idx) - sum(s[i] for i in rest)
        total += 1
        if t >= t_obs - 1e-12:
            count += 1
    return count / total


# --- cosine --------------------------------------------------------------

class TestCosine:
    def test_identity(self):
        v = np.array([1.0, 2.0, -3.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal(self):
        assert cosine([1, 0, 0], [0, 1, 0]) == 0.0

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            u, v = rng.normal(size=8), rng.normal(size=8)
            assert cosine(u, v) == pytest.approx(cosine_oracle(u, v),
                                                 abs=1e-12)

    def test_zero_norm_rejected(self):
        with pytest.raises(EngineError, match="degenerate embedding"):
            cosine([0, 0, 0], [1, 0, 0])

    def test_clamped(self):
        v = np.array([1e-8, 1.0])
        assert -1.0 <= cosine(v, v) <= 1.0


class TestAssociation:
    def test_identical_attribute_sets_give_zero(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(4, 5))
        w = rng.normal(size=5)
        assert association(w, A, A) == pytest.approx(0.0, abs=1e-15)

    def test_antipodal_extreme(self):
        w = np.array([1.0, 2.0, 3.0])
        assert association(w, [w], [-w]) == pytest.approx(2.0, abs=1e-12)

    def test_matches_naive_loop_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = rng.normal(size=5)
            A = rng.normal(size=(3, 5))
            B = rng.normal(size=(4, 5))
            assert association(w, A, B) == pytest.approx(
                association_oracle(w, A, B), abs=1e-12)

    def test_empty_attribute_set(self):
        with pytest.raises(EngineError, match="empty attribute set"):
            association([1.0, 0.0], np.zeros((0, 2)), [[0.0, 1.0]])

    def test_bounded_by_two(self):
        rng = np.random.default_rng(4)
        W = rng.normal(size=(50, 6))
        A, B = rng.normal(size=(5, 6)), rng.normal(size=(5, 6))
        s = association_scores(W, A, B)
        assert np.all(np.abs(s) <= 2.0)


class TestEffectSize:
    def test_constant_associations_rejected(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=5)
        X = np.tile(v, (4, 1))
        A, B = rng.normal(size=(3, 5)), rng.normal(size=(3, 5))
        with pytest.raises(EngineError, match="degenerate test"):
            effect_size(X, X.copy(), A, B)

    def test_elementwise_equal_sides_give_zero(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(4, 5))
        A, B = rng.normal(size=(3, 5)), rng.normal(size=(4, 5))
        assert effect_size(X, X.copy(), A, B) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(7)
        X, Y, A, B = random_instance(rng, n_targets=4, n_attrs=5, dim=6)
        d = effect_size(X, Y, A, B)
        assert effect_size(Y, X, A, B) == -d
        assert effect_size(X, Y, B, A) == -d

    def test_matches_independent_oracle(self):
        rng = np.random.default_rng(8)
        X, Y, A, B = (rng.normal(size=(4, 5)), rng.normal(size=(4, 5)),
                      rng.normal(size=(6, 5)), rng.normal(size=(6, 5)))
        assert effect_size(X, Y, A, B) == pytest.approx(
            effect_size_oracle(X, Y, A, B), abs=1e-10)

    def test_sample_sd_flag(self):
        rng = np.random.default_rng(9)
        X, Y, A, B = random_instance(rng, n_targets=4, n_attrs=5, dim=6)
        d0 = effect_size(X, Y, A, B, ddof=0)
        d1 = effect_size(X, Y, A, B, ddof=1)
        assert d1 == pytest.approx(d0 * math.sqrt(7 / 8), rel=1e-12)


class TestPermutation:
    def test_exact_denominator_20(self):
        rng = np.random.default_rng(10)
        X, Y, A, B = random_instance(rng, n_targets=3, n_attrs=4, dim=5)
        p = permutation_p(X, Y, A, B, mode="exact")
        assert (p * 20) == pytest.approx(round(p * 20), abs=1e-9)
        assert 0 < p <= 1

    def test_planted_extreme_is_1_over_70(self):
        # X aligned with pleasant pole, Y with unpleasant: observed split
        # is the unique maximum over all C(8,4)=70 repartitions
        dim = 6
        axis = np.zeros(dim)
        axis[0] = 1.0
        rng = np.random.default_rng(11)
        jitter = lambda n, c: c * axis + 0.01 * rng.normal(size=(n, dim))
        X, Y = jitter(4, 3.0), jitter(4, -3.0)
        A, B = jitter(5, 3.0), jitter(5, -3.0)
        assert permutation_p(X, Y, A, B, mode="exact") == pytest.approx(1 / 70)

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            X, Y, A, B = random_instance(rng, n_targets=4, n_attrs=4, dim=5)
            p = permutation_p(X, Y, A, B, mode="exact")
            assert p == pytest.approx(exact_permutation_oracle(X, Y, A, B))

    def test_monte_carlo_deterministic_under_seed(self):
        rng = np.random.default_rng(13)
        X, Y, A, B = random_instance(rng, n_targets=5, n_attrs=4, dim=5)
        p1 = permutation_p(X, Y, A, B, mode="monte_carlo", seed=9,
                           n_samples=2000)
        p2 = permutation_p(X, Y, A, B, mode="monte_carlo", seed=9,
                           n_samples=2000)
        assert p1 == p2

    def test_unbalanced_targets_rejected(self):
        rng = np.random.default_rng(14)
        with pytest.raises(EngineError, match="unbalanced targets"):
            permutation_p(rng.normal(size=(3, 4)), rng.normal(size=(4, 4)),
                          rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))

    def test_monte_carlo_requires_seed(self):
        rng = np.random.default_rng(15)
        X, Y, A, B = random_instance(rng, n_targets=3, n_attrs=3, dim=4)
        with pytest.raises(EngineError, match="requires a seed"):
            permutation_p(X, Y, A, B, mode="monte_carlo")


class TestRunTest:
    def planted_bundle_and_spec(self, registry, bundle_a, strength=4.0):
        # overwrite one test's vectors with tightly clustered structure
        import copy
        from xmeat.store import EmbeddingBundle
        spec = EatTestSpec(
            test_id="flower_insect:all_image", category="flower_insect",
            modality_combo="all_image",
            X="target:flower_insect:image:first",
            Y="target:flower_insect:image:second",
            A="attr:controlled_attr:image:first",
            B="attr:controlled_attr:image:second",
            attr_variant="controlled")
        rng = np.random.default_rng(16)
        dim = bundle_a.dim
        axis = np.zeros(dim)
        axis[0] = 1.0
        rows = dict(bundle_a.rows)
        for name, sign in ((spec.X, 1), (spec.Y, -1), (spec.A, 1),
                           (spec.B, -1)):
            for sid in registry.set(name).ids:
                rows[sid] = (sign * strength * axis
                             + 0.05 * rng.normal(size=dim)).astype(np.float32)
        return EmbeddingBundle(model_id="planted", dim=dim, rows=rows), spec

    def test_planted_structure_gives_d_near_2(self, registry, bundle_a):
        bundle, spec = self.planted_bundle_and_spec(registry, bundle_a)
        res = run_test(spec, bundle, registry, mode="exact")
        assert res.d > 1.9
        assert res.p_value == pytest.approx(1 / math.comb(16, 8))

    def test_swapped_targets_negate_d(self, registry, bundle_a):
        bundle, spec = self.planted_bundle_and_spec(registry, bundle_a)
        swapped = EatTestSpec(
            test_id=spec.test_id, category=spec.category,
            modality_combo=spec.modality_combo, X=spec.Y, Y=spec.X,
            A=spec.A, B=spec.B, attr_variant=spec.attr_variant)
        d = run_test(spec, bundle, registry, mode="exact").d
        d_swapped = run_test(swapped, bundle, registry, mode="exact").d
        assert d_swapped == pytest.approx(-d, abs=0)

    def test_scale_invariance(self, registry, bundle_a, suite):
        from xmeat.store import EmbeddingBundle
        spec = suite[0]
        res = run_test(spec, bundle_a, registry, mode="exact")
        rng = np.random.default_rng(17)
        # power-of-two scales keep the float arithmetic exactly invariant
        scaled_rows = {sid: v * float(2.0 ** rng.integers(-3, 4))
                       for sid, v in bundle_a.rows.items()}
        scaled = EmbeddingBundle(model_id="scaled", dim=bundle_a.dim,
                                 rows=scaled_rows)
        res2 = run_test(spec, scaled, registry, mode="exact")
        assert res2.d == res.d
        assert res2.p_value == res.p_value

    def test_result_provenance_fields(self, registry, bundle_a, suite):
        res = run_test(suite[0], bundle_a, registry, mode="exact")
        assert res.model_id == "model_a"
        assert res.category == suite[0].category
        assert res.permutation_mode == "exact"
        assert res.n_targets_per_side == 8


class TestProperties:
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_bound_and_antisymmetry(self, seed):
        rng = np.random.default_rng(seed)
        X, Y, A, B = random_instance(rng)
        try:
            d = effect_size(X, Y, A, B)
        except EngineError:
            return
        assert abs(d) <= 2.0 + 1e-12
        assert effect_size(Y, X, A, B) == -d

    @given(st.integers(min_value=0, max_value=2**32 - 1),
           st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=40, deadline=None)
    def test_positive_scaling_invariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        X, Y, A, B = random_instance(rng, n_targets=3, n_attrs=4)
        d = effect_size(X, Y, A, B)
        assert effect_size(X * scale, Y, A, B) == pytest.approx(d, abs=1e-10)
