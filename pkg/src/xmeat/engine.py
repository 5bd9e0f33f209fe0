"""Association scores, effect sizes, and permutation significance.

All four modality combinations run through the same code path: by the
time vectors are resolved from a bundle, modality no longer matters.
Embeddings are L2-normalized once at resolution time; cosine between
unit vectors is then a plain dot product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

EXACT_LIMIT = 200_000  # enumerate all C(2n, n) splits up to this many


class EngineError(ValueError):
    """Degenerate inputs to an association test."""


@dataclass(frozen=True)
class PermutationMode:
    kind: str  # "exact" | "monte_carlo"
    seed: int | None = None
    n_samples: int | None = None

    def label(self):
        if self.kind == "exact":
            return "exact"
        return f"monte_carlo(seed={self.seed}, n_samples={self.n_samples})"


@dataclass(frozen=True)
class EatResult:
    model_id: str
    test_id: str
    d: float
    p_value: float
    n_targets_per_side: int
    n_attrs_per_side: int
    permutation_mode: str
    category: str = ""
    modality_combo: str = ""
    attr_variant: str = ""


def _norms(mat):
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=-1)
    if np.any(norms == 0.0):
        raise EngineError("degenerate embedding (zero norm)")
    return mat, norms


def cosine(u, v):
    """Cosine similarity, clamped to [-1, 1] against rounding drift."""
    u, nu = _norms(u)
    v, nv = _norms(v)
    if u.shape != v.shape:
        raise EngineError("dimension mismatch")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def normalize_rows(mat):
    mat, norms = _norms(np.atleast_2d(mat))
    return mat / norms[:, None]


def association_scores(W, A, B):
    """Per-target association s: mean cosine to A minus mean cosine to B.

    W, A, B are row-stacked vectors; returns one score per row of W,
    each in [-2, 2].
    """
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EngineError("empty attribute set")
    Wn, An, Bn = normalize_rows(W), normalize_rows(A), normalize_rows(B)
    cos_a = np.clip(Wn @ An.T, -1.0, 1.0)
    cos_b = np.clip(Wn @ Bn.T, -1.0, 1.0)
    return cos_a.mean(axis=1) - cos_b.mean(axis=1)


def association(w, A, B):
    """Association score for a single target vector."""
    return float(association_scores(np.atleast_2d(w), A, B)[0])


def _effect_size_from_scores(s_x, s_y, ddof=0):
    # fsum is correctly rounded, hence order-independent: swapping the
    # target sides or the attribute sets negates d exactly.
    pooled = list(s_x) + list(s_y)
    n = len(pooled)
    mean = math.fsum(pooled) / n
    ss = math.fsum((v - mean) ** 2 for v in pooled)
    sd = math.sqrt(ss / (n - ddof))
    if sd == 0.0:
        raise EngineError("degenerate test (constant associations)")
    num = math.fsum(s_x) / len(s_x) - math.fsum(s_y) / len(s_y)
    return num / sd


def effect_size(X, Y, A, B, ddof=0):
    """Standardized mean difference of associations between X and Y.

    (mean_x s - mean_y s) / std over the pooled targets; population
    standard deviation by default (ddof=0).  With |X| = |Y| this is
    bounded by 2 in magnitude.
    """
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if X.shape[0] < 2 or Y.shape[0] < 2:
        raise EngineError("need at least two targets per side")
    s_x = association_scores(X, A, B)
    s_y = association_scores(Y, A, B)
    return float(_effect_size_from_scores(s_x, s_y, ddof=ddof))


def _perm_pvalue_from_scores(s_x, s_y, mode: PermutationMode):
    s = np.concatenate([s_x, s_y])
    n = len(s_x)
    t_obs = s_x.sum() - s_y.sum()
    total = s.sum()
    tol = 1e-12 * (1.0 + abs(t_obs))
    if mode.kind == "exact":
        n_perm = math.comb(2 * n, n)
        idx = np.fromiter(
            (i for c in combinations(range(2 * n), n) for i in c),
            dtype=np.intp, count=n_perm * n).reshape(n_perm, n)
        t_perm = 2.0 * s[idx].sum(axis=1) - total
        return int((t_perm >= t_obs - tol).sum()) / n_perm
    rng = np.random.default_rng(mode.seed)
    N = mode.n_samples
    order = np.argsort(rng.random((N, 2 * n)), axis=1)[:, :n]
    t_perm = 2.0 * s[order].sum(axis=1) - total
    return (1 + int((t_perm >= t_obs - tol).sum())) / (1 + N)


def resolve_mode(n, mode="auto", seed=None, n_samples=10_000):
    """Pick exact enumeration when C(2n, n) is small enough."""
    if isinstance(mode, PermutationMode):
        return mode
    if mode == "exact":
        if math.comb(2 * n, n) > EXACT_LIMIT:
            raise EngineError(
                f"exact enumeration infeasible for {n} targets per side "
                f"({math.comb(2 * n, n)} splits); use monte_carlo or auto")
        return PermutationMode("exact")
    if mode == "monte_carlo":
        if seed is None:
            raise EngineError("Monte Carlo permutation mode requires a seed")
        return PermutationMode("monte_carlo", seed=seed, n_samples=n_samples)
    if mode == "auto":
        if math.comb(2 * n, n) <= EXACT_LIMIT:
            return PermutationMode("exact")
        if seed is None:
            raise EngineError("Monte Carlo permutation mode requires a seed")
        return PermutationMode("monte_carlo", seed=seed, n_samples=n_samples)
    raise EngineError(f"unknown permutation mode {mode!r}")


def permutation_p(X, Y, A, B, mode="auto", seed=None, n_samples=10_000):
    """One-sided p-value for the target-sum statistic under equal splits.

    The statistic is T = sum_x s(x) - sum_y s(y); exact mode enumerates
    all C(2n, n) equal repartitions of the pooled targets, Monte Carlo
    uses seeded sampling with p = (1 + #{T_perm >= T_obs}) / (1 + N).
    """
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if X.shape[0] != Y.shape[0]:
        raise EngineError("unbalanced targets")
    mode = resolve_mode(X.shape[0], mode, seed=seed, n_samples=n_samples)
    s_x = association_scores(X, A, B)
    s_y = association_scores(Y, A, B)
    return float(_perm_pvalue_from_scores(s_x, s_y, mode))


def run_test(spec, bundle, registry, mode="auto", seed=None,
             n_samples=10_000, ddof=0) -> EatResult:
    """Run one test spec against one bundle.

    Resolves stimulus ids to vectors (unit-normalizing each), then
    computes the effect size and permutation p-value.
    """
    Xs, Ys, As, Bs = registry.resolve_sets(spec)

    def mat(stim_set):
        return np.stack([np.asarray(bundle.vector(i), dtype=float)
                         for i in stim_set.ids])

    X, Y, A, B = mat(Xs), mat(Ys), mat(As), mat(Bs)
    if X.shape[0] != Y.shape[0]:
        raise EngineError("unbalanced targets")
    pmode = resolve_mode(X.shape[0], mode, seed=seed, n_samples=n_samples)
    s_x = association_scores(X, A, B)
    s_y = association_scores(Y, A, B)
    d = float(_effect_size_from_scores(s_x, s_y, ddof=ddof))
    p = float(_perm_pvalue_from_scores(s_x, s_y, pmode))
    return EatResult(
        model_id=bundle.model_id, test_id=spec.test_id, d=d, p_value=p,
        n_targets_per_side=X.shape[0],
        n_attrs_per_side=A.shape[0],
        permutation_mode=pmode.label(),
        category=spec.category, modality_combo=spec.modality_combo,
        attr_variant=spec.attr_variant)
