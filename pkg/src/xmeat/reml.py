"""Linear mixed model fitting by restricted maximum likelihood.

The model is y = X beta + Z_j u_j + eps within each group j, with
u_j ~ N(0, G) and eps ~ N(0, sigma2 I).  Fixed effects are profiled out
via generalized least squares, and the REML objective is maximized over
the variance parameters with L-BFGS-B using an analytic gradient.

The variance parameterization is either "diagonal" (independent variance
components for the q random-effect columns) or "unstructured" (a full
q x q covariance via its Cholesky factor).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import norm

VAR_FLOOR = 1e-10


class MixedModelError(ValueError):
    """Ill-posed mixed-model input (rank deficiency, bad shapes)."""


class CovarianceParam:
    """Maps a flat parameter vector theta_g to (G, dG/dtheta_k)."""

    def __init__(self, kind, q):
        if kind not in ("diagonal", "unstructured"):
            raise MixedModelError(f"unknown covariance structure {kind!r}")
        self.kind = kind
        self.q = q
        self.n_params = q if kind == "diagonal" else q * (q + 1) // 2
        if kind == "unstructured":
            self._tril = np.tril_indices(q)

    def build(self, theta_g):
        q = self.q
        if self.kind == "diagonal":
            G = np.diag(theta_g)
            derivs = []
            for k in range(q):
                D = np.zeros((q, q))
                D[k, k] = 1.0
                derivs.append(D)
            return G, derivs
        L = np.zeros((q, q))
        L[self._tril] = theta_g
        G = L @ L.T
        derivs = []
        for a, b in zip(*self._tril):
            E = np.zeros((q, q))
            E[a, b] = 1.0
            D = E @ L.T
            derivs.append(D + D.T)
        return G, derivs

    def initial(self, scale):
        if self.kind == "diagonal":
            return np.full(self.q, scale)
        L0 = np.sqrt(scale) * np.eye(self.q)
        return L0[self._tril]

    # Optimizer works in a log-space for positive parameters (variances,
    # Cholesky diagonal); off-diagonal Cholesky entries stay linear.
    def to_opt(self, theta_g):
        if self.kind == "diagonal":
            return np.log(np.maximum(theta_g, VAR_FLOOR))
        x = np.array(theta_g, dtype=float)
        diag_pos = [i for i, (a, b) in enumerate(zip(*self._tril)) if a == b]
        x[diag_pos] = np.log(np.maximum(x[diag_pos], np.sqrt(VAR_FLOOR)))
        return x

    def from_opt(self, x):
        if self.kind == "diagonal":
            return np.exp(x)
        theta = np.array(x, dtype=float)
        diag_pos = [i for i, (a, b) in enumerate(zip(*self._tril)) if a == b]
        theta[diag_pos] = np.exp(theta[diag_pos])
        return theta

    def chain(self, theta_g):
        """d(theta)/d(opt-space coordinate), elementwise."""
        if self.kind == "diagonal":
            return np.array(theta_g, dtype=float)
        jac = np.ones(self.n_params)
        diag_pos = [i for i, (a, b) in enumerate(zip(*self._tril)) if a == b]
        jac[diag_pos] = np.asarray(theta_g, dtype=float)[diag_pos]
        return jac


@dataclass
class MixedModelFit:
    fixed_names: list[str]
    beta: np.ndarray
    se: np.ndarray
    wald_z: np.ndarray
    p_values: np.ndarray
    random_cov: np.ndarray  # estimated G
    random_variances: np.ndarray  # diag of G
    residual_variance: float
    reml_loglik: float
    converged: bool
    n_obs: int
    n_groups: int
    covariance: str
    warnings: list[str] = field(default_factory=list)

    def coefficient(self, name):
        return float(self.beta[self.fixed_names.index(name)])

    def summary_frame(self):
        import pandas as pd
        return pd.DataFrame({
            "term": self.fixed_names,
            "estimate": self.beta,
            "se": self.se,
            "z": self.wald_z,
            "p": self.p_values,
        })


def _group_slices(groups):
    groups = np.asarray(groups)
    labels = np.unique(groups)
    return [np.flatnonzero(groups == g) for g in labels]


def reml_value_and_grad(theta, X, y, Z, group_idx, cov: CovarianceParam):
    """REML log-likelihood and its gradient in natural parameter space.

    theta stacks the G parameters followed by the residual variance.
    group_idx is a list of row-index arrays, one per group.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n, p = X.shape
    theta_g, sigma2 = theta[:-1], theta[-1]
    G, dGs = cov.build(theta_g)
    n_par = len(theta)

    S = np.zeros((p, p))
    Xty = np.zeros(p)
    logdet = 0.0
    per_group = []
    for idx in group_idx:
        Xj, yj, Zj = X[idx], y[idx], Z[idx]
        nj = len(idx)
        Vj = sigma2 * np.eye(nj) + Zj @ G @ Zj.T
        try:
            c, low = cho_factor(Vj, lower=True)
        except np.linalg.LinAlgError as exc:
            raise MixedModelError(f"covariance not positive definite: {exc}")
        logdet += 2.0 * np.log(np.diag(c)).sum()
        Vinv = cho_solve((c, low), np.eye(nj))
        ViX = Vinv @ Xj
        S += Xj.T @ ViX
        Xty += ViX.T @ yj
        per_group.append((Xj, yj, Zj, Vinv, ViX))

    try:
        cS, lowS = cho_factor(S)
    except np.linalg.LinAlgError:
        raise MixedModelError("design not full rank")
    Sinv = cho_solve((cS, lowS), np.eye(p))
    beta = Sinv @ Xty
    logdet_S = 2.0 * np.log(np.diag(cS)).sum()

    quad = 0.0
    resid_parts = []
    for Xj, yj, Zj, Vinv, ViX in per_group:
        rj = yj - Xj @ beta
        ej = Vinv @ rj
        quad += rj @ ej
        resid_parts.append(ej)
    loglik = -0.5 * (logdet + logdet_S + quad + (n - p) * np.log(2.0 * np.pi))

    grad = np.zeros(n_par)
    for gi, (Xj, yj, Zj, Vinv, ViX) in enumerate(per_group):
        ej = resid_parts[gi]
        ZtVi = Zj.T @ Vinv          # q x nj
        Cj = ZtVi @ Zj              # Z' Vinv Z, q x q
        XtViZ = ViX.T @ Zj          # p x q
        Ztej = Zj.T @ ej            # q
        for k, dG in enumerate(dGs):
            tr1 = float(np.sum(dG * Cj.T))
            Mk = XtViZ @ dG @ XtViZ.T
            tr2 = float(np.sum(Sinv * Mk.T))
            qk = float(Ztej @ dG @ Ztej)
            grad[k] += -0.5 * (tr1 - tr2 - qk)
        # residual-variance direction: dV = I
        tr1 = float(np.trace(Vinv))
        tr2 = float(np.sum(Sinv * (ViX.T @ ViX).T))
        qk = float(ej @ ej)
        grad[-1] += -0.5 * (tr1 - tr2 - qk)
    return float(loglik), grad


def fit_mixed_model(X, y, Z, groups, fixed_names=None, covariance="diagonal",
                    maxiter=200) -> MixedModelFit:
    """Fit the mixed model by REML over variance parameters.

    Args:
        X: n x p fixed-effects design (include the intercept column).
        y: response vector.
        Z: n x q random-effects design per observation.
        groups: length-n group labels.
        covariance: "diagonal" or "unstructured" random-effect covariance.

    Returns a MixedModelFit; non-convergence reports the best iterate
    with converged=False, and variance estimates pinned at the floor are
    clamped to zero with a warning.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    n, p = X.shape
    q = Z.shape[1]
    group_idx = _group_slices(groups)
    if len(group_idx) < 2:
        warnings.warn("fewer than 2 groups; random effects barely identified")
    if np.linalg.matrix_rank(X) < p:
        raise MixedModelError("design not full rank")
    cov = CovarianceParam(covariance, q)

    ols_beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid_var = float(np.var(y - X @ ols_beta)) or 1.0
    theta0 = np.concatenate([cov.initial(0.5 * resid_var), [0.5 * resid_var]])

    def objective(x):
        theta_g = cov.from_opt(x[:-1])
        sigma2 = np.exp(x[-1])
        theta = np.concatenate([theta_g, [sigma2]])
        ll, grad = reml_value_and_grad(theta, X, y, Z, group_idx, cov)
        jac = np.concatenate([cov.chain(theta_g), [sigma2]])
        return -ll, -grad * jac

    x0 = np.concatenate([cov.to_opt(theta0[:-1]), [np.log(theta0[-1])]])
    res = optimize.minimize(
        objective, x0, jac=True, method="L-BFGS-B",
        bounds=[(np.log(VAR_FLOOR) / 1, 25.0)] * len(x0),
        options={"maxiter": maxiter, "ftol": 1e-12, "gtol": 1e-8})

    theta_g = cov.from_opt(res.x[:-1])
    sigma2 = float(np.exp(res.x[-1]))
    G, _ = cov.build(theta_g)

    warn_list = []
    rand_var = np.diag(G).copy()
    clamped = rand_var < 10 * VAR_FLOOR
    if clamped.any():
        warn_list.append(
            "random-effect variance estimate(s) at the boundary, clamped to 0")
        rand_var = np.where(clamped, 0.0, rand_var)

    # Fixed effects and SEs at the optimum.
    theta = np.concatenate([theta_g, [sigma2]])
    Gm, _ = cov.build(theta_g)
    S = np.zeros((p, p))
    Xty = np.zeros(p)
    for idx in group_idx:
        Xj, yj, Zj = X[idx], y[idx], Z[idx]
        Vj = sigma2 * np.eye(len(idx)) + Zj @ Gm @ Zj.T
        c = cho_factor(Vj, lower=True)
        ViX = cho_solve(c, Xj)
        S += Xj.T @ ViX
        Xty += ViX.T @ yj
    Sinv = np.linalg.inv(S)
    beta = Sinv @ Xty
    se = np.sqrt(np.diag(Sinv))
    z = beta / se
    pvals = 2.0 * norm.sf(np.abs(z))
    loglik, _ = reml_value_and_grad(theta, X, y, Z, group_idx, cov)

    if not res.success:
        warn_list.append(f"optimizer did not converge: {res.message}")
    names = list(fixed_names) if fixed_names is not None \
        else [f"x{i}" for i in range(p)]
    return MixedModelFit(
        fixed_names=names, beta=beta, se=se, wald_z=z, p_values=pvals,
        random_cov=G, random_variances=rand_var, residual_variance=sigma2,
        reml_loglik=loglik, converged=bool(res.success),
        n_obs=n, n_groups=len(group_idx), covariance=covariance,
        warnings=warn_list)
