"""Network autocorrelation (spatial-lag) model  y = rho W y + X beta + eps.

Two estimators are provided:

``lag_covariate_least_squares``
    OLS of y on [W y, X] with heteroskedasticity-robust (HC1) standard
    errors.  With raw adjacency weights, rho is the change in outcome per
    additional positive neighbour.
``profile_ml``
    Gaussian maximum likelihood with beta and sigma^2 concentrated out; the
    Jacobian term log|I - rho W| is evaluated from the eigenvalues of W and
    the profile is maximised over the stable interval of rho.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, sparse, stats

from . import rng
from .design import covariate_design
from .errors import AttributeTypeError, ConfigurationError, ConvergenceError, SizeError
from .graph import resolve_trait, trait_indicator
from .logistic import check_rank

log = logging.getLogger(__name__)

WEIGHT_MODES = ("raw_adjacency", "row_normalized")
METHODS = ("lag_covariate_least_squares", "profile_ml")
DENSE_LIMIT = 5000


@dataclass
class WeightMatrix:
    mode: str
    matrix: sparse.csr_matrix
    n_isolated: int

    @property
    def n(self):
        return self.matrix.shape[0]

    def row_sums(self):
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def dense(self):
        return self.matrix.toarray()


def build_weight_matrix(network, mode="raw_adjacency"):
    """Neighbour weights from the network's adjacency.

    ``row_normalized`` divides each row by the degree; isolated nodes keep
    an all-zero row.
    """
    if mode not in WEIGHT_MODES:
        raise ConfigurationError(f"unknown weight mode {mode!r}; expected {WEIGHT_MODES}")
    adj = network.adjacency.astype(float)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    n_iso = int(np.sum(deg == 0))
    if n_iso:
        log.warning("%d isolated node(s) get an all-zero weight row", n_iso)
    if mode == "row_normalized":
        inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        adj = sparse.diags(inv) @ adj
    return WeightMatrix(mode=mode, matrix=sparse.csr_matrix(adj), n_isolated=n_iso)


def _as_matrix(W):
    if isinstance(W, WeightMatrix):
        return W.matrix
    if sparse.issparse(W):
        return sparse.csr_matrix(W, dtype=float)
    return np.asarray(W, dtype=float)


def weight_eigenvalues(W):
    """Real eigenvalues of W (symmetric, or row-normalised symmetric) in ascending order."""
    M = _as_matrix(W)
    n = M.shape[0]
    if n > DENSE_LIMIT:
        raise SizeError(f"dense eigen-decomposition limited to {DENSE_LIMIT} nodes (got {n}); "
                        "a sparse log-determinant is not implemented")
    A = M.toarray() if sparse.issparse(M) else M
    if np.allclose(A, A.T):
        return linalg.eigvalsh(A)
    # row-normalised symmetric support: D^-1 S is similar to D^-1/2 S D^-1/2
    d = A.sum(axis=1)
    S = A * d[:, None]
    if np.allclose(S, S.T):
        r = np.divide(1.0, np.sqrt(d), out=np.zeros_like(d), where=d > 0)
        return linalg.eigvalsh(r[:, None] * S * r[None, :])
    vals = linalg.eigvals(A)
    if np.max(np.abs(vals.imag)) > 1e-9:
        raise ConfigurationError("weight matrix has complex eigenvalues")
    return np.sort(vals.real)


def spectral_radius(W):
    M = _as_matrix(W)
    if M.shape[0] == 0:
        return 0.0
    if M.shape[0] <= DENSE_LIMIT:
        return float(np.max(np.abs(weight_eigenvalues(M))))
    from scipy.sparse.linalg import eigs
    return float(np.abs(eigs(sparse.csr_matrix(M), k=1, which="LM",
                             return_eigenvectors=False))[0])


def log_det_i_minus_rho_w(eigenvalues, rho):
    """log|I - rho W| = sum log(1 - rho lambda_i)."""
    return float(np.sum(np.log1p(-rho * np.asarray(eigenvalues))))


@dataclass
class AutocorrSimulation:
    y: np.ndarray
    iterations: int
    converged: bool
    spectral_radius: float
    noise: np.ndarray
    max_delta_trace: list = field(default_factory=list)


def simulate_autocorrelation(W, rho, X, beta, noise_sd=0.0, seed=0, max_iters=10_000,
                             tol=1e-10, force=False, noise=None):
    """Iterate ``Y <- rho W Y + X beta + eps`` to its fixed point.

    ``eps`` is drawn once (or passed as ``noise``) and held fixed.  The
    iteration starts at ``X beta + eps`` and stops when the largest change
    falls below ``tol``.  Raises :class:`ConvergenceError` if the spectral
    radius of ``rho W`` is >= 1 (unless ``force``) or the iterates blow up.
    """
    M = _as_matrix(W)
    n = M.shape[0]
    X = np.asarray(X, dtype=float).reshape(n, -1)
    base = X @ np.asarray(beta, dtype=float).ravel()
    if noise is None:
        noise = noise_sd * rng.stream(seed, rng.AUTOCORR_NOISE).standard_normal(n) \
            if noise_sd else np.zeros(n)
    noise = np.asarray(noise, dtype=float)
    r = abs(rho) * spectral_radius(M)
    if r >= 1 and not force:
        raise ConvergenceError(f"spectral radius of rho*W is {r:.4g} >= 1; the iteration "
                               "does not converge (pass force=True to try anyway)")
    fixed = base + noise
    y = fixed.copy()
    trace = []
    start_norm = max(np.max(np.abs(y)), 1.0) if n else 1.0
    for it in range(1, max_iters + 1):
        new = rho * (M @ y) + fixed
        delta = float(np.max(np.abs(new - y))) if n else 0.0
        trace.append(delta)
        y = new
        if delta < tol:
            return AutocorrSimulation(y=y, iterations=it, converged=True, spectral_radius=r,
                                      noise=noise, max_delta_trace=trace)
        if not np.isfinite(delta) or np.max(np.abs(y)) > 1e12 * start_norm:
            break
    raise ConvergenceError(f"no convergence after {it} iterations (spectral radius of rho*W "
                           f"~ {r:.4g})", trace=trace)


@dataclass
class AutocorrFit:
    method: str
    weight_mode: str
    rho: float
    rho_std_error: float
    rho_p_value: float
    names: list
    beta: np.ndarray
    std_errors: np.ndarray
    p_values: np.ndarray
    n_obs: int
    converged: bool
    log_likelihood: float = None
    sigma2: float = None
    rho_bounds: tuple = None
    beta_interpretable: bool = False
    references: dict = field(default_factory=dict)

    def to_dict(self):
        rows = [{"term": "rho", "estimate": self.rho, "std_error": self.rho_std_error,
                 "p_value": self.rho_p_value}]
        for k, name in enumerate(self.names):
            rows.append({"term": name, "estimate": float(self.beta[k]),
                         "std_error": float(self.std_errors[k]),
                         "p_value": float(self.p_values[k])})
        return {"method": self.method, "weight_mode": self.weight_mode, "terms": rows,
                "n_obs": self.n_obs, "converged": self.converged,
                "log_likelihood": self.log_likelihood, "sigma2": self.sigma2,
                "rho_bounds": list(self.rho_bounds) if self.rho_bounds else None,
                "beta_interpretable": self.beta_interpretable, "references": self.references}


def _outcome_vector(network, outcome, require_binary):
    if isinstance(outcome, str):
        return trait_indicator(network, resolve_trait(outcome)).astype(float)
    y = np.asarray(outcome, dtype=float).ravel()
    if len(y) != network.n_nodes:
        raise ConfigurationError(f"outcome has {len(y)} entries for {network.n_nodes} nodes")
    if require_binary and not np.all((y == 0) | (y == 1)):
        raise AttributeTypeError("outcome must be a binary 0/1 trait")
    return y


def _ols(y, Z):
    coef, *_ = linalg.lstsq(Z, y)
    return coef, y - Z @ coef


def fit_lag_least_squares(y, Wy, X, names):
    """OLS of y on [Wy, X] with HC1 standard errors; returns (coef, se, p)."""
    Z = np.column_stack([Wy, X])
    n, k = Z.shape
    check_rank(Z, ["rho"] + list(names))
    coef, resid = _ols(y, Z)
    bread = linalg.inv(Z.T @ Z)
    meat = (Z * resid[:, None] ** 2).T @ Z
    cov = bread @ meat @ bread * n / (n - k)
    se = np.sqrt(np.diag(cov))
    p = 2 * stats.t.sf(np.abs(coef / se), df=n - k)
    return coef, se, p


def _profile(y, Wy, X, eigs):
    n = len(y)

    def negll(rho):
        _, e = _ols(y - rho * Wy, X)
        s2 = e @ e / n
        return -(-0.5 * n * (np.log(2 * np.pi * s2) + 1) + log_det_i_minus_rho_w(eigs, rho))
    return negll


def fit_profile_ml(y, W, X, names, eigs=None, xtol=1e-10):
    """Concentrated-likelihood ML for the spatial-lag model.

    Returns a dict with rho, beta, their asymptotic standard errors and the
    maximised log-likelihood.
    """
    M = _as_matrix(W)
    Md = M.toarray() if sparse.issparse(M) else M
    n = len(y)
    eigs = weight_eigenvalues(Md) if eigs is None else eigs
    lo_eig, hi_eig = eigs.min(), eigs.max()
    lo = 1.0 / lo_eig if lo_eig < -1e-12 else -1e3
    hi = 1.0 / hi_eig if hi_eig > 1e-12 else 1e3
    span = hi - lo
    a, b = lo + 1e-9 * span, hi - 1e-9 * span
    Wy = Md @ y
    negll = _profile(y, Wy, X, eigs)
    res = optimize.minimize_scalar(negll, bounds=(a, b), method="bounded",
                                   options={"xatol": xtol, "maxiter": 500})
    rho = float(res.x)
    beta, e = _ols(y - rho * Wy, X)
    s2 = float(e @ e / n)

    A = np.eye(n) - rho * Md
    Wa = Md @ linalg.inv(A)
    WaXb = Wa @ (X @ beta)
    tr1 = float(np.trace(Wa))
    tr2 = float(np.sum(Wa * Wa.T))
    tr3 = float(np.sum(Wa * Wa))
    k = X.shape[1]
    info = np.zeros((k + 2, k + 2))
    info[:k, :k] = X.T @ X / s2
    info[:k, k] = info[k, :k] = X.T @ WaXb / s2
    info[k, k] = tr2 + tr3 + WaXb @ WaXb / s2
    info[k, k + 1] = info[k + 1, k] = tr1 / s2
    info[k + 1, k + 1] = n / (2 * s2 ** 2)
    cov = linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    return {"rho": rho, "rho_se": float(se[k]), "beta": beta, "beta_se": se[:k],
            "sigma2": s2, "log_likelihood": -float(res.fun), "converged": bool(res.success),
            "bounds": (lo, hi)}


def fit_autocorrelation(network, outcome, covariates=(), weight_mode="raw_adjacency",
                        method="lag_covariate_least_squares", references=None,
                        require_binary=True, fixed_rho=None):
    """Estimate the contagion coefficient rho and covariate effects.

    Parameters
    ----------
    network : ContactNetwork
    outcome : trait selector (``"direct"``/``"enrichment"``) or 0/1 vector
        in cohort order
    covariates : categorical attributes, dummy-coded against the reference
        levels in :data:`netcontagion.design.REFERENCE_CATEGORIES`
    weight_mode : ``"raw_adjacency"`` or ``"row_normalized"``
    method : ``"lag_covariate_least_squares"`` or ``"profile_ml"``
    require_binary : reject outcomes that are not 0/1
    fixed_rho : if given, rho is not estimated and beta is the OLS fit of
        ``y - fixed_rho * W y`` on the covariates

    Participants with a missing covariate are dropped: for least squares
    the lag is still taken over all their neighbours, for profile ML the
    model is fitted on the induced subnetwork of complete cases.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}; expected {METHODS}")
    y = _outcome_vector(network, outcome, require_binary)
    X, names, complete, refs = covariate_design(network.cohort, covariates, references)
    W = build_weight_matrix(network, weight_mode)

    if fixed_rho is not None:
        Wy = W.matrix @ y
        yc, Xc = (y - fixed_rho * Wy)[complete], X[complete]
        beta, e = _ols(yc, Xc)
        n, k = Xc.shape
        s2 = e @ e / (n - k)
        se = np.sqrt(np.diag(s2 * linalg.inv(Xc.T @ Xc)))
        return AutocorrFit(method=method, weight_mode=weight_mode, rho=float(fixed_rho),
                           rho_std_error=0.0, rho_p_value=float("nan"), names=names, beta=beta,
                           std_errors=se, p_values=2 * stats.t.sf(np.abs(beta / se), df=n - k), n_obs=n,
                           converged=True, references=refs)

    if method == "lag_covariate_least_squares":
        Wy = W.matrix @ y
        coef, se, p = fit_lag_least_squares(y[complete], Wy[complete], X[complete], names)
        return AutocorrFit(method=method, weight_mode=weight_mode, rho=float(coef[0]),
                           rho_std_error=float(se[0]), rho_p_value=float(p[0]), names=names,
                           beta=coef[1:], std_errors=se[1:], p_values=p[1:],
                           n_obs=int(complete.sum()), converged=True, references=refs)

    if network.n_nodes > DENSE_LIMIT:
        raise SizeError(f"profile_ml uses a dense eigen-decomposition; limited to "
                        f"{DENSE_LIMIT} nodes")
    if not complete.all():
        keep_ids = {pid for pid, c in zip(network.ids, complete) if c}
        sub = network.subgraph(lambda p: p.id in keep_ids)
        W = build_weight_matrix(sub, weight_mode)
        y, X = y[complete], X[complete]
    res = fit_profile_ml(y, W, X, names)
    z_beta = res["beta"] / res["beta_se"]
    return AutocorrFit(method=method, weight_mode=weight_mode, rho=res["rho"],
                       rho_std_error=res["rho_se"],
                       rho_p_value=float(2 * stats.norm.sf(abs(res["rho"] / res["rho_se"]))),
                       names=names, beta=res["beta"], std_errors=res["beta_se"],
                       p_values=2 * stats.norm.sf(np.abs(z_beta)), n_obs=len(y),
                       converged=res["converged"], log_likelihood=res["log_likelihood"],
                       sigma2=res["sigma2"], rho_bounds=res["bounds"], references=refs)
