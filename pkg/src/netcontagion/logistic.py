"""Binary logistic regression by iteratively reweighted least squares."""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats
from scipy.special import expit

from .errors import AttributeTypeError, ConvergenceError, RankDeficiencyError, SeparationError

Z95 = 1.96
# |linear predictor| beyond this means a fitted probability within ~1e-13 of 0 or 1
_SEPARATION_ETA = 30.0


@dataclass
class LogisticFit:
    names: list
    coefficients: np.ndarray
    std_errors: np.ndarray
    wald_z: np.ndarray
    wald_p_values: np.ndarray
    ci95: np.ndarray
    covariance: np.ndarray
    deviance: float
    null_deviance: float
    iterations: int
    converged: bool
    deviance_trace: list = field(default_factory=list)
    n_obs: int = 0
    gradient_norm: float = 0.0

    @property
    def log_likelihood(self):
        return -0.5 * self.deviance

    def coef(self, name):
        return float(self.coefficients[self.names.index(name)])

    def predict(self, X):
        return expit(np.asarray(X, dtype=float) @ self.coefficients)

    def to_dict(self):
        rows = []
        for k, name in enumerate(self.names):
            rows.append({
                "term": name,
                "estimate": float(self.coefficients[k]),
                "std_error": float(self.std_errors[k]),
                "z": float(self.wald_z[k]),
                "p_value": float(self.wald_p_values[k]),
                "ci95": [float(self.ci95[k, 0]), float(self.ci95[k, 1])],
            })
        return {"terms": rows, "deviance": self.deviance, "null_deviance": self.null_deviance,
                "log_likelihood": self.log_likelihood, "iterations": self.iterations,
                "converged": self.converged, "n_obs": self.n_obs}


def _deviance(y, eta):
    # -2 log L with log(1 + e^x) evaluated stably
    return 2.0 * float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def check_rank(X, names):
    """Raise :class:`RankDeficiencyError` naming columns that add no rank."""
    if X.shape[0] < X.shape[1]:
        raise RankDeficiencyError(f"{X.shape[0]} rows for {X.shape[1]} columns", names)
    _, r, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps if len(diag) else 0.0
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        bad = [names[k] for k in sorted(piv[rank:])]
        raise RankDeficiencyError(f"design matrix is rank deficient; collinear: {bad}", bad)


def _indicator_separation(y, X, names):
    for k in range(X.shape[1]):
        col = X[:, k]
        if np.all(col == 1) or not np.all((col == 0) | (col == 1)):
            continue
        hit = y[col == 1]
        if len(hit) and (hit.min() == hit.max()):
            raise SeparationError(
                f"term {names[k]!r} separates the outcome: all {len(hit)} rows with it "
                f"have y={int(hit[0])}", term=names[k])


def fit_logistic(y, X, names=None, tol=1e-10, max_iter=50):
    """Maximum-likelihood logistic regression.

    Parameters
    ----------
    y : array of 0/1
    X : (n, k) design matrix, intercept column included by the caller
    names : optional column labels used in results and error messages
    tol : convergence threshold on the relative deviance change
    max_iter : Newton/IRLS iteration cap; step-halving is applied whenever
        a full step would increase the deviance

    Returns
    -------
    LogisticFit
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if len(y) != n:
        raise ValueError(f"y has {len(y)} rows, X has {n}")
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    if not np.all((y == 0) | (y == 1)):
        raise AttributeTypeError("outcome must be coded 0/1")
    if y.min() == y.max():
        raise SeparationError(f"outcome is constant (all {int(y[0])}); the MLE does not exist",
                              term=None)
    check_rank(X, names)
    _indicator_separation(y, X, names)

    beta = np.zeros(k)
    eta = X @ beta
    dev = _deviance(y, eta)
    trace = [dev]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(eta)
        w = p * (1.0 - p)
        info = X.T @ (X * w[:, None])
        step = linalg.solve(info, X.T @ (y - p), assume_a="pos")
        for _ in range(40):
            new_beta = beta + step
            new_eta = X @ new_beta
            new_dev = _deviance(y, new_eta)
            if new_dev <= dev * (1 + 1e-15) + 1e-12:
                break
            step = step / 2.0
        else:
            raise ConvergenceError("step-halving failed to reduce the deviance", trace=trace)
        change = abs(dev - new_dev) / (abs(new_dev) + 0.1)
        beta, eta, dev = new_beta, new_eta, new_dev
        trace.append(dev)
        if change < tol:
            converged = True
            break

    if converged:
        # one extra Newton step: the stopping rule is on deviance, which is
        # quadratic in the coefficient error
        p = expit(eta)
        info = X.T @ (X * (p * (1.0 - p))[:, None])
        polished = beta + linalg.solve(info, X.T @ (y - p), assume_a="pos")
        polished_eta = X @ polished
        # accept unless worse by more than rounding
        if _deviance(y, polished_eta) <= dev * (1 + 1e-12) + 1e-12:
            beta, eta, dev = polished, polished_eta, _deviance(y, polished_eta)

    if np.max(np.abs(eta)) > _SEPARATION_ETA:
        j = int(np.argmax(np.abs(beta[1:]))) + 1 if k > 1 else 0
        raise SeparationError(
            f"fitted probabilities numerically 0 or 1; term {names[j]!r} drives separation",
            term=names[j])
    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations", trace=trace)

    p = expit(eta)
    w = p * (1.0 - p)
    cov = linalg.inv(X.T @ (X * w[:, None]))
    se = np.sqrt(np.diag(cov))
    z = beta / se
    pvals = 2 * stats.norm.sf(np.abs(z))
    ci = np.column_stack([beta - Z95 * se, beta + Z95 * se])
    ybar = y.mean()
    null_dev = _deviance(y, np.full(n, np.log(ybar / (1 - ybar))))
    grad = X.T @ (y - p)
    return LogisticFit(names=names, coefficients=beta, std_errors=se, wald_z=z,
                       wald_p_values=pvals, ci95=ci, covariance=cov, deviance=dev,
                       null_deviance=null_dev, iterations=it, converged=converged,
                       deviance_trace=trace, n_obs=n, gradient_norm=float(np.linalg.norm(grad)))
