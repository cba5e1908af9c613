"""Independent reference implementations used only by the tests.

They trade speed for transparency: exact rationals where possible, plain
Newton iterations with hand-written derivatives, brute-force enumeration.
"""

import itertools
from fractions import Fraction
from math import comb

import numpy as np


def fisher_two_sided(table):
    """Two-sided Fisher p as a Fraction: sum of table probabilities <= observed."""
    (a, b), (c, d) = table
    r1, c1, n = a + b, a + c, a + b + c + d

    def prob(x):
        return Fraction(comb(c1, x) * comb(n - c1, r1 - x), comb(n, r1))

    lo, hi = max(0, r1 + c1 - n), min(r1, c1)
    p_obs = prob(a)
    return sum((prob(x) for x in range(lo, hi + 1) if prob(x) <= p_obs), Fraction(0))


def newton_logistic(y, X, iters=100):
    """Newton-Raphson on the log-likelihood with the analytic Hessian."""
    y = np.asarray(y, float)
    X = np.asarray(X, float)
    beta = np.zeros(X.shape[1])
    for _ in range(iters):
        p = 1 / (1 + np.exp(-X @ beta))
        grad = X.T @ (y - p)
        hess = -(X * (p * (1 - p))[:, None]).T @ X
        step = np.linalg.solve(hess, grad)
        beta = beta - step
        if np.max(np.abs(step)) < 1e-14:
            break
    return beta


def ols_normal_equations(y, Z):
    Z = np.asarray(Z, float)
    return np.linalg.solve(Z.T @ Z, Z.T @ np.asarray(y, float))


def dyadic_mle_two_groups(n_same, e_same, n_diff, e_diff):
    """Closed-form MLE of edges + one match term from dyad/edge counts."""
    p_diff = e_diff / n_diff
    p_same = e_same / n_same
    logit = lambda p: np.log(p / (1 - p))  # noqa: E731
    return logit(p_diff), logit(p_same) - logit(p_diff)


def brute_force_same_counts(codes, edges):
    """Distribution (Fraction per count) of same-label edges over all label permutations."""
    codes = list(codes)
    idx = [k for k, c in enumerate(codes) if c >= 0]
    labels = [codes[k] for k in idx]
    counts = {}
    perms = list(itertools.permutations(range(len(idx))))
    for perm in perms:
        lab = list(codes)
        for k, p in zip(idx, perm):
            lab[k] = labels[p]
        s = sum(1 for i, j in edges if lab[i] >= 0 and lab[i] == lab[j])
        counts[s] = counts.get(s, 0) + 1
    total = len(perms)
    return {s: Fraction(c, total) for s, c in counts.items()}


def log_det_direct(W, rho):
    sign, val = np.linalg.slogdet(np.eye(len(W)) - rho * np.asarray(W))
    return sign, val
