"""Dyad-independent exponential random graph models.

With only an edges term and attribute-match terms every unordered pair is
an independent Bernoulli trial, so the ERGM likelihood is exactly a
logistic regression over dyads.  Fitting goes through
:func:`netcontagion.logistic.fit_logistic`.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import rng
from .errors import ConfigurationError, UndefinedResultError
from .graph import ContactNetwork, check_attribute, encode, homophily_fraction
from .logistic import fit_logistic


@dataclass
class DyadDesign:
    """One row per unordered pair ``(i, j)``, ``i < j``.

    ``match[attr]`` is 1.0/0.0 for equal/unequal values and NaN when either
    endpoint is missing.
    """
    i: np.ndarray
    j: np.ndarray
    response: np.ndarray
    match: dict

    def __len__(self):
        return len(self.i)


def enumerate_dyads(network, attributes=()):
    n = network.n_nodes
    if n < 2:
        raise ConfigurationError("at least two nodes are needed to form a dyad")
    i, j = np.triu_indices(n, k=1)
    edge_keys = network.edges[:, 0] * n + network.edges[:, 1]
    response = np.isin(i * n + j, edge_keys).astype(np.int8)
    match = {}
    for attr in attributes:
        check_attribute(attr)
        codes, _ = encode(network.values(attr))
        a, b = codes[i], codes[j]
        m = (a == b).astype(float)
        m[(a < 0) | (b < 0)] = np.nan
        match[attr] = m
    return DyadDesign(i=i, j=j, response=response, match=match)


@dataclass
class DyadicErgmFit:
    terms: list
    n_dyads: int
    n_dyads_excluded: int
    n_edges: int
    log_likelihood: float
    converged: bool
    iterations: int
    gradient_norm: float
    expected_edges: float
    logistic: object

    def estimate(self, name):
        for t in self.terms:
            if t["name"] == name:
                return t["estimate"]
        raise KeyError(name)

    def to_dict(self):
        return {"terms": self.terms, "n_dyads": self.n_dyads,
                "n_dyads_excluded": self.n_dyads_excluded, "n_edges": self.n_edges,
                "log_likelihood": self.log_likelihood, "converged": self.converged,
                "iterations": self.iterations, "gradient_norm": self.gradient_norm}


def _term_name(attr):
    return f"nodematch.{attr}"


def fit_dyadic_ergm(network, attributes=(), design=None, tol=1e-10, max_iter=50):
    """Fit ``edges + sum(nodematch(attr))`` by maximum likelihood.

    Dyads missing any included attribute are dropped.  Each match term also
    carries the observed homophily percentage of the network.
    """
    attributes = list(attributes)
    design = design if design is not None else enumerate_dyads(network, attributes)
    keep = np.ones(len(design), dtype=bool)
    for attr in attributes:
        keep &= ~np.isnan(design.match[attr])
    y = design.response[keep]
    if y.sum() == 0 or y.sum() == len(y):
        raise UndefinedResultError("need at least one edge and one non-edge among dyads")
    cols = [np.ones(int(keep.sum()))] + [design.match[a][keep] for a in attributes]
    names = ["edges"] + [_term_name(a) for a in attributes]
    lf = fit_logistic(y, np.column_stack(cols), names=names, tol=tol, max_iter=max_iter)
    terms = []
    for k, name in enumerate(names):
        term = {"name": name, "estimate": float(lf.coefficients[k]),
                "std_error": float(lf.std_errors[k]), "p_value": float(lf.wald_p_values[k]),
                "ci95": [float(lf.ci95[k, 0]), float(lf.ci95[k, 1])], "homophily_pct": None}
        if k:
            term["homophily_pct"] = float(homophily_fraction(network, attributes[k - 1]))
        terms.append(term)
    X = np.column_stack(cols)
    return DyadicErgmFit(terms=terms, n_dyads=int(keep.sum()),
                         n_dyads_excluded=int((~keep).sum()), n_edges=int(y.sum()),
                         log_likelihood=lf.log_likelihood, converged=lf.converged,
                         iterations=lf.iterations, gradient_norm=lf.gradient_norm,
                         expected_edges=float(expit(X @ lf.coefficients).sum()), logistic=lf)


def fit_dyadic_ergm_separately(network, attributes):
    """One ``edges + nodematch(attr)`` model per attribute."""
    design = enumerate_dyads(network, attributes)
    return {a: fit_dyadic_ergm(network, [a], design=design) for a in attributes}


def simulate_dyadic_ergm(cohort, theta_edges, theta_match=None, seed=0, layer="overall"):
    """Draw a network from a dyad-independent ERGM over ``cohort``.

    ``theta_match`` maps attribute -> log-odds bonus for dyads with equal,
    non-missing values.
    """
    theta_match = theta_match or {}
    n = len(cohort)
    i, j = np.triu_indices(n, k=1)
    eta = np.full(len(i), float(theta_edges))
    for attr, theta in theta_match.items():
        check_attribute(attr)
        codes, _ = encode(cohort.column(attr))
        a, b = codes[i], codes[j]
        eta += theta * ((a == b) & (a >= 0))
    gen = rng.stream(seed, rng.ERGM_SIM)
    hit = gen.random(len(i)) < expit(eta)
    return ContactNetwork(cohort, np.column_stack([i[hit], j[hit]]), layer)
