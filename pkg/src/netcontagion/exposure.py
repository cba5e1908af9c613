"""Carrier status against friends' carrier status, and category relative risks."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import expit

from .design import levels_of, reference_for
from .errors import ConfigurationError, RankDeficiencyError
from .graph import check_attribute, positive_friend_counts, resolve_trait, trait_indicator
from .logistic import Z95, fit_logistic

log = logging.getLogger(__name__)

EXPOSURE_DEFINITIONS = ("any_positive_friend", "above_median")


def _quartiles(x):
    if len(x) == 0:
        return None
    q = np.percentile(x, [0, 25, 50, 75, 100])
    return {"min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
            "q3": float(q[3]), "max": float(q[4]), "mean": float(np.mean(x)), "n": int(len(x))}


@dataclass
class FriendExposureResult:
    trait: str
    layer: str
    fit: object
    average_marginal_effect: float
    ame_ci95: tuple
    marginal_effect_at_mean: float
    curve: list
    positive_friends_by_status: dict
    status_t_test_p: float

    def to_dict(self):
        return {
            "trait": self.trait, "layer": self.layer, "fit": self.fit.to_dict(),
            "average_marginal_effect": self.average_marginal_effect,
            "ame_ci95": list(self.ame_ci95),
            "marginal_effect_at_mean": self.marginal_effect_at_mean,
            "curve": self.curve,
            "positive_friends_by_status": self.positive_friends_by_status,
            "status_t_test_p": self.status_t_test_p,
        }


def average_marginal_effect(coef, cov, k):
    """Mean discrete change in fitted probability from one more positive friend.

    Returns ``(ame, standard_error)``; the SE is by the delta method.
    """
    a, b = coef
    eta0 = a + b * k
    eta1 = eta0 + b
    p0, p1 = expit(eta0), expit(eta1)
    ame = float(np.mean(p1 - p0))
    d0, d1 = p0 * (1 - p0), p1 * (1 - p1)
    grad = np.array([np.mean(d1 - d0), np.mean(d1 * (k + 1) - d0 * k)])
    return ame, float(np.sqrt(grad @ cov @ grad))


def carrier_vs_positive_friends(network, trait):
    """Univariable logistic fit of carrier status on number of positive friends.

    Besides the fit, reports the average marginal effect (per additional
    positive friend, averaged over observed friend counts) with a
    delta-method 95% interval, the discrete effect at the mean count, the
    fitted curve for k = 0..max with observed counts, and the distribution
    of positive-friend counts by carrier status with a Student t-test.
    """
    attr = resolve_trait(trait)
    y = trait_indicator(network, attr)
    k = positive_friend_counts(network, attr).astype(float)
    if k.min() == k.max():
        raise RankDeficiencyError("number of positive friends is constant", ["positive_friends"])
    X = np.column_stack([np.ones_like(k), k])
    fit = fit_logistic(y, X, names=["intercept", "positive_friends"])
    ame, ame_se = average_marginal_effect(fit.coefficients, fit.covariance, k)
    a, b = fit.coefficients
    kbar = k.mean()
    at_mean = float(expit(a + b * (kbar + 1)) - expit(a + b * kbar))
    curve = []
    for kk in range(int(k.max()) + 1):
        sel = k == kk
        curve.append({"k": kk, "p_hat": float(expit(a + b * kk)),
                      "n_carriers": int(np.sum(sel & (y == 1))),
                      "n_noncarriers": int(np.sum(sel & (y == 0)))})
    carriers, non = k[y == 1], k[y == 0]
    t_p = float(stats.ttest_ind(carriers, non, equal_var=True).pvalue)
    return FriendExposureResult(
        trait=attr, layer=network.layer, fit=fit, average_marginal_effect=ame,
        ame_ci95=(ame - Z95 * ame_se, ame + Z95 * ame_se), marginal_effect_at_mean=at_mean,
        curve=curve,
        positive_friends_by_status={"carriers": _quartiles(carriers),
                                    "noncarriers": _quartiles(non)},
        status_t_test_p=t_p)


def exposure_outcome(network, trait, definition="any_positive_friend"):
    """0/1 transmission-exposure indicator per node."""
    k = positive_friend_counts(network, trait)
    if definition == "any_positive_friend":
        return (k >= 1).astype(int)
    if definition == "above_median":
        return (k > np.median(k)).astype(int)
    raise ConfigurationError(
        f"unknown exposure definition {definition!r}; expected {EXPOSURE_DEFINITIONS}")


@dataclass
class RelativeRiskTable:
    risk_attribute: str
    trait: str
    exposure_definition: str
    reference: str
    rows: list
    fit: object
    excluded_categories: list

    def to_dict(self):
        return {"risk_attribute": self.risk_attribute, "trait": self.trait,
                "exposure_definition": self.exposure_definition, "reference": self.reference,
                "rows": self.rows, "fit": self.fit.to_dict(),
                "excluded_categories": self.excluded_categories}


def category_relative_risk(network, risk_attr, trait, exposure_definition="any_positive_friend",
                           reference=None, levels=None):
    """Relative risk of transmission exposure per category of ``risk_attr``.

    Exposure follows ``exposure_definition``.  A univariable logistic model
    on the category dummies gives fitted probabilities; RR is the ratio to
    the reference category with a delta-method interval on log RR.
    Participants missing ``risk_attr`` are excluded.
    """
    check_attribute(risk_attr)
    attr = resolve_trait(trait)
    outcome = exposure_outcome(network, attr, exposure_definition)
    values = network.values(risk_attr)
    observed = levels_of(risk_attr, values)
    wanted = list(levels) if levels is not None else observed
    excluded = [c for c in wanted if c not in observed]
    for c in excluded:
        log.warning("category %s=%r has no members; excluded", risk_attr, c)
    cats = [c for c in wanted if c in observed]
    ref = reference_for(risk_attr, cats, reference)
    keep = np.array([v in cats for v in values])
    y = outcome[keep]
    vals = [v for v, kp in zip(values, keep) if kp]
    others = [c for c in cats if c != ref]
    X = np.column_stack([np.ones(len(y))] + [[float(v == c) for v in vals] for c in others])
    names = ["intercept"] + [f"{risk_attr}[{c}]" for c in others]
    fit = fit_logistic(y, X, names=names)
    b0 = fit.coefficients[0]
    p_ref = float(expit(b0))
    rows = []
    for c in cats:
        sel = np.array([v == c for v in vals])
        row = {"category": c, "n": int(sel.sum()), "n_exposed": int(y[sel].sum()),
               "is_reference": c == ref}
        if c == ref:
            row.update(p_hat=p_ref, log_odds=float(b0), rr=1.0, ci95=[1.0, 1.0], wald_p=None)
        else:
            j = 1 + others.index(c)
            p_c = float(expit(b0 + fit.coefficients[j]))
            grad = np.zeros(len(fit.coefficients))
            grad[0] = p_ref - p_c
            grad[j] = 1.0 - p_c
            se = float(np.sqrt(grad @ fit.covariance @ grad))
            log_rr = np.log(p_c) - np.log(p_ref)
            row.update(p_hat=p_c, log_odds=float(fit.coefficients[j]), rr=float(np.exp(log_rr)),
                       ci95=[float(np.exp(log_rr - Z95 * se)), float(np.exp(log_rr + Z95 * se))],
                       wald_p=float(fit.wald_p_values[j]))
        rows.append(row)
    return RelativeRiskTable(risk_attribute=risk_attr, trait=attr,
                             exposure_definition=exposure_definition, reference=ref, rows=rows,
                             fit=fit, excluded_categories=excluded)
