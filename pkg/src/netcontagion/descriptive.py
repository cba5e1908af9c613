"""Classical univariable summaries of the cohort and its contact network."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .design import levels_of
from .errors import AttributeTypeError, ConfigurationError, UndefinedResultError
from .graph import (CATEGORICAL_ATTRIBUTES, LAYERS, NUMERIC_ATTRIBUTES, build_network,
                    check_layer, popularity_vector)

log = logging.getLogger(__name__)

TESTS = ("auto", "chi_square_yates", "chi_square", "fisher_exact")


def _categorical(attribute):
    if attribute in NUMERIC_ATTRIBUTES:
        raise AttributeTypeError(f"{attribute!r} is numeric; a cross-tabulation needs "
                                 "categorical attributes")
    if attribute not in CATEGORICAL_ATTRIBUTES:
        raise ConfigurationError(f"unknown attribute {attribute!r}")


@dataclass
class CrossTab:
    row_variable: str
    column_variable: str
    rows: list
    columns: list
    counts: np.ndarray
    positive_column: str
    prevalence: list
    test: str
    statistic: float
    p_value: float

    @property
    def n(self):
        return int(self.counts.sum())

    def to_dict(self):
        return {"row_variable": self.row_variable, "column_variable": self.column_variable,
                "rows": self.rows, "columns": self.columns, "counts": self.counts.tolist(),
                "positive_column": self.positive_column, "prevalence": self.prevalence,
                "test": self.test, "statistic": self.statistic, "p_value": self.p_value,
                "n": self.n}


def contingency_test(table, test="auto"):
    """Return ``(test_used, statistic, p_value)`` for a contingency table.

    ``auto``: 2x2 tables use Fisher's exact test when an expected count is
    below 5 and the Yates-corrected chi-square otherwise; larger tables use
    the plain chi-square test.  Fisher's statistic is the sample odds ratio.
    """
    table = np.asarray(table, dtype=np.int64)
    if test not in TESTS:
        raise ConfigurationError(f"test must be one of {TESTS}")
    if np.any(table < 0):
        raise ConfigurationError("counts must be non-negative")
    is_2x2 = table.shape == (2, 2)
    if test in ("fisher_exact", "chi_square_yates") and not is_2x2:
        raise ConfigurationError(f"{test} is only supported on 2x2 tables")
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    if test == "auto":
        if is_2x2:
            expected = np.outer(rows, cols) / max(table.sum(), 1)
            test = "fisher_exact" if expected.min() < 5 else "chi_square_yates"
        else:
            test = "chi_square"
    if test == "fisher_exact":
        # with an empty margin only the observed table is possible, so p = 1
        res = stats.fisher_exact(table)
        return test, float(res.statistic), float(res.pvalue)
    if np.count_nonzero(rows) < 2 or np.count_nonzero(cols) < 2:
        raise UndefinedResultError("table needs two non-empty rows and two non-empty columns")
    # empty categories carry no information; drop them before the chi-square
    sub = table[rows > 0][:, cols > 0]
    res = stats.chi2_contingency(sub, correction=test == "chi_square_yates")
    return test, float(res.statistic), float(res.pvalue)


def cross_tab(cohort, row_attr, col_attr, test="auto", positive=None):
    """Cross-tabulate two categorical attributes with a test of independence.

    Participants missing either attribute are excluded.  ``prevalence`` is
    the per-row percentage falling in ``positive`` (``"positive"`` when
    that is a column, else the first column).
    """
    _categorical(row_attr)
    _categorical(col_attr)
    rv, cv = cohort.column(row_attr), cohort.column(col_attr)
    pairs = [(r, c) for r, c in zip(rv, cv) if r is not None and c is not None]
    rows = levels_of(row_attr, [r for r, _ in pairs])
    cols = levels_of(col_attr, [c for _, c in pairs])
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    ri = {v: k for k, v in enumerate(rows)}
    ci = {v: k for k, v in enumerate(cols)}
    for r, c in pairs:
        counts[ri[r], ci[c]] += 1
    if positive is None:
        positive = "positive" if "positive" in cols else (cols[0] if cols else None)
    if cols and positive not in ci:
        raise ConfigurationError(f"{positive!r} is not a level of {col_attr!r}")
    prevalence = []
    for k in range(len(rows)):
        tot = counts[k].sum()
        prevalence.append(float(100.0 * counts[k, ci[positive]] / tot) if tot else None)
    try:
        used, statistic, p = contingency_test(counts, test) if counts.size else (test, None, None)
    except UndefinedResultError as exc:
        log.warning("%s x %s: %s", row_attr, col_attr, exc)
        used, statistic, p = test, None, None
    return CrossTab(row_variable=row_attr, column_variable=col_attr, rows=rows, columns=cols,
                    counts=counts, positive_column=positive, prevalence=prevalence,
                    test=used, statistic=statistic, p_value=p)


def two_group_test(a, b, pooled=False):
    """Two-sided t-test; Welch unless ``pooled``.  Returns ``(t, p)``.

    Two constant groups with equal means are reported as ``(0, 1)``.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise UndefinedResultError("each group needs at least two observations")
    if np.ptp(a) == 0 and np.ptp(b) == 0:
        if a[0] == b[0]:
            return 0.0, 1.0
        raise UndefinedResultError("both groups are constant with different values")
    res = stats.ttest_ind(a, b, equal_var=pooled)
    return float(res.statistic), float(res.pvalue)


def one_way_anova(groups):
    """One-way ANOVA F-test.  Returns ``(F, p)``; all-constant equal groups give ``(0, 1)``."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise UndefinedResultError("ANOVA needs at least two non-empty groups")
    if sum(len(g) for g in groups) <= len(groups):
        raise UndefinedResultError("ANOVA needs more observations than groups")
    if all(np.ptp(g) == 0 for g in groups):
        if len({float(g[0]) for g in groups}) == 1:
            return 0.0, 1.0
        raise UndefinedResultError("all groups are constant; F is infinite")
    res = stats.f_oneway(*groups)
    return float(res.statistic), float(res.pvalue)


def numeric_comparison(cohort, numeric_attr, group_attr, pooled=False):
    """Mean and SD of a numeric attribute per category, with a t-test or ANOVA."""
    if numeric_attr not in NUMERIC_ATTRIBUTES:
        raise AttributeTypeError(f"{numeric_attr!r} is not numeric")
    _categorical(group_attr)
    xs, gs = cohort.column(numeric_attr), cohort.column(group_attr)
    pairs = [(float(x), g) for x, g in zip(xs, gs) if x is not None and g is not None]
    cats = levels_of(group_attr, [g for _, g in pairs])
    groups = [np.array([x for x, g in pairs if g == c]) for c in cats]
    return _group_summary(group_attr, cats, groups, pooled, value=numeric_attr)


def _group_summary(attr, cats, groups, pooled, value):
    rows = [{"category": c, "n": int(len(g)), "mean": float(g.mean()),
             "sd": float(g.std(ddof=1)) if len(g) > 1 else None}
            for c, g in zip(cats, groups)]
    test, statistic, p = None, None, None
    try:
        if len(groups) == 2:
            test = "t_test"
            statistic, p = two_group_test(groups[0], groups[1], pooled=pooled)
        elif len(groups) > 2:
            test = "anova"
            statistic, p = one_way_anova(groups)
    except UndefinedResultError as exc:
        log.warning("%s by %s: %s", value, attr, exc)
    return {"attribute": attr, "value": value, "rows": rows, "test": test,
            "statistic": statistic, "p_value": p, "pooled_variance": bool(pooled)}


def popularity_by_category(cohort, nominations, attr, layer="overall", pooled=False):
    """Mean popularity per category of ``attr`` with a t-test or ANOVA.

    Also reports relative physical isolation: the share of the category
    never nominated in the layer (``isolation_pct``) and the category's
    share of all never-nominated participants (``isolated_share_pct``).
    Participants missing ``attr`` are left out.
    """
    _categorical(attr)
    check_layer(layer)
    net = build_network(cohort, nominations, layer)
    pop = popularity_vector(net, nominations)
    values = cohort.column(attr)
    wanted = list(dict.fromkeys(levels_of(attr, values)))
    cats, groups = [], []
    for c in wanted:
        g = pop[[v == c for v in values]]
        if len(g) == 0:
            log.warning("category %s=%r has no members; excluded", attr, c)
            continue
        cats.append(c)
        groups.append(g.astype(float))
    out = _group_summary(attr, cats, groups, pooled, value="popularity")
    n_isolated = int(sum(np.sum(g == 0) for g in groups))
    for row, g in zip(out["rows"], groups):
        iso = int(np.sum(g == 0))
        row["n_isolated"] = iso
        row["isolation_pct"] = 100.0 * iso / len(g)
        row["isolated_share_pct"] = 100.0 * iso / n_isolated if n_isolated else None
        row["frequency_pct"] = 100.0 * len(g) / sum(len(x) for x in groups)
    out["layer"] = layer
    return out


def same_week_friend_proportion(cohort, nominations, layer="overall"):
    """Share of each participant's nominees attending in the same week.

    Nominees outside the cohort or without a recorded week are ignored;
    participants without a week or without usable nominees are skipped.
    Returns per-week means and the participant-weighted overall mean (%).
    """
    check_layer(layer)
    week = dict(zip(cohort.ids, cohort.column("attendance_week")))
    targets = {}
    for nom in nominations:
        if nom.in_layer(layer) and nom.target in week:
            targets.setdefault(nom.source, set()).add(nom.target)
    per_week = {}
    skipped_no_week = 0
    for pid in cohort.ids:
        w = week[pid]
        if w is None:
            skipped_no_week += 1
            continue
        friends = [t for t in targets.get(pid, ()) if week[t] is not None]
        if not friends:
            continue
        share = sum(week[t] == w for t in friends) / len(friends)
        per_week.setdefault(w, []).append(share)
    if skipped_no_week:
        log.warning("%d participant(s) without attendance week skipped", skipped_no_week)
    rows = [{"week": w, "n_participants": len(v), "same_week_pct": 100.0 * float(np.mean(v))}
            for w, v in sorted(per_week.items())]
    all_shares = [s for v in per_week.values() for s in v]
    overall = 100.0 * float(np.mean(all_shares)) if all_shares else None
    return {"layer": layer, "rows": rows, "weighted_average_pct": overall,
            "n_participants": len(all_shares), "n_skipped_no_week": skipped_no_week}


def representativeness_summary(cohort, nominations=None):
    """Histogram of self-rated representativeness (0..10), mean and share >= 5.

    With ``nominations`` the mean is also given per layer over the
    participants who have at least one edge in that layer.
    """
    scores = np.array([s for s in cohort.column("representativeness") if s is not None],
                      dtype=float)
    if len(scores) == 0:
        raise UndefinedResultError("no participant reports a representativeness score")
    hist = np.bincount(scores.astype(int), minlength=11)[:11]
    out = {"histogram": {str(k): int(c) for k, c in enumerate(hist)},
           "n": int(len(scores)), "n_missing": len(cohort) - int(len(scores)),
           "mean": float(scores.mean()), "pct_at_least_5": 100.0 * float(np.mean(scores >= 5))}
    if nominations is not None:
        raw = cohort.column("representativeness")
        by_layer = {}
        for layer in LAYERS:
            deg = build_network(cohort, nominations, layer).degrees()
            vals = [s for s, d in zip(raw, deg) if s is not None and d > 0]
            by_layer[layer] = float(np.mean(vals)) if vals else None
        out["mean_by_layer"] = by_layer
    return out


def prevalence(cohort, trait):
    """Percentage positive among participants with a recorded ``trait``."""
    vals = [v for v in cohort.column(trait) if v is not None]
    if not vals:
        raise UndefinedResultError(f"{trait!r} is missing for everyone")
    return 100.0 * sum(v == "positive" for v in vals) / len(vals)


def finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)
