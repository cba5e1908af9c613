"""Dummy coding of categorical host attributes."""

import logging

import numpy as np

from .errors import AttributeTypeError, RankDeficiencyError
from .graph import ATTRIBUTE_LEVELS, CATEGORICAL_ATTRIBUTES

log = logging.getLogger(__name__)

# Reference levels used for relative risks and regression dummies.
REFERENCE_CATEGORIES = {
    "sex": "female",
    "study_program": "vocational",
    "bmi_category": "healthy",
    "smoking": "daily",
    "snuff": "daily",
    "alcohol": "twice_monthly_or_more",
    "physical_activity": "light",
    "contraceptive": "non_user",
    "carriage_direct": "negative",
    "carriage_enrichment": "negative",
}


def levels_of(attribute, values):
    """Observed categories of ``attribute`` in display order."""
    present = {v for v in values if v is not None}
    if attribute in ATTRIBUTE_LEVELS:
        return [c for c in ATTRIBUTE_LEVELS[attribute] if c in present]
    return sorted(present, key=str)


def reference_for(attribute, levels, reference=None):
    ref = reference if reference is not None else REFERENCE_CATEGORIES.get(attribute)
    if ref is None or ref not in levels:
        if ref is not None:
            log.warning("reference %s=%r not observed; using %r", attribute, ref, levels[0])
        ref = levels[0]
    return ref


def dummy_block(attribute, values, reference=None):
    """Return ``(matrix, names, reference)`` for one categorical attribute.

    Rows with a missing value are all-NaN so callers can drop them.
    """
    if attribute not in CATEGORICAL_ATTRIBUTES:
        raise AttributeTypeError(f"{attribute!r} is not categorical")
    levels = levels_of(attribute, values)
    if not levels:
        raise RankDeficiencyError(f"{attribute!r} has no observed values", [attribute])
    ref = reference_for(attribute, levels, reference)
    others = [c for c in levels if c != ref]
    mat = np.zeros((len(values), len(others)))
    for k, c in enumerate(others):
        mat[:, k] = [v == c for v in values]
    missing = np.array([v is None for v in values])
    mat[missing] = np.nan
    return mat, [f"{attribute}[{c}]" for c in others], ref


def covariate_design(cohort, attributes, references=None, intercept=True):
    """Intercept plus dummy blocks; returns ``(X, names, complete_rows, references)``."""
    references = references or {}
    blocks, names, refs = [], [], {}
    n = len(cohort)
    if intercept:
        blocks.append(np.ones((n, 1)))
        names.append("intercept")
    for attr in attributes:
        mat, cols, ref = dummy_block(attr, cohort.column(attr), references.get(attr))
        blocks.append(mat)
        names.extend(cols)
        refs[attr] = ref
    X = np.hstack(blocks) if blocks else np.zeros((n, 0))
    complete = ~np.isnan(X).any(axis=1)
    return X, names, complete, refs
