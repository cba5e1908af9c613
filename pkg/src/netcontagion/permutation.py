"""Fixed-topology attribute randomisation tests.

The network's nodes and edges are held fixed; only the node labels are
re-drawn.  Two null mechanisms are available:

``marginal_shuffle``
    uniform random permutation of the observed non-missing labels over the
    non-missing nodes (category counts preserved exactly);
``probability_draw``
    independent draws from the empirical (or a supplied) category
    distribution for every non-missing node.

Replicate ``r`` of a test with seed ``s`` always reads the counter-based
stream ``(s, r)``, so results are identical for any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import rng
from .errors import ConfigurationError, DegenerateNullError, SizeError, UndefinedResultError
from .graph import check_attribute, resolve_trait

MODES = ("marginal_shuffle", "probability_draw")
ALTERNATIVES = ("two-sided", "greater")
EXACT_MAX_NODES = 12
EXACT_MAX_ARRANGEMENTS = 2_000_000


def _check_mode(mode):
    if mode not in MODES:
        raise ConfigurationError(f"unknown randomisation mode {mode!r}; expected {MODES}")
    return mode


def _draw_probs(codes, n_cats, category_probs=None, categories=None):
    if category_probs is None:
        counts = np.bincount(codes[codes >= 0], minlength=n_cats).astype(float)
        return counts / counts.sum()
    probs = np.array([float(category_probs.get(c, 0.0)) for c in categories])
    extra = set(category_probs) - set(categories)
    if extra:
        raise ConfigurationError(f"category_probs names unobserved categories {sorted(extra)}")
    if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, rel_tol=1e-9):
        raise ConfigurationError("category_probs must be non-negative and sum to 1")
    return probs


def _relabel(codes, movable, mode, probs, gen):
    out = codes.copy()
    if mode == "marginal_shuffle":
        out[movable] = gen.permutation(codes[movable])
    else:
        out[movable] = gen.choice(len(probs), size=len(movable), p=probs)
    return out


def randomize_attributes(network, attribute, mode="marginal_shuffle", rng_state=0,
                         category_probs=None):
    """One random relabelling of ``attribute`` over the network's nodes.

    ``rng_state`` is either a seed (stream index 0 is used) or a
    ``numpy.random.Generator``.  Missing values stay missing and in place.
    Returns a list of values in cohort order.
    """
    check_attribute(attribute)
    _check_mode(mode)
    codes, cats = network.codes(attribute)
    gen = rng_state if isinstance(rng_state, np.random.Generator) else \
        rng.stream(rng_state, rng.PERMUTATION, 0)
    movable = np.flatnonzero(codes >= 0)
    if not len(movable):
        return list(network.values(attribute))
    probs = _draw_probs(codes, len(cats), category_probs, cats)
    new = _relabel(codes, movable, mode, probs, gen)
    return [cats[c] if c >= 0 else None for c in new]


def _same_count(codes, u, v, restrict):
    a, b = codes[u], codes[v]
    if restrict is None:
        return int(np.count_nonzero((a == b) & (a >= 0)))
    return int(np.count_nonzero((a == restrict) & (b == restrict)))


def simulate_null(codes, u, v, movable, n_sims, seed, mode="marginal_shuffle", probs=None,
                  restrict=None, threads=None, purpose=rng.PERMUTATION):
    """Replicate statistics under the null; returns an int array of length ``n_sims``.

    ``u, v`` are the edge endpoint arrays the statistic is counted over and
    ``movable`` the node indices whose labels are re-drawn.
    """
    _check_mode(mode)
    if probs is None and mode == "probability_draw":
        probs = _draw_probs(codes, int(codes.max()) + 1)
    threads = threads or rng.default_threads()
    out = np.empty(n_sims, dtype=np.int64)

    def run(block):
        for r in block:
            gen = rng.stream(seed, purpose, r)
            out[r] = _same_count(_relabel(codes, movable, mode, probs, gen), u, v, restrict)

    if threads == 1 or n_sims < 2:
        run(range(n_sims))
    else:
        step = math.ceil(n_sims / threads)
        blocks = [range(s, min(s + step, n_sims)) for s in range(0, n_sims, step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, blocks))
    return out


def summarize(sims):
    q = np.percentile(sims, [0, 25, 50, 75, 100])
    return {
        "min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
        "q3": float(q[3]), "max": float(q[4]),
        "mean": float(np.mean(sims)),
        "sd": float(np.std(sims, ddof=1)) if len(sims) > 1 else 0.0,
    }


def _normal_pvalues(observed, mean, sd):
    """(z, two-sided p, upper-tail p) of ``observed`` against N(mean, sd^2)."""
    if sd == 0:
        if observed == mean:
            return 0.0, 1.0, 1.0
        raise DegenerateNullError(
            f"null distribution is constant at {mean} but observed {observed}")
    z = (observed - mean) / sd
    return z, float(2 * stats.norm.sf(abs(z))), float(stats.norm.sf(z))


def _empirical_pvalues(observed, sims):
    n = len(sims)
    upper = (1 + int(np.count_nonzero(sims >= observed))) / (n + 1)
    lower = (1 + int(np.count_nonzero(sims <= observed))) / (n + 1)
    return upper, lower, min(1.0, 2 * min(upper, lower))


@dataclass
class PermutationTestResult:
    layer: str
    attribute: str
    observed: int
    n_edges: int
    n_eligible_edges: int
    n_sims: int
    sims_summary: dict
    p_value: float
    alternative: str
    z: float
    p_normal_two_sided: float
    p_normal_greater: float
    p_empirical_greater: float
    p_empirical_less: float
    p_empirical_two_sided: float
    seed: int
    mode: str
    restrict_value: str = None
    sims: np.ndarray = field(default=None, repr=False)

    def to_dict(self, include_sims=False):
        d = asdict(self)
        d.pop("sims")
        if include_sims:
            d["sims"] = [int(s) for s in self.sims]
        return d


def _finish(layer, attribute, observed, n_edges, n_eligible, sims, seed, mode,
            alternative, restrict_value):
    summary = summarize(sims)
    z, p2, pg = _normal_pvalues(observed, summary["mean"], summary["sd"])
    eg, el, e2 = _empirical_pvalues(observed, sims)
    return PermutationTestResult(
        layer=layer, attribute=attribute, observed=int(observed), n_edges=int(n_edges),
        n_eligible_edges=int(n_eligible), n_sims=len(sims), sims_summary=summary,
        p_value=p2 if alternative == "two-sided" else pg, alternative=alternative,
        z=float(z), p_normal_two_sided=p2, p_normal_greater=pg,
        p_empirical_greater=eg, p_empirical_less=el, p_empirical_two_sided=e2,
        seed=seed, mode=mode, restrict_value=restrict_value, sims=sims)


def _check_alternative(alternative):
    if alternative not in ALTERNATIVES:
        raise ConfigurationError(f"alternative must be one of {ALTERNATIVES}")
    return alternative


def homophily_permutation_test(network, attribute, n_sims=1000, seed=None,
                               mode="marginal_shuffle", restrict_value=None,
                               alternative="two-sided", category_probs=None, threads=None):
    """Observed same-attribute edge count against a label-randomised null.

    The headline ``p_value`` is the normal-theory tail of the observed count
    against the mean and standard deviation of the replicates (two-sided by
    default; ``alternative="greater"`` gives the upper tail).  Empirical
    add-one tail fractions are reported alongside.
    """
    check_attribute(attribute)
    _check_mode(mode)
    _check_alternative(alternative)
    if n_sims < 2:
        raise ConfigurationError("n_sims must be at least 2")
    seed = rng.fresh_seed() if seed is None else rng.check_seed(seed)
    codes, cats = network.codes(attribute)
    e = network.edges
    eligible = (codes[e[:, 0]] >= 0) & (codes[e[:, 1]] >= 0)
    if not eligible.any():
        raise UndefinedResultError(f"no eligible edge for attribute {attribute!r}")
    restrict = None
    if restrict_value is not None:
        restrict = cats.index(restrict_value) if restrict_value in cats else -2
    u, v = e[eligible, 0], e[eligible, 1]
    observed = _same_count(codes, u, v, restrict)
    movable = np.flatnonzero(codes >= 0)
    probs = _draw_probs(codes, len(cats), category_probs, cats) \
        if mode == "probability_draw" else None
    sims = simulate_null(codes, u, v, movable, n_sims, seed, mode, probs, restrict, threads)
    return _finish(network.layer, attribute, observed, network.n_edges, len(u), sims, seed,
                   mode, alternative, restrict_value)


@dataclass
class CategoryTransmissionResult:
    layer: str
    trait: str
    risk_attribute: str
    category: str
    observed: int
    n_category_nodes: int
    n_within_edges: int
    n_sims: int
    seed: int
    p_value: float
    p_value_greater: float
    within: dict
    global_null: dict
    p_null_contrast: float

    def to_dict(self):
        return asdict(self)


def category_transmission_test(network, trait, risk_attr, category, n_sims=1000, seed=None,
                               threads=None):
    """Clustering of trait-positive pairs inside one category of a risk factor.

    Statistic: edges whose endpoints both belong to ``category`` and are both
    trait-positive.  Two nulls share replicate streams:

    * global null: trait labels shuffled over the whole network;
    * within null: trait labels shuffled only among members of the category,
      everything else fixed.

    ``p_value`` (two-sided) and ``p_value_greater`` score the observed
    statistic against the within null; ``global_null`` holds the same for the
    global null, and ``p_null_contrast`` is a Welch comparison of the two
    replicate distributions.  When the category covers every node both nulls
    coincide with :func:`homophily_permutation_test` restricted to positives.
    """
    attr = resolve_trait(trait)
    check_attribute(risk_attr)
    if n_sims < 2:
        raise ConfigurationError("n_sims must be at least 2")
    seed = rng.fresh_seed() if seed is None else rng.check_seed(seed)
    codes, cats = network.codes(attr)
    pos = cats.index("positive") if "positive" in cats else -2
    in_cat = np.array([v == category for v in network.values(risk_attr)], dtype=bool)
    if not in_cat.any():
        raise UndefinedResultError(f"category {risk_attr}={category!r} has no members")
    e = network.edges
    within = in_cat[e[:, 0]] & in_cat[e[:, 1]]
    if not within.any():
        raise UndefinedResultError(f"no edge inside category {risk_attr}={category!r}")
    u, v = e[within, 0], e[within, 1]
    observed = _same_count(codes, u, v, pos)

    observed_nodes = codes >= 0
    sims_global = simulate_null(codes, u, v, np.flatnonzero(observed_nodes), n_sims, seed,
                                restrict=pos, threads=threads)
    sims_within = simulate_null(codes, u, v, np.flatnonzero(observed_nodes & in_cat), n_sims,
                                seed, restrict=pos, threads=threads)

    def score(sims):
        summary = summarize(sims)
        z, p2, pg = _normal_pvalues(observed, summary["mean"], summary["sd"])
        eg, el, e2 = _empirical_pvalues(observed, sims)
        return {"summary": summary, "z": z, "p_two_sided": p2, "p_greater": pg,
                "p_empirical_greater": eg, "p_empirical_two_sided": e2}

    w, g = score(sims_within), score(sims_global)
    if np.var(sims_global) == 0 and np.var(sims_within) == 0:
        contrast = 1.0 if sims_global[0] == sims_within[0] else 0.0
    else:
        contrast = float(stats.ttest_ind(sims_global, sims_within, equal_var=False).pvalue)
        if math.isnan(contrast):
            contrast = 1.0
    return CategoryTransmissionResult(
        layer=network.layer, trait=attr, risk_attribute=risk_attr, category=category,
        observed=observed, n_category_nodes=int(in_cat.sum()), n_within_edges=len(u),
        n_sims=n_sims, seed=seed, p_value=w["p_two_sided"], p_value_greater=w["p_greater"],
        within=w, global_null=g, p_null_contrast=contrast)


def _multiset_arrangements(labels):
    """Yield every distinct ordering of ``labels`` (a sorted tuple) once."""
    counts = {}
    for x in labels:
        counts[x] = counts.get(x, 0) + 1
    keys = sorted(counts)
    n = len(labels)
    current = [None] * n

    def rec(pos):
        if pos == n:
            yield tuple(current)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                current[pos] = k
                yield from rec(pos + 1)
                counts[k] += 1

    yield from rec(0)


@dataclass
class ExactPermutationResult:
    observed: int
    n_arrangements: int
    distribution: dict
    p_greater: Fraction
    p_less: Fraction
    p_value: Fraction

    def __float__(self):
        return float(self.p_value)


def exact_permutation_pvalue(network, attribute, restrict_value=None):
    """Exact permutation distribution of the same-attribute edge count.

    Enumerates every distinct arrangement of the observed non-missing labels
    over the non-missing nodes (all equally likely under a uniform shuffle).
    The two-sided p-value doubles the smaller tail and is capped at 1.
    Probabilities are exact ``Fraction`` objects.
    """
    check_attribute(attribute)
    codes, cats = network.codes(attribute)
    movable = np.flatnonzero(codes >= 0)
    if len(movable) > EXACT_MAX_NODES:
        raise SizeError(f"{len(movable)} labelled nodes; exact enumeration is limited to "
                        f"{EXACT_MAX_NODES}")
    labels = tuple(sorted(codes[movable]))
    n_arr = math.factorial(len(labels))
    for k in set(labels):
        n_arr //= math.factorial(labels.count(k))
    if n_arr > EXACT_MAX_ARRANGEMENTS:
        raise SizeError(f"{n_arr} distinct arrangements exceed {EXACT_MAX_ARRANGEMENTS}")
    restrict = None
    if restrict_value is not None:
        restrict = cats.index(restrict_value) if restrict_value in cats else -2
    e = network.edges
    eligible = (codes[e[:, 0]] >= 0) & (codes[e[:, 1]] >= 0)
    u, v = e[eligible, 0], e[eligible, 1]
    observed = _same_count(codes, u, v, restrict)
    tally = {}
    work = codes.copy()
    for arrangement in (_multiset_arrangements(labels) if labels else [()]):
        work[movable] = arrangement
        s = _same_count(work, u, v, restrict)
        tally[s] = tally.get(s, 0) + 1
    total = sum(tally.values())
    dist = {s: Fraction(c, total) for s, c in sorted(tally.items())}
    upper = sum((p for s, p in dist.items() if s >= observed), Fraction(0))
    lower = sum((p for s, p in dist.items() if s <= observed), Fraction(0))
    return ExactPermutationResult(observed=observed, n_arrangements=total, distribution=dist,
                                  p_greater=upper, p_less=lower,
                                  p_value=min(Fraction(1), 2 * min(upper, lower)))
