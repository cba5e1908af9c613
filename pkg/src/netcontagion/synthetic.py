"""Synthetic cohorts with planted structure.

The generator mimics the survey design: every participant names at most
``nomination_cap`` schoolmates, with a capped-Poisson number of
nominations, targets weighted towards the same school and towards
participants sharing attributes, and independent yes/no context flags.
Traits can be drawn independently of the network or planted through a
contagion mechanism so that estimators can be checked against known truth.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit

from . import rng
from .autocorr import build_weight_matrix, simulate_autocorrelation
from .errors import ConfigurationError, ConvergenceError
from .graph import (ATTRIBUTE_LEVELS, CONTEXTS, Cohort, Nomination, Participant,
                    build_network, encode)

# Attendance counts per ISO week and school (H1..H8); column sums give school sizes.
ATTENDANCE_BY_WEEK = {
    "2010-W38": (32, 0, 0, 0, 0, 0, 0, 0),
    "2010-W39": (24, 0, 0, 0, 0, 0, 0, 0),
    "2010-W40": (36, 0, 0, 0, 0, 0, 0, 0),
    "2010-W41": (36, 0, 0, 0, 0, 0, 0, 0),
    "2010-W42": (35, 0, 0, 0, 0, 0, 0, 0),
    "2010-W43": (30, 0, 0, 0, 0, 0, 0, 0),
    "2010-W44": (6, 16, 0, 0, 0, 0, 0, 0),
    "2010-W45": (0, 40, 0, 0, 0, 0, 0, 0),
    "2010-W46": (0, 42, 0, 0, 0, 0, 0, 0),
    "2010-W47": (0, 32, 0, 0, 0, 0, 0, 0),
    "2010-W48": (0, 6, 0, 0, 0, 0, 0, 28),
    "2010-W49": (4, 0, 0, 0, 0, 0, 0, 34),
    "2010-W50": (4, 4, 0, 0, 0, 0, 0, 31),
    "2011-W01": (0, 2, 0, 0, 0, 0, 6, 27),
    "2011-W02": (0, 0, 0, 0, 0, 0, 43, 0),
    "2011-W03": (0, 0, 0, 0, 0, 0, 45, 0),
    "2011-W04": (0, 0, 0, 0, 0, 0, 40, 0),
    "2011-W05": (0, 0, 0, 0, 0, 0, 46, 0),
    "2011-W06": (0, 0, 30, 0, 0, 0, 10, 0),
    "2011-W07": (0, 0, 41, 0, 0, 0, 0, 0),
    "2011-W08": (0, 0, 44, 0, 0, 0, 2, 0),
    "2011-W09": (0, 0, 43, 0, 0, 0, 0, 0),
    "2011-W11": (0, 0, 8, 12, 17, 0, 0, 0),
    "2011-W12": (0, 0, 0, 4, 18, 19, 0, 0),
    "2011-W13": (0, 0, 0, 15, 24, 5, 0, 0),
    "2011-W14": (0, 0, 0, 22, 26, 0, 0, 0),
    "2011-W15": (0, 0, 2, 31, 0, 2, 0, 0),
    "2011-W17": (0, 0, 0, 14, 0, 0, 0, 0),
}
SCHOOL_IDS = tuple(f"H{k}" for k in range(1, 9))

SURVEY_TARGETS = {
    "n": 1038,
    "edges": 3767,
    "school_homophily_pct": 87.85,
    "same_week_pct": 52.07,
    "prevalence_direct": 0.303,
    "prevalence_enrichment": 0.426,
}

MECHANISMS = ("linear", "threshold", "sar")


@dataclass
class AttributeSpec:
    """Category probabilities, optional missing rate and a homophily weight.

    ``homophily`` multiplies the nomination weight of every candidate who
    shares the nominator's value (1 = no preference).
    """
    probs: dict
    homophily: float = 1.0
    missing: float = 0.0


def _canonical(d, order):
    """``d`` re-keyed in ``order``; keys not in ``order`` follow, sorted."""
    rank = {k: i for i, k in enumerate(order)}
    return {k: d[k] for k in sorted(d, key=lambda k: (rank.get(k, len(rank)), str(k)))}


@dataclass
class CohortConfig:
    n: int
    schools: list
    nomination_cap: int = 5
    mean_out_nominations: float = 3.0
    within_school_bias: float = 1.0
    within_week_bias: float = 1.0
    attribute_specs: dict = field(default_factory=dict)
    trait_prevalence: dict = field(default_factory=lambda: {
        "carriage_direct": 0.3, "carriage_enrichment": 0.4})
    trait_effects: dict = field(default_factory=dict)
    planted_rho: float = None
    contagion_mechanism: str = "linear"
    context_flag_probabilities: dict = field(default_factory=lambda: dict.fromkeys(CONTEXTS, 0.5))
    throat_positive_prevalence: float = 0.0
    n_spa_types: int = 100
    spa_transmission: float = 0.0
    attendance_weeks: dict = None
    representativeness_probs: list = None
    age_mean: float = 16.4
    age_sd: float = 1.24
    seed: int = 0

    def __post_init__(self):
        self.schools = [tuple(s) for s in self.schools]
        specs = {a: s if isinstance(s, AttributeSpec) else AttributeSpec(**s)
                 for a, s in self.attribute_specs.items()}
        # Draw order follows dict order, so fix a canonical one: a config that
        # went through sorted JSON must generate the same cohort.
        for attr, spec in specs.items():
            spec.probs = _canonical(spec.probs, ATTRIBUTE_LEVELS.get(attr, ()))
        self.attribute_specs = _canonical(specs, tuple(ATTRIBUTE_LEVELS))
        self.trait_effects = {a: dict(sorted(v.items())) for a, v in
                              sorted(self.trait_effects.items())}
        if self.attendance_weeks:
            self.attendance_weeks = {sid: dict(sorted(w.items())) for sid, w in
                                     sorted(self.attendance_weeks.items())}
        self.validate()

    def validate(self):
        if sum(size for _, size in self.schools) != self.n:
            raise ConfigurationError("school sizes must sum to n")
        if self.nomination_cap < 1:
            raise ConfigurationError("nomination_cap must be >= 1")
        if min(self.mean_out_nominations, self.within_school_bias, self.within_week_bias) < 0:
            raise ConfigurationError("mean_out_nominations and the biases must be >= 0")
        if self.contagion_mechanism not in MECHANISMS:
            raise ConfigurationError(f"contagion_mechanism must be one of {MECHANISMS}")
        probs = [self.throat_positive_prevalence, self.spa_transmission]
        probs += list(self.trait_prevalence.values())
        probs += list(self.context_flag_probabilities.values())
        for attr, spec in self.attribute_specs.items():
            if attr not in ATTRIBUTE_LEVELS:
                raise ConfigurationError(f"attribute_specs: unknown attribute {attr!r}")
            unknown = set(spec.probs) - set(ATTRIBUTE_LEVELS[attr])
            if unknown:
                raise ConfigurationError(f"attribute_specs[{attr}]: unknown levels {unknown}")
            if not math.isclose(sum(spec.probs.values()), 1.0, rel_tol=1e-6):
                raise ConfigurationError(f"attribute_specs[{attr}]: probabilities must sum to 1")
            if spec.homophily < 0:
                raise ConfigurationError(f"attribute_specs[{attr}]: homophily must be >= 0")
            probs += list(spec.probs.values()) + [spec.missing]
        if any(not 0 <= p <= 1 for p in probs):
            raise ConfigurationError("probabilities must lie in [0, 1]")
        if set(self.context_flag_probabilities) - set(CONTEXTS):
            raise ConfigurationError("context_flag_probabilities: unknown context")
        rng.check_seed(self.seed)

    def to_dict(self):
        d = asdict(self)
        d["schools"] = [list(s) for s in self.schools]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _draw_categorical(gen, spec, size):
    cats = list(spec.probs)
    p = np.array([spec.probs[c] for c in cats], dtype=float)
    draws = gen.choice(len(cats), size=size, p=p / p.sum())
    out = [cats[k] for k in draws]
    if spec.missing:
        miss = gen.random(size) < spec.missing
        out = [None if m else v for v, m in zip(out, miss)]
    return out


def _trait_base_probability(columns, prevalence, effects):
    """Per-node probability with log-odds ``effects`` and marginal ``prevalence``."""
    n = len(next(iter(columns.values()))) if columns else 0
    shift = np.zeros(n)
    for attr, by_cat in (effects or {}).items():
        shift += np.array([by_cat.get(v, 0.0) if v is not None else 0.0
                           for v in columns[attr]])
    if not np.any(shift):
        return np.full(n, prevalence)
    a = optimize.brentq(lambda c: expit(c + shift).mean() - prevalence, -30, 30)
    return expit(a + shift)


def _nominate(config, gen, school_codes, week_codes, attr_codes):
    n = config.n
    cap = min(config.nomination_cap, n - 1)
    counts = np.minimum(gen.poisson(config.mean_out_nominations, size=n), cap)
    factors = [(codes, spec.homophily) for codes, spec in attr_codes if spec.homophily != 1.0]
    noms = []
    ctx_p = np.array([config.context_flag_probabilities.get(c, 0.0) for c in CONTEXTS])
    for i in range(n):
        m = int(counts[i])
        if m == 0:
            continue
        w = np.where(school_codes == school_codes[i], config.within_school_bias, 1.0)
        if config.within_week_bias != 1.0 and week_codes[i] >= 0:
            w *= np.where(week_codes == week_codes[i], config.within_week_bias, 1.0)
        for codes, h in factors:
            if codes[i] >= 0:
                w = w * np.where(codes == codes[i], h, 1.0)
        w[i] = 0.0
        positive = np.count_nonzero(w)
        if positive == 0:
            raise ConfigurationError("all nomination weights are zero for participant "
                                     f"{i}; infeasible configuration")
        m = min(m, positive)
        targets = gen.choice(n, size=m, replace=False, p=w / w.sum())
        flags = gen.random((m, len(CONTEXTS))) < ctx_p
        for t, f in zip(targets, flags):
            noms.append((i, int(t), frozenset(c for c, on in zip(CONTEXTS, f) if on)))
    return noms


def _spa_types(config, gen, network):
    n = config.n
    typed = gen.random(n) < config.throat_positive_prevalence
    ranks = np.arange(1, config.n_spa_types + 1)
    pool_p = 1.0 / ranks ** 0.9
    pool_p /= pool_p.sum()
    labels = [f"t{k:03d}" for k in ranks]
    spa = [None] * n
    adj = network.adjacency
    for i in gen.permutation(n):
        if not typed[i]:
            continue
        nbrs = [j for j in adj.indices[adj.indptr[i]:adj.indptr[i + 1]] if spa[j] is not None]
        if nbrs and gen.random() < config.spa_transmission:
            spa[i] = spa[nbrs[int(gen.integers(len(nbrs)))]]
        else:
            spa[i] = labels[int(gen.choice(len(labels), p=pool_p))]
    return spa


def generate_cohort(config):
    """Draw ``(cohort, nominations)`` from ``config``; identical config -> identical output."""
    config.validate()
    gen = rng.stream(config.seed, rng.COHORT)
    n = config.n
    ids = [f"P{k:04d}" for k in range(1, n + 1)]
    school = [sid for sid, size in config.schools for _ in range(size)]

    columns = {}
    for attr, spec in config.attribute_specs.items():
        if attr == "contraceptive":
            continue
        columns[attr] = _draw_categorical(gen, spec, n)
    if "sex" not in columns:
        columns["sex"] = _draw_categorical(gen, AttributeSpec({"female": 0.5, "male": 0.5}), n)
    if "contraceptive" in config.attribute_specs:
        drawn = _draw_categorical(gen, config.attribute_specs["contraceptive"], n)
        columns["contraceptive"] = [c if s == "female" else None
                                    for c, s in zip(drawn, columns["sex"])]
    age = np.clip(gen.normal(config.age_mean, config.age_sd, size=n), 15.0, 28.0).round(2)
    weeks = [None] * n
    if config.attendance_weeks:
        for sid, by_week in config.attendance_weeks.items():
            members = [k for k, s in enumerate(school) if s == sid]
            labels = list(by_week)
            p = np.array([by_week[w] for w in labels], dtype=float)
            if not members or p.sum() == 0:
                continue
            for k, w in zip(members, gen.choice(len(labels), size=len(members), p=p / p.sum())):
                weeks[k] = labels[w]
    rep = [None] * n
    if config.representativeness_probs:
        p = np.asarray(config.representativeness_probs, dtype=float)
        rep = [int(v) for v in gen.choice(11, size=n, p=p / p.sum())]

    school_codes, _ = encode(school)
    attr_codes = [(encode(columns[a])[0], spec) for a, spec in config.attribute_specs.items()
                  if a in columns]
    raw = _nominate(config, gen, school_codes, encode(weeks)[0], attr_codes)
    nominations = [Nomination(ids[i], ids[j], ctx) for i, j, ctx in raw]

    # traits need the network: draw a provisional cohort first
    def assemble(direct, enrich, spa):
        people = []
        for k in range(n):
            people.append(Participant(
                id=ids[k], sex=columns["sex"][k],
                carriage_direct="positive" if direct[k] else "negative",
                carriage_enrichment="positive" if enrich[k] else "negative",
                age=float(age[k]), school=school[k],
                study_program=columns.get("study_program", [None] * n)[k],
                bmi_category=columns.get("bmi_category", [None] * n)[k],
                smoking=columns.get("smoking", [None] * n)[k],
                snuff=columns.get("snuff", [None] * n)[k],
                alcohol=columns.get("alcohol", [None] * n)[k],
                physical_activity=columns.get("physical_activity", [None] * n)[k],
                contraceptive=columns.get("contraceptive", [None] * n)[k],
                spa_type=spa[k], representativeness=rep[k], attendance_week=weeks[k]))
        return Cohort(people)

    zeros = np.zeros(n, dtype=int)
    provisional = assemble(zeros, zeros, [None] * n)
    network = build_network(provisional, nominations, "overall")

    p_direct = config.trait_prevalence.get("carriage_direct", 0.0)
    p_enrich = max(config.trait_prevalence.get("carriage_enrichment", p_direct), p_direct)
    base = _trait_base_probability(columns, p_direct, config.trait_effects)
    if config.planted_rho:
        direct = plant_contagion(network, config.planted_rho, base,
                                 seed=config.seed, mechanism=config.contagion_mechanism).trait
    else:
        direct = (gen.random(n) < base).astype(int)
    extra = (p_enrich - p_direct) / (1 - p_direct) if p_direct < 1 else 0.0
    enrich = np.where(direct == 1, 1, (gen.random(n) < extra).astype(int))
    spa = _spa_types(config, gen, network) if config.throat_positive_prevalence else [None] * n
    return assemble(direct, enrich, spa), nominations


@dataclass
class ContagionResult:
    trait: np.ndarray
    mechanism: str
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def plant_contagion(network, rho, base_prevalence, covariate_effects=None, seed=0,
                    mechanism="linear", sweeps=60, max_iters=1000, noise_sd=1.0):
    """Assign a 0/1 trait whose distribution depends on neighbours' traits.

    ``base_prevalence`` is a scalar or per-node vector of probabilities in the
    absence of contagion; ``covariate_effects`` (attr -> {category: shift})
    adds to it on the mechanism's own scale.

    ``linear``
        random-scan Gibbs sampling with
        ``P(y_i = 1 | rest) = clip(a_i + rho * positive_friends_i, 0, 1)``,
        where ``a_i`` is scaled so the marginal prevalence stays near
        ``base_prevalence``; ``sweeps`` passes of ``n`` updates.  Regressing
        y on the positive-friend count recovers ``rho``.
    ``threshold``
        each node keeps one uniform draw ``u_i`` and becomes positive when
        ``u_i < expit(logit(base_i) + rho * positive_friends_i)``; updates
        are repeated until nothing changes (``rho`` is a log odds ratio per
        positive friend).
    ``sar``
        the fixed point of ``y = rho W y + X beta + eps`` (raw adjacency,
        standard normal ``eps`` times ``noise_sd``) thresholded at the
        quantile giving ``base_prevalence``.
    """
    if mechanism not in MECHANISMS:
        raise ConfigurationError(f"mechanism must be one of {MECHANISMS}")
    n = network.n_nodes
    base = np.broadcast_to(np.asarray(base_prevalence, dtype=float), (n,)).copy()
    for attr, by_cat in (covariate_effects or {}).items():
        base += np.array([by_cat.get(v, 0.0) if v is not None else 0.0
                          for v in network.values(attr)])
    gen = rng.stream(seed, rng.CONTAGION)
    adj = network.adjacency
    nbrs = [adj.indices[adj.indptr[i]:adj.indptr[i + 1]].tolist() for i in range(n)]

    if mechanism == "sar":
        if np.any((base <= 0) | (base >= 1)):
            raise ConfigurationError("sar mechanism needs base probabilities in (0, 1)")
        W = build_weight_matrix(network, "raw_adjacency")
        # centred offset: a constant would be amplified by centrality and,
        # being negative below 50% prevalence, favour peripheral nodes
        offset = logit(base) - np.mean(logit(base))
        sim = simulate_autocorrelation(W, rho, np.ones((n, 1)), [0.0],
                                       noise=offset + noise_sd * gen.standard_normal(n))
        cut = np.quantile(sim.y, 1 - float(np.mean(base)))
        return ContagionResult(trait=(sim.y > cut).astype(int), mechanism=mechanism,
                               iterations=sim.iterations, converged=True)

    if mechanism == "threshold":
        if np.any((base <= 0) | (base >= 1)):
            raise ConfigurationError("threshold mechanism needs base probabilities in (0, 1)")
        u = gen.random(n)
        offset = logit(base)
        y = np.zeros(n, dtype=int)
        trace = []
        for it in range(1, max_iters + 1):
            k = np.asarray(adj @ y).ravel()
            new = (u < expit(offset + rho * k)).astype(int)
            changed = int(np.sum(new != y))
            trace.append(changed)
            y = new
            if changed == 0:
                return ContagionResult(trait=y, mechanism=mechanism, iterations=it,
                                       converged=True, trace=trace)
        raise ConvergenceError(f"threshold contagion did not reach a fixed point in "
                               f"{max_iters} iterations", trace=trace)

    mean_deg = float(np.mean([len(b) for b in nbrs])) if n else 0.0
    a = (base * (1 - rho * mean_deg)).tolist()
    y = (gen.random(n) < base).astype(int).tolist()
    k = [sum(y[j] for j in nbrs[i]) for i in range(n)]
    order = gen.integers(0, n, size=sweeps * n).tolist()
    draws = gen.random(sweeps * n).tolist()
    for i, u in zip(order, draws):
        p = a[i] + rho * k[i]
        new = 1 if u < p else 0
        if new != y[i]:
            step = new - y[i]
            y[i] = new
            for j in nbrs[i]:
                k[j] += step
    return ContagionResult(trait=np.array(y, dtype=int), mechanism=mechanism,
                           iterations=sweeps, converged=True)


def random_mixing_homophily(network, attribute):
    """Expected same-value edge percentage if edges ignored ``attribute``.

    Uses the degree-weighted category shares of the eligible endpoints.
    """
    codes, cats = network.codes(attribute)
    e = network.edges
    ok = (codes[e[:, 0]] >= 0) & (codes[e[:, 1]] >= 0)
    ends = np.concatenate([codes[e[ok, 0]], codes[e[ok, 1]]])
    share = np.bincount(ends, minlength=len(cats)) / max(len(ends), 1)
    return 100.0 * float(np.sum(share ** 2))


def _capped_poisson_mean(lam, cap):
    k = np.arange(cap)
    return float(np.sum(k * stats.poisson.pmf(k, lam)) + cap * stats.poisson.sf(cap - 1, lam))


class _Cells:
    """Participants grouped into (school, week) cells with equal nomination weights."""

    def __init__(self, cells):
        self.school = [c[0] for c in cells]
        self.week = [c[1] for c in cells]
        self.size = np.array([c[2] for c in cells], dtype=float)
        self.same_school = np.equal.outer(self.school, self.school)
        wk = np.array([w if w is not None else f"?{k}" for k, w in enumerate(self.week)],
                      dtype=object)
        self.same_week = np.equal.outer(wk, wk) & np.array([w is not None for w in self.week])

    def weights(self, school_bias, week_bias):
        return np.where(self.same_school, school_bias, 1.0) * \
            np.where(self.same_week, week_bias, 1.0)

    def targets(self, W):
        # candidate counts per cell pair, without the nominator itself
        cand = np.tile(self.size, (len(self.size), 1)) - np.eye(len(self.size))
        mass = W * cand
        return mass / mass.sum(axis=1, keepdims=True), cand

    def share(self, school_bias, week_bias, mask):
        """Expected % of nominations landing in cells selected by ``mask``."""
        P, _ = self.targets(self.weights(school_bias, week_bias))
        per_cell = (P * mask).sum(axis=1)
        return 100.0 * float(self.size @ per_cell / self.size.sum())

    def edges(self, school_bias, week_bias, mean_out, cap):
        """Expected undirected edges: nominations minus reciprocated pairs."""
        m = _capped_poisson_mean(mean_out, cap)
        P, cand = self.targets(self.weights(school_bias, week_bias))
        # probability that a given i in c names a given j in d
        pij = m * P / np.where(cand > 0, cand, 1)
        recip = 0.5 * float(np.sum(self.size[:, None] * cand * pij * pij.T))
        return self.size.sum() * m - recip


def expected_school_homophily(cells, school_bias, week_bias=1.0):
    """Share (%) of nominations expected to stay in the nominator's school.

    ``cells`` is a list of ``(school, week, size)``.
    """
    c = _Cells(cells)
    return c.share(school_bias, week_bias, c.same_school)


def expected_same_week(cells, school_bias, week_bias=1.0):
    c = _Cells(cells)
    return c.share(school_bias, week_bias, c.same_week)


def expected_edges(cells, school_bias, week_bias, mean_out, cap=5):
    return _Cells(cells).edges(school_bias, week_bias, mean_out, cap)


def calibrate(cells, target_edges, target_school_homophily, target_same_week=None, cap=5):
    """Solve for ``(within_school_bias, within_week_bias, mean_out_nominations)``.

    Without a same-week target the week bias stays at 1.  Each parameter is
    found by root bracketing on the analytic expectations above.
    """
    c = _Cells(cells)

    def school_bias_for(wb):
        f = lambda b: c.share(b, wb, c.same_school) - target_school_homophily  # noqa: E731
        if f(1.0) >= 0:
            return 1.0
        if f(1e6) < 0:
            raise ConfigurationError("school homophily target unreachable")
        return optimize.brentq(f, 1.0, 1e6, xtol=1e-10)

    week_bias = 1.0
    if target_same_week is not None:
        def g(wb):
            return c.share(school_bias_for(wb), wb, c.same_week) - target_same_week
        if g(1.0) < 0:
            if g(1e4) < 0:
                raise ConfigurationError("same-week target unreachable")
            week_bias = optimize.brentq(g, 1.0, 1e4, xtol=1e-10)
    school_bias = school_bias_for(week_bias)
    h = lambda lam: c.edges(school_bias, week_bias, lam, cap) - target_edges  # noqa: E731
    if h(1e3) < 0:
        raise ConfigurationError("edge target unreachable under the nomination cap")
    mean_out = optimize.brentq(h, 1e-6, 1e3, xtol=1e-10)
    return school_bias, week_bias, mean_out


def _spec(counts, homophily=1.0, total=None):
    s = sum(counts.values())
    missing = 1 - s / total if total else 0.0
    return AttributeSpec({k: v / s for k, v in counts.items()}, homophily, max(missing, 0.0))


def survey_shaped_config(seed=0, planted_rho=None, spa_transmission=0.15, **overrides):
    """Configuration shaped after the published cohort summaries.

    School sizes and attendance weeks follow the per-school attendance
    counts; category frequencies follow the population characteristics
    table; attribute homophily weights are the exponentiated dyadic match
    estimates.  The school and week biases and the nomination rate are
    calibrated at call time so that expected school homophily is 87.85%,
    the expected same-week share of nominees is 52.07% and the expected
    edge count is 3767.
    """
    n = SURVEY_TARGETS["n"]
    sizes = [sum(row[k] for row in ATTENDANCE_BY_WEEK.values()) for k in range(8)]
    cells = [(sid, w, row[k]) for w, row in ATTENDANCE_BY_WEEK.items()
             for k, sid in enumerate(SCHOOL_IDS) if row[k]]
    bias, week_bias, mean_out = calibrate(cells, SURVEY_TARGETS["edges"],
                                          SURVEY_TARGETS["school_homophily_pct"],
                                          SURVEY_TARGETS["same_week_pct"])
    weeks = {sid: {w: row[k] for w, row in ATTENDANCE_BY_WEEK.items() if row[k]}
             for k, sid in enumerate(SCHOOL_IDS)}
    specs = {
        "sex": _spec({"male": 530, "female": 508}, math.exp(1.47)),
        "study_program": _spec({"general": 390, "sports": 104, "vocational": 544}),
        "smoking": _spec({"daily": 48, "sometimes": 188, "never": 782}, math.exp(0.22), n),
        "snuff": _spec({"daily": 245, "sometimes": 131, "never": 642}, math.exp(0.31), n),
        "bmi_category": _spec({"underweight": 110, "healthy": 710, "overweight": 147,
                               "obese": 67}, math.exp(0.18), n),
        "physical_activity": _spec({"none": 229, "light": 338, "medium": 259, "hard": 194},
                                   math.exp(0.43), n),
        "alcohol": _spec({"never": 280, "at_most_monthly": 420, "twice_monthly_or_more": 318},
                         math.exp(0.42), n),
        "contraceptive": _spec({"non_user": 327, "progestin_only": 20, "low_estrogen": 50,
                                "high_estrogen": 99}, 1.0, 508),
    }
    cfg = dict(
        n=n, schools=list(zip(SCHOOL_IDS, sizes)), nomination_cap=5,
        mean_out_nominations=mean_out, within_school_bias=bias, within_week_bias=week_bias,
        attribute_specs=specs,
        trait_prevalence={"carriage_direct": SURVEY_TARGETS["prevalence_direct"],
                          "carriage_enrichment": SURVEY_TARGETS["prevalence_enrichment"]},
        trait_effects={"sex": {"male": float(logit(0.364) - logit(0.240))}},
        planted_rho=planted_rho,
        context_flag_probabilities={"physical": 2823 / 3767, "school": 2979 / 3767,
                                    "sports": 598 / 3767, "home": 1247 / 3767,
                                    "other": 1095 / 3767},
        throat_positive_prevalence=746 / 1038, n_spa_types=150,
        spa_transmission=spa_transmission, attendance_weeks=weeks,
        representativeness_probs=[0.02, 0.02, 0.04, 0.07, 0.09, 0.14, 0.14, 0.15, 0.13, 0.10,
                                  0.10],
        seed=seed)
    cfg.update(overrides)
    return CohortConfig(**cfg)


def null_config(n=200, prevalence=0.3, seed=0, schools=1, mean_out=3.0):
    """Small cohort without homophily or contagion (calibration fixture)."""
    base, rem = divmod(n, schools)
    sizes = [base + (k < rem) for k in range(schools)]
    return CohortConfig(
        n=n, schools=[(f"S{k + 1}", s) for k, s in enumerate(sizes)],
        mean_out_nominations=mean_out, within_school_bias=1.0,
        trait_prevalence={"carriage_direct": prevalence, "carriage_enrichment": prevalence},
        seed=seed)
