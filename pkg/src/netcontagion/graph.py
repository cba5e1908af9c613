"""Participants, nominations and layered contact networks.

Nominations are directed ("A named B") and carry the set of contact
contexts the nominator confirmed.  Every edge statistic works on the
undirected simple graph obtained by collapsing nominations of one layer;
popularity is the only quantity that keeps direction.
"""

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import sparse

from .errors import ConfigurationError, UndefinedResultError, UnknownNodeError

log = logging.getLogger(__name__)

CONTEXTS = ("physical", "school", "sports", "home", "other")
LAYERS = ("overall",) + CONTEXTS

# Closed vocabularies; order matters only for display.
ATTRIBUTE_LEVELS = {
    "sex": ("female", "male"),
    "study_program": ("general", "sports", "vocational"),
    "bmi_category": ("underweight", "healthy", "overweight", "obese"),
    "smoking": ("daily", "sometimes", "never"),
    "snuff": ("daily", "sometimes", "never"),
    "alcohol": ("never", "at_most_monthly", "twice_monthly_or_more"),
    "physical_activity": ("none", "light", "medium", "hard"),
    "contraceptive": ("non_user", "progestin_only", "low_estrogen", "high_estrogen"),
    "carriage_direct": ("positive", "negative"),
    "carriage_enrichment": ("positive", "negative"),
}
OPEN_CATEGORICAL = ("school", "spa_type", "attendance_week")
NUMERIC_ATTRIBUTES = ("age", "representativeness")
CATEGORICAL_ATTRIBUTES = tuple(ATTRIBUTE_LEVELS) + OPEN_CATEGORICAL

TRAITS = {
    "direct": "carriage_direct",
    "enrichment": "carriage_enrichment",
    "carriage_direct": "carriage_direct",
    "carriage_enrichment": "carriage_enrichment",
}

BMI_CUTPOINTS = (18.5, 25.0, 30.0)


def bmi_category_from_value(bmi):
    """Map a raw BMI (kg/m^2) onto the four-level category."""
    if bmi is None or (isinstance(bmi, float) and math.isnan(bmi)):
        return None
    if bmi < BMI_CUTPOINTS[0]:
        return "underweight"
    if bmi < BMI_CUTPOINTS[1]:
        return "healthy"
    if bmi < BMI_CUTPOINTS[2]:
        return "overweight"
    return "obese"


def resolve_trait(trait):
    try:
        return TRAITS[trait]
    except KeyError:
        raise ConfigurationError(
            f"unknown trait {trait!r}; expected one of {sorted(TRAITS)}") from None


def check_attribute(attribute):
    if attribute not in CATEGORICAL_ATTRIBUTES and attribute not in NUMERIC_ATTRIBUTES:
        raise ConfigurationError(f"unknown attribute {attribute!r}")
    return attribute


def check_layer(layer):
    if layer not in LAYERS:
        raise ConfigurationError(f"unknown layer {layer!r}; expected one of {LAYERS}")
    return layer


@dataclass(frozen=True)
class Participant:
    """One cohort member.  ``None`` marks a missing value."""

    id: str
    sex: str
    carriage_direct: str
    carriage_enrichment: str
    age: float = None
    school: str = None
    study_program: str = None
    bmi_category: str = None
    smoking: str = None
    snuff: str = None
    alcohol: str = None
    physical_activity: str = None
    contraceptive: str = None
    spa_type: str = None
    representativeness: int = None
    attendance_week: str = None

    def __post_init__(self):
        if not self.id:
            raise ConfigurationError("participant id must be a non-empty token")
        for name, levels in ATTRIBUTE_LEVELS.items():
            value = getattr(self, name)
            if value is not None and value not in levels:
                raise ConfigurationError(
                    f"participant {self.id}: {name}={value!r} not in {levels}")
        for name in ("sex", "carriage_direct", "carriage_enrichment"):
            if getattr(self, name) is None:
                raise ConfigurationError(f"participant {self.id}: {name} is required")
        if self.contraceptive is not None and self.sex != "female":
            raise ConfigurationError(
                f"participant {self.id}: contraceptive recorded for sex={self.sex}")
        if self.representativeness is not None and not 0 <= self.representativeness <= 10:
            raise ConfigurationError(
                f"participant {self.id}: representativeness {self.representativeness} "
                "outside [0, 10]")


PARTICIPANT_FIELDS = tuple(f.name for f in fields(Participant))


@dataclass(frozen=True)
class Nomination:
    source: str
    target: str
    contexts: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.source == self.target:
            raise ConfigurationError(f"self-nomination by {self.source}")
        object.__setattr__(self, "contexts", frozenset(self.contexts))
        unknown = self.contexts - set(CONTEXTS)
        if unknown:
            raise ConfigurationError(f"unknown contexts {sorted(unknown)}")

    @property
    def flagless(self):
        return not self.contexts

    def in_layer(self, layer):
        return layer == "overall" or layer in self.contexts


class Cohort:
    """Ordered, id-indexed collection of participants."""

    def __init__(self, participants):
        self.participants = tuple(participants)
        self._index = {}
        for i, p in enumerate(self.participants):
            if p.id in self._index:
                raise ConfigurationError(f"duplicate participant id {p.id!r}")
            self._index[p.id] = i

    def __len__(self):
        return len(self.participants)

    def __iter__(self):
        return iter(self.participants)

    def __contains__(self, pid):
        return pid in self._index

    def __eq__(self, other):
        return isinstance(other, Cohort) and self.participants == other.participants

    def __repr__(self):
        return f"Cohort(n={len(self)})"

    @property
    def ids(self):
        return tuple(p.id for p in self.participants)

    def index_of(self, pid):
        try:
            return self._index[pid]
        except KeyError:
            raise UnknownNodeError(pid) from None

    def get(self, pid):
        return self.participants[self.index_of(pid)]

    def column(self, attribute):
        check_attribute(attribute)
        return [getattr(p, attribute) for p in self.participants]

    def subset(self, keep):
        """Cohort restricted to participants for which ``keep(p)`` is true."""
        return Cohort(p for p in self.participants if keep(p))


def encode(values):
    """Integer-code a categorical column; missing -> -1.

    Categories are ordered by first appearance of their sorted string form so
    codes are stable for a given multiset of values.
    """
    cats = sorted({v for v in values if v is not None}, key=str)
    lookup = {c: k for k, c in enumerate(cats)}
    codes = np.fromiter((lookup[v] if v is not None else -1 for v in values),
                        dtype=np.int64, count=len(values))
    return codes, tuple(cats)


class ContactNetwork:
    """Undirected simple graph over the full cohort for one layer.

    ``edges`` is an ``(m, 2)`` integer array of node indices with
    ``edges[:, 0] < edges[:, 1]``, sorted lexicographically; it is read-only.
    """

    def __init__(self, cohort, edges, layer="overall"):
        self.cohort = cohort
        self.layer = check_layer(layer)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            if np.any(lo == hi):
                raise ConfigurationError("self-loop in edge list")
            edges = np.unique(np.column_stack([lo, hi]), axis=0)
            if edges.max() >= len(cohort) or edges.min() < 0:
                raise ConfigurationError("edge endpoint outside cohort")
        edges.setflags(write=False)
        self.edges = edges
        self._adjacency = None

    def __repr__(self):
        return f"ContactNetwork(layer={self.layer!r}, n={self.n_nodes}, m={self.n_edges})"

    @property
    def n_nodes(self):
        return len(self.cohort)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def ids(self):
        return self.cohort.ids

    def edge_set(self):
        ids = self.ids
        return {frozenset((ids[i], ids[j])) for i, j in self.edges}

    def has_edge(self, a, b):
        i, j = sorted((self.cohort.index_of(a), self.cohort.index_of(b)))
        return bool(self.adjacency[i, j])

    @property
    def adjacency(self):
        """Symmetric 0/1 CSR adjacency matrix (cached)."""
        if self._adjacency is None:
            n = self.n_nodes
            i, j = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * len(i))
            adj = sparse.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))
            self._adjacency = adj
        return self._adjacency

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def neighbors(self, pid):
        i = self.cohort.index_of(pid)
        row = self.adjacency.getrow(i)
        ids = self.ids
        return tuple(ids[j] for j in sorted(row.indices))

    def values(self, attribute):
        return self.cohort.column(attribute)

    def codes(self, attribute):
        return encode(self.values(attribute))

    def subgraph(self, keep):
        """Induced subgraph on participants with ``keep(p)`` true."""
        old_ids = self.ids
        sub = self.cohort.subset(keep)
        mask = np.array([pid in sub for pid in old_ids], dtype=bool)
        new_index = np.cumsum(mask) - 1
        e = self.edges
        inside = mask[e[:, 0]] & mask[e[:, 1]] if len(e) else np.zeros(0, bool)
        return ContactNetwork(sub, new_index[e[inside]], self.layer)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        for p in self.cohort:
            g.add_node(p.id)
        ids = self.ids
        g.add_edges_from((ids[i], ids[j]) for i, j in self.edges)
        return g


def build_network(cohort, nominations, layer="overall"):
    """Collapse directed nominations of one layer into an undirected network.

    A nomination in either direction creates the edge; reciprocal and
    repeated nominations collapse to one.  Nominations without any context
    flag contribute to the overall layer only.
    """
    check_layer(layer)
    pairs = []
    n_flagless = 0
    for nom in nominations:
        if nom.flagless:
            n_flagless += 1
        if not nom.in_layer(layer):
            continue
        i, j = cohort.index_of(nom.source), cohort.index_of(nom.target)
        pairs.append((i, j))
    if n_flagless and layer == "overall":
        log.info("%d nomination(s) carry no context flag; kept in the overall layer only",
                    n_flagless)
    net = ContactNetwork(cohort, np.array(pairs, dtype=np.int64).reshape(-1, 2), layer)
    log.debug("built %s layer: %d edges", layer, net.n_edges)
    return net


def build_layers(cohort, nominations):
    return {layer: build_network(cohort, nominations, layer) for layer in LAYERS}


def popularity_vector(network, nominations):
    """Distinct in-layer nominators per node, in cohort order."""
    idx = network.cohort._index
    seen = set()
    counts = np.zeros(network.n_nodes, dtype=np.int64)
    for nom in nominations:
        if not nom.in_layer(network.layer):
            continue
        if nom.source not in idx or nom.target not in idx:
            continue
        key = (nom.source, nom.target)
        if key in seen:
            continue
        seen.add(key)
        counts[idx[nom.target]] += 1
    return counts


def popularity(network, nominations, pid):
    """Number of distinct participants nominating ``pid`` in the network's layer."""
    i = network.cohort.index_of(pid)
    return int(popularity_vector(network, nominations)[i])


def _matching_edges(network, attribute, restrict_value=None):
    """Boolean masks (eligible, same) over the edge array."""
    check_attribute(attribute)
    codes, cats = network.codes(attribute)
    e = network.edges
    a, b = codes[e[:, 0]], codes[e[:, 1]]
    eligible = (a >= 0) & (b >= 0)
    same = eligible & (a == b)
    if restrict_value is not None:
        if restrict_value in cats:
            same &= a == cats.index(restrict_value)
        else:
            same &= False
    return eligible, same


def same_attribute_edge_count(network, attribute, restrict_value=None):
    """Edges whose endpoints share a non-missing value (optionally a given one)."""
    return int(_matching_edges(network, attribute, restrict_value)[1].sum())


def homophily_fraction(network, attribute):
    """Percentage of eligible edges joining equal attribute values.

    Edges touching a missing value are left out of the denominator.
    """
    eligible, same = _matching_edges(network, attribute)
    n = int(eligible.sum())
    if n == 0:
        raise UndefinedResultError(
            f"no edge has both endpoints observed on {attribute!r}")
    return 100.0 * same.sum() / n


def trait_indicator(network, trait):
    """0/1 vector of trait positivity in cohort order."""
    attr = resolve_trait(trait)
    return np.array([v == "positive" for v in network.values(attr)], dtype=np.int64)


def positive_friend_counts(network, trait):
    y = trait_indicator(network, trait)
    return np.asarray(network.adjacency @ y, dtype=np.int64)


def positive_friend_count(network, trait, pid):
    """Number of neighbours of ``pid`` that are trait-positive."""
    return int(positive_friend_counts(network, trait)[network.cohort.index_of(pid)])
