from fractions import Fraction

import numpy as np
import pytest

from conftest import cohort_of, network_of
from oracles import brute_force_same_counts
from netcontagion import permutation as perm
from netcontagion.errors import DegenerateNullError, SizeError, UndefinedResultError
from netcontagion.graph import ContactNetwork, same_attribute_edge_count


def _random_net(rs, n, p_edge, labels):
    co = cohort_of(n, school=[labels[k] for k in rs.integers(0, len(labels), n)])
    i, j = np.triu_indices(n, 1)
    keep = rs.random(len(i)) < p_edge
    return ContactNetwork(co, np.column_stack([i[keep], j[keep]]))


def test_single_category_relabel_is_identity():
    co = cohort_of(6, school=["x"] * 6)
    net, _ = network_of(co, [("p0", "p1"), ("p2", "p3")])
    for mode in perm.MODES:
        out = perm.randomize_attributes(net, "school", mode=mode, rng_state=3)
        assert list(out) == ["x"] * 6


def test_shuffle_preserves_counts_and_missing(rs):
    vals = ["a", "b", None, "a", "c", None, "a"]
    co = cohort_of(len(vals), spa_type=vals)
    net, _ = network_of(co, [("p0", "p1")])
    out = perm.randomize_attributes(net, "spa_type", rng_state=11)
    assert sorted(v for v in out if v) == sorted(v for v in vals if v)
    assert [v is None for v in out] == [v is None for v in vals]


def test_probability_draw_binomial_mean():
    co = cohort_of(1000, carriage_direct=["positive"] * 300 + ["negative"] * 700)
    net = ContactNetwork(co, np.zeros((0, 2), dtype=int))
    totals = [sum(v == "positive" for v in perm.randomize_attributes(
        net, "carriage_direct", mode="probability_draw", rng_state=r)) for r in range(2000)]
    assert abs(np.mean(totals) - 300) < 5 * np.sqrt(210 / 2000) + 1


def test_result_fields_and_reproducibility(rs):
    net = _random_net(rs, 40, 0.15, ["x", "y"])
    a = perm.homophily_permutation_test(net, "school", n_sims=300, seed=5)
    b = perm.homophily_permutation_test(net, "school", n_sims=300, seed=5, threads=3)
    s = a.sims_summary
    assert s["min"] <= s["q1"] <= s["median"] <= s["q3"] <= s["max"]
    assert 0 <= a.p_value <= 1
    assert a.observed == same_attribute_edge_count(net, "school")
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.sims, b.sims)
    assert not np.array_equal(a.sims, perm.homophily_permutation_test(
        net, "school", n_sims=300, seed=6).sims)


def test_degenerate_null():
    co = cohort_of(4, school=["x"] * 4)
    net, _ = network_of(co, [("p0", "p1"), ("p2", "p3")])
    res = perm.homophily_permutation_test(net, "school", n_sims=20, seed=1)
    assert res.p_value == 1.0
    co2 = cohort_of(4, school=["x", "y", "x", "y"])
    with pytest.raises(UndefinedResultError):
        perm.homophily_permutation_test(ContactNetwork(co2, np.zeros((0, 2), int)), "school")


def test_constant_null_with_different_observed_raises():
    with pytest.raises(DegenerateNullError):
        perm._normal_pvalues(3, 2.0, 0.0)


def test_exact_examples():
    co = cohort_of(2, school=["+", "-"])
    k2, _ = network_of(co, [("p0", "p1")])
    assert perm.exact_permutation_pvalue(k2, "school").p_value == 1
    co = cohort_of(3, school=["+", "+", "-"])
    path, _ = network_of(co, [("p0", "p1"), ("p1", "p2")])
    res = perm.exact_permutation_pvalue(path, "school")
    assert res.observed == 1 and res.n_arrangements == 3
    assert res.p_greater == Fraction(2, 3) and res.p_value == 1
    # star K1,3 centre +, leaves +,-,-: whatever the centre holds, one leaf matches it
    co = cohort_of(4, school=["+", "+", "-", "-"])
    star, _ = network_of(co, [("p0", "p1"), ("p0", "p2"), ("p0", "p3")])
    res = perm.exact_permutation_pvalue(star, "school")
    assert res.n_arrangements == 6
    assert res.distribution == {1: Fraction(1)}
    assert res.p_value == 1
    # with three + labels the centre decides: 2 same edges (centre +, 3/4) or 0
    co = cohort_of(4, school=["+", "+", "+", "-"])
    star, _ = network_of(co, [("p0", "p1"), ("p0", "p2"), ("p0", "p3")])
    res = perm.exact_permutation_pvalue(star, "school")
    assert res.distribution == {0: Fraction(1, 4), 2: Fraction(3, 4)}
    assert res.observed == 2 and res.p_greater == Fraction(3, 4) and res.p_value == 1


def test_exact_matches_brute_force(rs):
    for _ in range(10):
        net = _random_net(rs, 6, 0.5, ["x", "y", "z"])
        codes, _ = net.codes("school")
        res = perm.exact_permutation_pvalue(net, "school")
        assert res.distribution == brute_force_same_counts(codes, net.edges.tolist())


def test_exact_size_limit(rs):
    net = _random_net(rs, 13, 0.3, ["x", "y"])
    with pytest.raises(SizeError):
        perm.exact_permutation_pvalue(net, "school")


def test_category_covering_everyone_reduces_to_homophily(rs):
    n = 30
    co = cohort_of(n, carriage_direct=["positive" if rs.random() < 0.4 else "negative"
                                       for _ in range(n)], school=["H1"] * n)
    i, j = np.triu_indices(n, 1)
    keep = rs.random(len(i)) < 0.2
    net = ContactNetwork(co, np.column_stack([i[keep], j[keep]]))
    cat = perm.category_transmission_test(net, "direct", "school", "H1", n_sims=200, seed=9)
    hom = perm.homophily_permutation_test(net, "carriage_direct", n_sims=200, seed=9,
                                          restrict_value="positive")
    assert cat.observed == hom.observed
    assert cat.within["summary"] == hom.sims_summary
    assert cat.global_null["summary"] == hom.sims_summary
    assert cat.p_value == pytest.approx(hom.p_value)
    assert cat.p_null_contrast == 1.0


def test_category_without_edges():
    co = cohort_of(4, sex=["male", "female", "male", "female"])
    net, _ = network_of(co, [("p0", "p1"), ("p2", "p3")])
    with pytest.raises(UndefinedResultError):
        perm.category_transmission_test(net, "direct", "sex", "male", n_sims=10, seed=1)


def test_monte_carlo_tail_is_calibrated_against_exact():
    # z of the MC upper tail around the exact value, over many seeds
    co = cohort_of(9, school=["c1", "c1", "c0", "c1", "c0", "c1", "c0", "c1", "c0"])
    pairs = [(0, 1), (0, 3), (1, 5), (2, 4), (2, 6), (3, 7), (4, 8), (5, 7), (6, 8), (1, 2),
             (3, 4), (7, 8)]
    net, _ = network_of(co, [(f"p{a}", f"p{b}") for a, b in pairs])
    p = float(perm.exact_permutation_pvalue(net, "school").p_greater)
    n = 2000
    zs = []
    for seed in range(60):
        res = perm.homophily_permutation_test(net, "school", n_sims=n, seed=seed)
        tail = np.mean(np.asarray(res.sims) >= res.observed)
        zs.append((tail - p) / np.sqrt(p * (1 - p) / n))
    assert abs(np.mean(zs)) < 0.5
    assert 0.7 < np.std(zs) < 1.3
