import numpy as np
import pytest

from conftest import cohort_of, network_of
from oracles import dyadic_mle_two_groups, newton_logistic
from netcontagion import ergm
from netcontagion.graph import Cohort, ContactNetwork


def test_enumerate_dyads_small():
    co = cohort_of(3, sex=["male", "male", "female"])
    net, _ = network_of(co, [("p0", "p1")])
    d = ergm.enumerate_dyads(net, ["sex", "spa_type"])
    assert len(d) == 3
    assert d.response.tolist() == [1, 0, 0]
    assert d.match["sex"].tolist() == [1.0, 0.0, 0.0]
    assert np.isnan(d.match["spa_type"]).all()


def test_full_cohort_dyad_count():
    co = cohort_of(1038)
    net = ContactNetwork(co, np.array([[0, 1]]))
    assert len(ergm.enumerate_dyads(net)) == 538203


def _four_node():
    co = cohort_of(4, school=["a", "a", "b", "b"])
    net, _ = network_of(co, [("p0", "p1"), ("p1", "p2")])
    return net


def test_four_node_grid_oracle():
    # 2 same-school dyads (1 edge), 4 cross dyads (1 edge): closed-form MLE
    fit = ergm.fit_dyadic_ergm(_four_node(), ["school"])
    e_hat, m_hat = dyadic_mle_two_groups(2, 1, 4, 1)
    grid_e = np.linspace(-3, 1, 4001)
    grid_m = np.linspace(-2, 4, 6001)

    def ll(e, m):
        pd, ps = 1 / (1 + np.exp(-e)), 1 / (1 + np.exp(-(e + m)))
        return np.log(ps) + np.log(1 - ps) + np.log(pd) + 3 * np.log(1 - pd)

    # coarse grid, then local refinement around the best cell
    E, M = np.meshgrid(grid_e[::40], grid_m[::40], indexing="ij")
    k = np.unravel_index(np.argmax(ll(E, M)), E.shape)
    e0, m0 = E[k], M[k]
    for step in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        cand = [(e0 + a * step, m0 + b * step) for a in range(-20, 21) for b in range(-20, 21)]
        e0, m0 = max(cand, key=lambda t: ll(*t))
    assert fit.estimate("edges") == pytest.approx(e0, abs=1e-6)
    assert fit.estimate("nodematch.school") == pytest.approx(m0, abs=1e-6)
    assert fit.estimate("edges") == pytest.approx(e_hat, abs=1e-8)
    assert fit.estimate("nodematch.school") == pytest.approx(m_hat, abs=1e-8)


def test_equals_logistic_on_dyads_and_score_equation(rs):
    n = 60
    co = cohort_of(n, sex=list(rs.choice(["male", "female"], n)),
                   school=list(rs.choice(["a", "b", "c"], n)))
    net = ergm.simulate_dyadic_ergm(co, -2.5, {"school": 1.2}, seed=4)
    fit = ergm.fit_dyadic_ergm(net, ["school", "sex"])
    d = ergm.enumerate_dyads(net, ["school", "sex"])
    X = np.column_stack([np.ones(len(d)), d.match["school"], d.match["sex"]])
    assert np.allclose(fit.logistic.coefficients, newton_logistic(d.response, X), atol=1e-8)
    assert fit.expected_edges == pytest.approx(net.n_edges, rel=1e-6)
    assert fit.terms[0]["name"] == "edges"
    assert fit.terms[1]["homophily_pct"] is not None


def test_node_permutation_invariance(rs):
    n = 50
    co = cohort_of(n, school=list(rs.choice(["a", "b"], n)))
    net = ergm.simulate_dyadic_ergm(co, -2.0, {"school": 1.0}, seed=8)
    perm = rs.permutation(n)
    people = [list(co)[k] for k in perm]
    inv = np.argsort(perm)
    net2 = ContactNetwork(Cohort(people), inv[net.edges])
    a = ergm.fit_dyadic_ergm(net, ["school"]).logistic.coefficients
    b = ergm.fit_dyadic_ergm(net2, ["school"]).logistic.coefficients
    assert np.allclose(a, b, atol=1e-10)


def test_no_effect_recovery():
    n = 1038
    co = cohort_of(n, school=[f"H{k % 8}" for k in range(n)],
                   sex=["male" if k % 3 else "female" for k in range(n)])
    net = ergm.simulate_dyadic_ergm(co, -5.0, seed=12)
    fit = ergm.fit_dyadic_ergm(net, ["school", "sex"])
    for t in fit.terms[1:]:
        assert abs(t["estimate"]) < 2 * t["std_error"] + 1e-12 or t["p_value"] > 0.01
    edges = fit.terms[0]
    assert abs(edges["estimate"] + 5.0) < 3 * edges["std_error"]


def test_separately_matches_single_fits(rs):
    n = 40
    co = cohort_of(n, school=list(rs.choice(["a", "b"], n)), sex=list(rs.choice(["male",
                                                                                  "female"], n)))
    net = ergm.simulate_dyadic_ergm(co, -1.5, {"school": 0.7}, seed=2)
    sep = ergm.fit_dyadic_ergm_separately(net, ["school", "sex"])
    one = ergm.fit_dyadic_ergm(net, ["sex"])
    assert sep["sex"].estimate("nodematch.sex") == pytest.approx(one.estimate("nodematch.sex"))
