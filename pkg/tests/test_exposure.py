import numpy as np
import pytest
from scipy.special import expit

from conftest import cohort_of, network_of
from netcontagion import ergm
from netcontagion.errors import RankDeficiencyError
from netcontagion.exposure import carrier_vs_positive_friends, category_relative_risk


def _random_net(rs, n=300, p_edge=0.02, prevalence=0.3, sex=None):
    co = cohort_of(n, carriage_direct=list(np.where(rs.random(n) < prevalence, "positive",
                                                    "negative")),
                   sex=sex if sex is not None else list(rs.choice(["female", "male"], n)))
    return ergm.simulate_dyadic_ergm(co, np.log(p_edge / (1 - p_edge)),
                                     seed=int(rs.integers(1 << 30)))


def test_reference_row_is_exactly_one(rs):
    net = _random_net(rs)
    table = category_relative_risk(net, "sex", "direct")
    ref = [r for r in table.rows if r["is_reference"]]
    assert table.reference == "female"
    assert len(ref) == 1
    assert ref[0]["rr"] == 1.0 and ref[0]["ci95"] == [1.0, 1.0]


def test_rr_matches_raw_proportions(rs):
    net = _random_net(rs)
    table = category_relative_risk(net, "sex", "direct")
    rows = {r["category"]: r for r in table.rows}
    raw = {c: rows[c]["n_exposed"] / rows[c]["n"] for c in rows}
    # a saturated model reproduces the observed proportions
    assert rows["male"]["rr"] == pytest.approx(raw["male"] / raw["female"], rel=1e-8)
    lo, hi = rows["male"]["ci95"]
    assert lo < rows["male"]["rr"] < hi


def test_null_rr_interval_coverage():
    rs = np.random.default_rng(7)
    hits = 0
    reps = 60
    for _ in range(reps):
        net = _random_net(rs, n=200, p_edge=0.01)
        row = [r for r in category_relative_risk(net, "sex", "direct").rows
               if not r["is_reference"]][0]
        hits += row["ci95"][0] <= 1.0 <= row["ci95"][1]
    # nominal 95%; allow for Monte Carlo slack
    assert hits >= 0.85 * reps


def test_absent_level_is_excluded_with_note(rs):
    net = _random_net(rs, n=100, sex=["female"] * 50 + ["male"] * 50)
    table = category_relative_risk(net, "sex", "direct", levels=["female", "male"])
    assert table.excluded_categories == []
    co = cohort_of(6, sex=["female"] * 3 + ["male"] * 3,
                   carriage_direct=["positive", "negative"] * 3,
                   smoking=["never", "never", "never", "sometimes", "sometimes", "sometimes"])
    net, _ = network_of(co, [("p0", "p1"), ("p2", "p3"), ("p4", "p5"), ("p1", "p2")])
    table = category_relative_risk(net, "smoking", "direct",
                                   levels=["daily", "sometimes", "never"])
    assert table.excluded_categories == ["daily"]
    assert table.reference in ("sometimes", "never")


def test_carrier_curve_and_ame(rs):
    net = _random_net(rs, n=400, p_edge=0.015)
    res = carrier_vs_positive_friends(net, "direct")
    b = res.fit.coefficients[1]
    # marginal effect of a logistic slope is bounded by b/4 in magnitude
    assert abs(res.average_marginal_effect) <= abs(b) / 4 + 1e-12
    lo, hi = res.ame_ci95
    assert lo <= res.average_marginal_effect <= hi
    assert [c["k"] for c in res.curve] == list(range(len(res.curve)))
    n = sum(c["n_carriers"] + c["n_noncarriers"] for c in res.curve)
    assert n == len(net.cohort)
    d = res.to_dict()
    assert d["fit"]["terms"][1]["term"] == "positive_friends"


def test_planted_dependence_gives_positive_ame():
    # carriers sit in a dense block: more positive friends means more likely positive
    n = 120
    status = ["positive"] * 40 + ["negative"] * 80
    co = cohort_of(n, carriage_direct=status)
    rs = np.random.default_rng(3)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            p = 0.08 if (i < 40 and j < 40) else 0.03
            if rs.random() < p:
                pairs.append((f"p{i}", f"p{j}"))
    net, _ = network_of(co, pairs)
    res = carrier_vs_positive_friends(net, "direct")
    assert res.average_marginal_effect > 0
    assert res.fit.coefficients[1] > 0
    assert res.status_t_test_p < 0.001


def test_constant_positive_friend_count_raises():
    co = cohort_of(4, carriage_direct=["negative"] * 4)
    net, _ = network_of(co, [("p0", "p1")])
    with pytest.raises(RankDeficiencyError):
        carrier_vs_positive_friends(net, "direct")


def test_ame_formula_on_hand_values():
    from netcontagion.exposure import average_marginal_effect
    k = np.array([0.0, 1.0, 2.0])
    ame, _ = average_marginal_effect((-1.0, 0.5), np.eye(2) * 0.01, k)
    expect = np.mean(expit(-1 + 0.5 * (k + 1)) - expit(-1 + 0.5 * k))
    assert ame == pytest.approx(expect, abs=1e-15)
