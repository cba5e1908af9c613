import json
from dataclasses import asdict
from collections import Counter

import numpy as np
import pytest

from netcontagion import ergm
from netcontagion.autocorr import build_weight_matrix, fit_autocorrelation, spectral_radius
from netcontagion.errors import ConfigurationError, ConvergenceError
from netcontagion.graph import build_network, homophily_fraction
from netcontagion.synthetic import (SURVEY_TARGETS, AttributeSpec, CohortConfig, calibrate,
                                    expected_edges, expected_same_week,
                                    expected_school_homophily, generate_cohort, null_config,
                                    survey_shaped_config, plant_contagion,
                                    random_mixing_homophily)
from conftest import cohort_of


def _as_rows(cohort, noms):
    return [asdict(p) for p in cohort], [(m.source, m.target, sorted(m.contexts))
                                           for m in noms]


def test_same_config_same_output():
    a = generate_cohort(null_config(n=120, seed=11))
    b = generate_cohort(null_config(n=120, seed=11))
    c = generate_cohort(null_config(n=120, seed=12))
    assert _as_rows(*a) == _as_rows(*b)
    assert _as_rows(*a) != _as_rows(*c)


def test_config_json_round_trip():
    cfg = survey_shaped_config(seed=4, planted_rho=0.05)
    again = CohortConfig.from_dict(json.loads(cfg.to_json()))
    assert again.to_dict() == cfg.to_dict()


def test_invalid_config_rejected():
    with pytest.raises(ConfigurationError):
        CohortConfig(n=10, schools=[("A", 9)])
    with pytest.raises(ConfigurationError):
        CohortConfig(n=10, schools=[("A", 10)],
                     attribute_specs={"sex": AttributeSpec({"female": 0.7, "male": 0.7})})
    with pytest.raises(ConfigurationError):
        CohortConfig(n=10, schools=[("A", 10)], contagion_mechanism="epidemic")


def test_nomination_cap_respected():
    cfg = null_config(n=300, seed=2, mean_out=8.0)
    cfg.nomination_cap = 3
    _, noms = generate_cohort(cfg)
    per = Counter(m.source for m in noms)
    assert max(per.values()) <= 3
    assert all(m.source != m.target for m in noms)
    assert len({(m.source, m.target) for m in noms}) == len(noms)


def test_two_person_cohort():
    cfg = CohortConfig(n=2, schools=[("A", 2)], mean_out_nominations=50.0, seed=1)
    cohort, noms = generate_cohort(cfg)
    assert len(cohort) == 2
    assert {(m.source, m.target) for m in noms} <= {("P0001", "P0002"), ("P0002", "P0001")}


def test_marginals_follow_specs():
    spec = AttributeSpec({"daily": 0.1, "sometimes": 0.3, "never": 0.6}, missing=0.1)
    cfg = CohortConfig(n=4000, schools=[("A", 4000)], attribute_specs={"smoking": spec},
                       mean_out_nominations=1.0, seed=3)
    cohort, _ = generate_cohort(cfg)
    vals = [p.smoking for p in cohort]
    miss = sum(v is None for v in vals) / len(vals)
    assert miss == pytest.approx(0.1, abs=0.02)
    seen = Counter(v for v in vals if v is not None)
    tot = sum(seen.values())
    assert seen["never"] / tot == pytest.approx(0.6, abs=0.03)
    prev = np.mean([p.carriage_direct == "positive" for p in cohort])
    assert prev == pytest.approx(0.3, abs=0.03)


def test_no_bias_gives_random_mixing():
    cfg = CohortConfig(n=600, schools=[("A", 200), ("B", 200), ("C", 200)],
                       mean_out_nominations=3.0, within_school_bias=1.0, seed=5)
    cohort, noms = generate_cohort(cfg)
    net = build_network(cohort, noms)
    assert homophily_fraction(net, "school") == pytest.approx(
        random_mixing_homophily(net, "school"), abs=4.0)


def test_school_bias_matches_analytic_expectation():
    sizes = [("A", 150), ("B", 150), ("C", 100)]
    cells = [(s, None, k) for s, k in sizes]
    cfg = CohortConfig(n=400, schools=sizes, mean_out_nominations=3.0,
                       within_school_bias=10.0, seed=8)
    shares = []
    for seed in range(4):
        cfg.seed = seed
        cohort, noms = generate_cohort(cfg)
        sch = {p.id: p.school for p in cohort}
        shares.append(100 * np.mean([sch[m.source] == sch[m.target] for m in noms]))
    assert np.mean(shares) == pytest.approx(expected_school_homophily(cells, 10.0), abs=2.0)


def test_calibrate_hits_targets():
    cells = [("A", "w1", 100), ("A", "w2", 80), ("B", "w1", 60), ("B", "w2", 120)]
    sb, wb, lam = calibrate(cells, 700, 80.0, 60.0)
    assert expected_school_homophily(cells, sb, wb) == pytest.approx(80.0, abs=1e-6)
    assert expected_same_week(cells, sb, wb) == pytest.approx(60.0, abs=1e-6)
    assert expected_edges(cells, sb, wb, lam) == pytest.approx(700, abs=1e-4)
    with pytest.raises(ConfigurationError):
        calibrate(cells, 10_000, 80.0)


def test_survey_shaped_cohort_near_targets():
    cohort, noms = generate_cohort(survey_shaped_config(seed=1))
    net = build_network(cohort, noms)
    assert len(cohort) == SURVEY_TARGETS["n"]
    assert net.n_edges == pytest.approx(SURVEY_TARGETS["edges"], rel=0.05)
    assert homophily_fraction(net, "school") == pytest.approx(
        SURVEY_TARGETS["school_homophily_pct"], abs=3.0)
    assert max(Counter(m.source for m in noms).values()) <= 5


def _plain_network(n=500, p=0.01, seed=1):
    rs = np.random.default_rng(seed)
    co = cohort_of(n, sex=list(rs.choice(["female", "male"], n)))
    return ergm.simulate_dyadic_ergm(co, np.log(p / (1 - p)), seed=seed)


def test_linear_plant_recovered_by_least_squares():
    net = _plain_network(n=800, p=0.008)
    res = plant_contagion(net, 0.05, 0.3, seed=4, mechanism="linear")
    fit = fit_autocorrelation(net, res.trait)
    assert abs(fit.rho - 0.05) < 3 * fit.rho_std_error
    assert res.trait.mean() == pytest.approx(0.3, abs=0.06)


def _assortativity(net, y):
    e = net.edges
    return np.corrcoef(np.r_[y[e[:, 0]], y[e[:, 1]]], np.r_[y[e[:, 1]], y[e[:, 0]]])[0, 1]


def test_sar_plant_near_stability_limit_is_assortative():
    cohort, noms = generate_cohort(survey_shaped_config(seed=1))
    net = build_network(cohort, noms)
    lam = spectral_radius(build_weight_matrix(net))
    near = plant_contagion(net, 0.99 / lam, 0.3, seed=1, mechanism="sar", noise_sd=0.05)
    null = plant_contagion(net, 0.0, 0.3, seed=1, mechanism="sar", noise_sd=0.05)
    assert near.trait.mean() == pytest.approx(0.3, abs=0.01)
    assert _assortativity(net, near.trait) > 0.1
    assert abs(_assortativity(net, null.trait)) < 0.06


def test_threshold_plant_converges_or_reports_trace():
    net = _plain_network(n=300, p=0.02)
    res = plant_contagion(net, 0.3, 0.2, seed=2, mechanism="threshold")
    assert res.converged and res.trace[-1] == 0
    with pytest.raises(ConvergenceError) as exc:
        plant_contagion(net, 0.3, 0.2, seed=2, mechanism="threshold", max_iters=1)
    assert exc.value.trace


def test_spa_types_only_for_positive_throat():
    cohort, noms = generate_cohort(survey_shaped_config(seed=2))
    typed = [p.spa_type for p in cohort if p.spa_type is not None]
    assert 0.6 < len(typed) / len(cohort) < 0.85


def test_key_order_does_not_change_the_cohort():
    cfg = survey_shaped_config(seed=6)
    shuffled = json.loads(json.dumps(cfg.to_dict(), sort_keys=True))
    shuffled["attribute_specs"] = dict(reversed(list(shuffled["attribute_specs"].items())))
    a = generate_cohort(cfg)
    b = generate_cohort(CohortConfig.from_dict(shuffled))
    assert _as_rows(*a) == _as_rows(*b)
