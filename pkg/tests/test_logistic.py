import numpy as np
import pytest
from scipy.special import expit, logit

from oracles import newton_logistic
from netcontagion.errors import RankDeficiencyError, SeparationError
from netcontagion.logistic import Z95, fit_logistic


def test_intercept_only_is_logit_of_prevalence():
    y = np.array([1] * 3 + [0] * 7)
    fit = fit_logistic(y, np.ones((10, 1)))
    assert fit.coefficients[0] == pytest.approx(np.log(0.3 / 0.7), abs=1e-10)
    assert fit.coefficients[0] == pytest.approx(-0.8473, abs=1e-4)


def test_four_point_hand_dataset_matches_newton():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0, 1, 0, 1])
    X = np.column_stack([np.ones(4), x])
    fit = fit_logistic(y, X)
    assert np.allclose(fit.coefficients, newton_logistic(y, X), atol=1e-8)


def test_constant_outcome_is_separation():
    with pytest.raises(SeparationError):
        fit_logistic(np.zeros(6), np.column_stack([np.ones(6), np.arange(6.0)]))


def test_indicator_separation_names_term():
    X = np.column_stack([np.ones(8), [1, 1, 1, 0, 0, 0, 0, 0]])
    y = np.array([1, 1, 1, 0, 1, 0, 1, 0])
    with pytest.raises(SeparationError) as exc:
        fit_logistic(y, X, names=["intercept", "smoker"])
    assert "smoker" in str(exc.value)


def test_rank_deficiency_lists_columns():
    x = np.arange(10.0)
    X = np.column_stack([np.ones(10), x, 2 * x])
    with pytest.raises(RankDeficiencyError) as exc:
        fit_logistic(np.array([0, 1] * 5), X, names=["intercept", "a", "b"])
    assert set(exc.value.columns) & {"a", "b"}


def test_score_equations_ci_and_monotone_deviance(rs):
    X = np.column_stack([np.ones(300), rs.normal(size=300), rs.integers(0, 2, 300)])
    y = (rs.random(300) < expit(X @ [-0.5, 0.8, -0.4])).astype(int)
    fit = fit_logistic(y, X)
    assert np.max(np.abs(X.T @ (y - fit.predict(X)))) < 1e-8
    assert np.allclose(fit.ci95[:, 0], fit.coefficients - Z95 * fit.std_errors)
    assert np.allclose(fit.ci95[:, 1], fit.coefficients + Z95 * fit.std_errors)
    assert all(b <= a + 1e-12 for a, b in zip(fit.deviance_trace, fit.deviance_trace[1:]))
    assert fit.converged


def test_large_offsets_converge():
    # rare outcome, like the dyad model
    n = 20000
    y = np.zeros(n, int)
    y[:15] = 1
    fit = fit_logistic(y, np.ones((n, 1)))
    assert fit.coefficients[0] == pytest.approx(logit(15 / n), abs=1e-10)
