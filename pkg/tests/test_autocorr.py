import numpy as np
import pytest
from scipy import sparse

from conftest import cohort_of, network_of
from oracles import log_det_direct, ols_normal_equations
from netcontagion import ergm
from netcontagion.autocorr import (build_weight_matrix, fit_autocorrelation,
                                   log_det_i_minus_rho_w, simulate_autocorrelation,
                                   spectral_radius, weight_eigenvalues)
from netcontagion.errors import AttributeTypeError, ConvergenceError, SizeError


def test_two_node_fixed_point():
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    sim = simulate_autocorrelation(W, 0.5, np.ones((2, 1)), [1.0])
    assert np.allclose(sim.y, [2.0, 2.0], atol=1e-9)


def test_rho_zero_is_linear_predictor_plus_noise(rs):
    W = sparse.random(30, 30, density=0.1, random_state=1)
    W = W + W.T
    X = np.column_stack([np.ones(30), rs.normal(size=30)])
    sim = simulate_autocorrelation(W, 0.0, X, [1.0, -2.0], noise_sd=0.3, seed=5)
    assert np.allclose(sim.y, X @ [1.0, -2.0] + sim.noise)
    assert sim.iterations == 1


def test_supercritical_rho_raises():
    W = np.ones((4, 4)) - np.eye(4)
    with pytest.raises(ConvergenceError):
        simulate_autocorrelation(W, 0.5, np.ones((4, 1)), [1.0])


def test_fixed_point_solves_linear_system(rs):
    A = (rs.random((40, 40)) < 0.1).astype(float)
    A = np.triu(A, 1)
    A = A + A.T
    X = np.column_stack([np.ones(40), rs.normal(size=40)])
    rho = 0.5 / max(spectral_radius(A), 1e-9)
    sim = simulate_autocorrelation(A, rho, X, [0.5, 1.0], noise_sd=0.1, seed=2)
    direct = np.linalg.solve(np.eye(40) - rho * A, X @ [0.5, 1.0] + sim.noise)
    assert np.allclose(sim.y, direct, atol=1e-8)


def test_log_det_matches_slogdet(rs):
    A = np.triu((rs.random((25, 25)) < 0.2).astype(float), 1)
    A = A + A.T
    eigs = weight_eigenvalues(A)
    for rho in (-0.1, 0.0, 0.05, 0.1):
        if abs(rho) * np.max(np.abs(eigs)) < 1:
            sign, val = log_det_direct(A, rho)
            assert sign == 1.0
            assert log_det_i_minus_rho_w(eigs, rho) == pytest.approx(val, abs=1e-10)


def test_row_normalized_eigenvalues_and_rows():
    co = cohort_of(4)
    net, _ = network_of(co, [("p0", "p1"), ("p1", "p2"), ("p0", "p2")])
    W = build_weight_matrix(net, "row_normalized")
    rows = W.row_sums()
    assert np.allclose(rows, [1, 1, 1, 0])
    assert W.n_isolated == 1
    eigs = weight_eigenvalues(W)
    assert np.allclose(np.sort(eigs), np.sort(np.linalg.eigvals(W.dense()).real))
    assert np.max(eigs) == pytest.approx(1.0)


def _network(n=300, p=0.02, seed=1):
    rs = np.random.default_rng(seed)
    co = cohort_of(n, sex=list(rs.choice(["female", "male"], n)))
    return ergm.simulate_dyadic_ergm(co, np.log(p / (1 - p)), seed=seed)


def test_least_squares_matches_normal_equations():
    net = _network()
    rs = np.random.default_rng(0)
    y = (rs.random(net.n_nodes) < 0.3).astype(float)
    fit = fit_autocorrelation(net, y, ["sex"])
    W = build_weight_matrix(net).matrix
    male = np.array([v == "male" for v in net.values("sex")], float)
    Z = np.column_stack([W @ y, np.ones(net.n_nodes), male])
    coef = ols_normal_equations(y, Z)
    assert fit.rho == pytest.approx(coef[0], abs=1e-10)
    assert np.allclose(fit.beta, coef[1:], atol=1e-10)
    assert fit.names == ["intercept", "sex[male]"]


def test_fixed_rho_zero_is_ols():
    net = _network()
    y = (np.random.default_rng(1).random(net.n_nodes) < 0.4).astype(float)
    fit = fit_autocorrelation(net, y, ["sex"], fixed_rho=0.0)
    male = np.array([v == "male" for v in net.values("sex")], float)
    coef = ols_normal_equations(y, np.column_stack([np.ones(net.n_nodes), male]))
    assert np.allclose(fit.beta, coef, atol=1e-12)
    assert fit.rho == 0.0


def test_non_binary_outcome_rejected_unless_allowed():
    net = _network(n=50)
    y = np.linspace(0, 1, 50)
    with pytest.raises(AttributeTypeError):
        fit_autocorrelation(net, y)
    fit_autocorrelation(net, y, require_binary=False)


def test_profile_ml_recovers_rho_on_sar_data():
    net = _network(n=400, p=0.02, seed=3)
    W = build_weight_matrix(net)
    X = np.ones((net.n_nodes, 1))
    sim = simulate_autocorrelation(W, 0.06, X, [0.3], noise_sd=0.2, seed=9)
    fit = fit_autocorrelation(net, sim.y, method="profile_ml", require_binary=False)
    assert abs(fit.rho - 0.06) < 3 * fit.rho_std_error
    lo, hi = fit.rho_bounds
    assert lo < fit.rho < hi
    assert fit.converged


def test_least_squares_bias_shrinks_with_noise():
    # Wy is correlated with the disturbance; the bias scales with noise_sd
    rho = 0.06
    biases = []
    for sd in (0.5, 0.2, 0.05):
        est = []
        for rep in range(15):
            net = _network(n=300, p=0.02, seed=100 + rep)
            W = build_weight_matrix(net)
            sim = simulate_autocorrelation(W, rho, np.ones((net.n_nodes, 1)), [0.3],
                                           noise_sd=sd, seed=rep)
            est.append(fit_autocorrelation(net, sim.y, require_binary=False).rho)
        biases.append(abs(np.mean(est) - rho))
    assert biases[2] < biases[0]
    assert biases[2] < 0.01


def test_profile_ml_size_limit():
    co = cohort_of(5001)
    net, _ = network_of(co, [("p0", "p1")])
    with pytest.raises(SizeError):
        fit_autocorrelation(net, np.zeros(5001), method="profile_ml")
