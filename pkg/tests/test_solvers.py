import numpy as np
import pytest

import oracles
from unfoldir.config import SolverConfig
from unfoldir.diffops import LinearOperator, diagonal
from unfoldir.errors import ConfigError, NumericalError
from unfoldir.solvers import (GateParams, fvss_surrogate, illumination_model, illumination_modulation,
                              linear_solve_cg, refine_illumination, reflectance_model,
                              reflectance_system, rk2_compose, solve_illumination, solve_reflectance)
from unfoldir.wavelet import band_shrink, dwt2, idwt2


def test_cg_diagonal(rng):
    x_true = rng.random((4, 4))
    x, rep = linear_solve_cg(diagonal(2.0), 2 * x_true, tol=1e-10)
    assert rep.converged
    np.testing.assert_allclose(x, x_true, rtol=1e-9)


def test_cg_zero_rhs(rng):
    x, rep = linear_solve_cg(diagonal(2.0), np.zeros((3, 3)), x0=rng.random((3, 3)))
    assert rep.iterations == 0 and np.all(x == 0)


def test_cg_dense_spd(rng):
    M = rng.standard_normal((64, 64))
    A = M @ M.T + 0.5 * np.eye(64)
    op = LinearOperator(lambda v: (A @ v.ravel()).reshape(8, 8))
    b = rng.standard_normal((8, 8))
    x, rep = linear_solve_cg(op, b, tol=1e-12, max_iter=1000)
    assert rep.converged and rep.relative_residual <= 1e-12
    assert np.max(np.abs(x.ravel() - np.linalg.solve(A, b.ravel()))) <= 1e-6


def test_cg_nan_raises():
    op = LinearOperator(lambda v: np.full_like(v, np.nan))
    with pytest.raises(NumericalError) as info:
        linear_solve_cg(op, np.ones((2, 2)))
    assert info.value.iteration == 1


def test_cg_reports_nonconvergence(rng):
    A = np.diag(np.linspace(1, 1e4, 100))
    op = LinearOperator(lambda v: (A @ v.ravel()).reshape(10, 10))
    _, rep = linear_solve_cg(op, rng.random((10, 10)), tol=1e-14, max_iter=3)
    assert not rep.converged and rep.iterations == 3


def test_illumination_scalar():
    cfg = SolverConfig(gamma=1.0)
    L, _ = solve_illumination(np.ones((1, 1, 1)), np.full((1, 1), 0.5), np.full((1, 1, 1), 0.5), cfg)
    assert L[0, 0] == pytest.approx(0.5)


def test_illumination_degenerate_fidelity(rng):
    cfg = SolverConfig(lambda_=0.0)
    L_prev = rng.uniform(0.1, 1, (5, 5))
    L, _ = solve_illumination(np.zeros((3, 5, 5)), L_prev, rng.random((3, 5, 5)), cfg)
    np.testing.assert_allclose(L, L_prev, rtol=1e-12)


def _illum_instance(rng, n=8):
    R = rng.uniform(0, 1, (3, n, n))
    L_prev = rng.uniform(0.05, 1, (n, n))
    I = rng.uniform(0, 1, (3, n, n))
    return R, L_prev, I


def test_illumination_stationary_and_optimal(rng):
    cfg = SolverConfig(lambda_=0.5, gamma=0.1)
    R, L_prev, I = _illum_instance(rng)
    L_hat, rep = solve_illumination(R, L_prev, I, cfg)
    assert rep.converged and rep.relative_residual <= cfg.cg_tol
    h = 1e-6
    n = L_hat.size
    E = np.eye(n).reshape(n, 8, 8) * h
    fd = (oracles.illum_objective_batch(L_hat + E, R, L_prev, I, cfg.gamma, cfg.lambda_)
          - oracles.illum_objective_batch(L_hat - E, R, L_prev, I, cfg.gamma, cfg.lambda_)) / (2 * h)
    assert np.max(np.abs(fd)) <= 1e-5
    f0 = illumination_model(L_hat, R, L_prev, I, cfg)
    assert f0 <= illumination_model(L_prev, R, L_prev, I, cfg)
    for _ in range(20):
        pert = L_hat + 1e-3 * rng.standard_normal(L_hat.shape)
        assert f0 <= illumination_model(pert, R, L_prev, I, cfg)


def test_illumination_model_matches_oracle(rng):
    cfg = SolverConfig(lambda_=0.5, gamma=0.1)
    R, L_prev, I = _illum_instance(rng)
    L = rng.random((8, 8))
    ref = oracles.illum_objective_batch(L[None], R, L_prev, I, cfg.gamma, cfg.lambda_)[0]
    assert illumination_model(L, R, L_prev, I, cfg) == pytest.approx(ref, rel=1e-12)


def test_refine_modes(rng):
    L_hat, L_prev = rng.uniform(0.05, 1, (2, 12, 12))
    eps = 1e-4
    out = refine_illumination(L_hat, L_prev, SolverConfig(prox_illum="identity"))
    np.testing.assert_array_equal(out, np.clip(L_hat, eps, 1))
    const = np.full((12, 12), 0.37)
    for mode in ("identity", "gaussian", "guided"):
        out = refine_illumination(const, L_prev, SolverConfig(prox_illum=mode))
        np.testing.assert_allclose(out, 0.37, rtol=1e-12)
    with pytest.raises(ConfigError):
        SolverConfig(prox_illum="bilateral")


def _tv(x):
    return np.abs(np.diff(x, axis=0)).sum() + np.abs(np.diff(x, axis=1)).sum()


@pytest.mark.parametrize("seed", range(5))
def test_gaussian_refine_reduces_tv(seed):
    rng = np.random.default_rng(seed)
    L_hat = rng.uniform(0.05, 1, (16, 16))
    out = refine_illumination(L_hat, L_hat, SolverConfig(prox_illum="gaussian", illum_sigma=1.2))
    assert _tv(out) <= _tv(L_hat)
    assert out.min() >= 1e-4 and out.max() <= 1


def test_reflectance_scalar():
    cfg = SolverConfig(mu=0.0, beta=1.0)
    R, _ = solve_reflectance(np.ones((1, 1)), np.full((1, 1), 0.4), np.full((1, 1), 0.4),
                             np.full((1, 1), 0.6), cfg)
    assert R[0, 0] == pytest.approx(0.5)


def test_reflectance_zero_illumination(rng):
    cfg = SolverConfig(mu=0.0)
    R_prev = rng.random((5, 5))
    R, _ = solve_reflectance(np.zeros((5, 5)), R_prev, R_prev, rng.random((5, 5)), cfg)
    np.testing.assert_allclose(R, R_prev, rtol=1e-12)


def test_reflectance_dense_and_descent(rng):
    cfg = SolverConfig(mu=0.02, s=0.2, huber_delta=0.02, beta=0.1)
    L = rng.uniform(0.05, 1, (8, 8))
    r1, r2, I = rng.random((3, 8, 8))
    R_hat, rep = solve_reflectance(L, r1, r2, I, cfg)
    assert rep.converged
    ref = oracles.dense_refl_solve(L, r1, r2, I, cfg.beta, cfg.mu, cfg.s, cfg.huber_delta)
    assert np.max(np.abs(R_hat - ref)) <= 1e-6
    op, rhs = reflectance_system(L, r1, r2, I, cfg)
    assert reflectance_model(R_hat, op, rhs) <= reflectance_model(r1, op, rhs)


def test_modulation_identity_on_constant():
    s, m = illumination_modulation(np.full((6, 6), 0.3))
    np.testing.assert_allclose(s, 1.0, atol=1e-7)
    np.testing.assert_allclose(m, 0.0, atol=1e-15)


def test_fvss_identity_cases(rng):
    R = rng.random((3, 8, 8))
    L = np.full((8, 8), 0.5)
    out = fvss_surrogate(R, L, SolverConfig(shrink_tau=0.0))
    np.testing.assert_allclose(out, 0, atol=1e-7)
    const = np.full((3, 8, 8), 0.6)
    out = fvss_surrogate(const, L, SolverConfig(shrink_tau=0.3))
    np.testing.assert_allclose(out, 0, atol=1e-7)


def test_fvss_compositional(rng):
    cfg = SolverConfig(shrink_tau=0.1)
    R = rng.random((8, 10))
    L = rng.uniform(0.05, 1, (8, 10))
    R1 = idwt2(band_shrink(dwt2(R), 0.1))
    p = np.pad(L, 1, mode="reflect")
    mean = np.zeros_like(L)
    sq = np.zeros_like(L)
    for r in range(8):
        for c in range(10):
            win = p[r:r + 3, c:c + 3]
            mean[r, c] = win.mean()
            sq[r, c] = (win ** 2).mean()
    sigma = 1.0 - np.sqrt(np.maximum(sq - mean**2, 0))
    expected = 0.5 * (R1 + sigma * R1 + (mean - L)) - R
    assert np.max(np.abs(fvss_surrogate(R, L, cfg) - expected)) <= 1e-12


def test_rk2_identity_surrogate(rng):
    R = rng.random((3, 8, 8))
    L = rng.random((8, 8))
    out = rk2_compose(R, L, GateParams(), SolverConfig(prox_reflectance="identity"))
    np.testing.assert_array_equal(out, R)


def test_rk2_heun_and_euler(rng):
    cfg = SolverConfig(shrink_tau=0.1)
    R = rng.random((3, 8, 8))
    L = rng.uniform(0.05, 1, (8, 8))
    k1 = fvss_surrogate(R, L, cfg)
    k2 = fvss_surrogate(R + k1, L, cfg)
    heun = rk2_compose(R, L, GateParams(0.0, 0.0), cfg)
    np.testing.assert_allclose(heun, R + 0.5 * k1 + 0.5 * k2, atol=1e-15)
    euler = rk2_compose(R, L, GateParams(0.0, 60.0), cfg)
    np.testing.assert_allclose(euler, R + k1, atol=1e-15)
