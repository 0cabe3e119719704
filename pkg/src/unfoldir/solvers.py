"""One unfolding stage: illumination and reflectance half-steps.

Each half-step solves the stationarity system of its quadratic
sub-problem exactly (conjugate gradients), then applies a classical
refinement operator in place of a learned proximal network.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .config import SolverConfig
from .diffops import LinearOperator, diagonal, sobel_grad, weighted_laplacian
from .errors import ConfigError, NumericalError
from .image import correlate3
from .model import assemble_Qa, assemble_Qb, illum_weight
from .wavelet import band_shrink, dwt2, idwt2

log = logging.getLogger(__name__)

BOX3 = np.full((3, 3), 1.0 / 9.0)


@dataclass(frozen=True)
class CgReport:
    iterations: int
    relative_residual: float
    converged: bool


@dataclass(frozen=True)
class GateParams:
    sigma_g: float = 1.0
    mu_g: float = 0.0


def linear_solve_cg(A: LinearOperator, rhs: np.ndarray, x0: np.ndarray | None = None,
                    tol: float = 1e-8, max_iter: int = 500) -> tuple[np.ndarray, CgReport]:
    """Conjugate gradients for an SPD operator on planes.

    Convergence is declared on the true residual ``||A x - rhs|| <= tol ||rhs||``;
    when the recursive residual drifts below tol first, the residual is
    recomputed and the iteration restarted.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros_like(rhs), CgReport(0, 0.0, True)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64)
    r = rhs - A(x)
    rr = float(np.vdot(r, r))
    target = (tol * bnorm) ** 2
    if rr <= target:
        return x, CgReport(0, np.sqrt(rr) / bnorm, True)
    p = r.copy()
    it = 0
    while it < max_iter:
        it += 1
        Ap = A(p)
        pAp = float(np.vdot(p, Ap))
        if not np.isfinite(pAp):
            raise NumericalError("non-finite value in conjugate gradients", iteration=it)
        if pAp <= 0.0:
            break
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        if not np.isfinite(rr_new):
            raise NumericalError("non-finite value in conjugate gradients", iteration=it)
        if rr_new <= target:
            r = rhs - A(x)
            rr_new = float(np.vdot(r, r))
            if rr_new <= target:
                rr = rr_new
                break
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = float(np.sqrt(rr)) / bnorm
    return x, CgReport(it, res, res <= tol)


def illumination_system(R: np.ndarray, L_prev: np.ndarray, I: np.ndarray,
                        cfg: SolverConfig) -> tuple[LinearOperator, np.ndarray]:
    """Operator and right-hand side whose solution is the illumination estimate.

    Fidelity is averaged over channels because one illumination plane is
    shared by all of them.
    """
    w = illum_weight(L_prev)
    op = diagonal(np.mean(R * R, axis=0) + cfg.gamma)
    if cfg.lambda_ > 0:
        op = op + weighted_laplacian(w * w) * cfg.lambda_
    rhs = np.mean(R * I, axis=0) + cfg.gamma * L_prev
    return op, rhs


def illumination_model(L: np.ndarray, R: np.ndarray, L_prev: np.ndarray, I: np.ndarray,
                       cfg: SolverConfig) -> float:
    """Quadratic illumination sub-problem value; its minimiser is the solve output."""
    w = illum_weight(L_prev)
    g = sobel_grad(L)
    fid = 0.5 * float(np.mean(np.sum(np.square(I - R * L), axis=(-2, -1))))
    prox = 0.5 * cfg.gamma * float(np.sum(np.square(L - L_prev)))
    smooth = 0.5 * cfg.lambda_ * float(np.sum(w * w * (g.gx**2 + g.gy**2)))
    return fid + prox + smooth


def solve_illumination(R_prev: np.ndarray, L_prev: np.ndarray, I: np.ndarray,
                       cfg: SolverConfig) -> tuple[np.ndarray, CgReport]:
    op, rhs = illumination_system(R_prev, L_prev, I, cfg)
    L_hat, report = linear_solve_cg(op, rhs, L_prev, cfg.cg_tol, cfg.cg_max_iter)
    log.debug("illumination cg: %s", report)
    return L_hat, report


def guided_filter(p: np.ndarray, guide: np.ndarray, radius: int, eps: float) -> np.ndarray:
    size = 2 * radius + 1

    def box(x):
        return ndimage.uniform_filter(x, size=size, mode="mirror")

    mean_i, mean_p = box(guide), box(p)
    cov = box(guide * p) - mean_i * mean_p
    var = box(guide * guide) - mean_i * mean_i
    a = cov / (var + eps)
    b = mean_p - a * mean_i
    return box(a) * guide + box(b)


def refine_illumination(L_hat: np.ndarray, L_prev: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    mode = cfg.prox_illum
    if mode == "identity":
        out = L_hat
    elif mode == "gaussian":
        out = ndimage.gaussian_filter(L_hat, cfg.illum_sigma, mode="mirror")
    elif mode == "guided":
        out = guided_filter(L_hat, L_prev, cfg.guided_radius, cfg.guided_eps)
    else:
        raise ConfigError("prox_illum", f"unknown mode {mode!r}")
    return np.clip(out, cfg.epsilon, 1.0)


def reflectance_system(L: np.ndarray, R_prev: np.ndarray, R_prev2: np.ndarray, I: np.ndarray,
                       cfg: SolverConfig) -> tuple[LinearOperator, np.ndarray]:
    """Single-channel reflectance system ``(L^2 + beta + Qa) R = L I + beta R_prev + Qb``."""
    op = diagonal(L * L + cfg.beta) + assemble_Qa(R_prev, cfg)
    rhs = L * I + cfg.beta * R_prev + assemble_Qb(R_prev, R_prev2, I, cfg)
    return op, rhs


def reflectance_model(R: np.ndarray, op: LinearOperator, rhs: np.ndarray, const: float = 0.0) -> float:
    """``0.5 <R, op R> - <rhs, R> + const``; the quadratic the reflectance solve minimises."""
    return 0.5 * float(np.vdot(R, op(R))) - float(np.vdot(rhs, R)) + const


def solve_reflectance(L: np.ndarray, R_prev: np.ndarray, R_prev2: np.ndarray, I: np.ndarray,
                      cfg: SolverConfig) -> tuple[np.ndarray, CgReport]:
    op, rhs = reflectance_system(L, R_prev, R_prev2, I, cfg)
    R_hat, report = linear_solve_cg(op, rhs, R_prev, cfg.cg_tol, cfg.cg_max_iter)
    log.debug("reflectance cg: %s", report)
    return R_hat, report


def local_stats(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 local mean and standard deviation with mirror boundary."""
    mean = correlate3(L, BOX3)
    var = np.maximum(correlate3(L * L, BOX3) - mean * mean, 0.0)
    return mean, np.sqrt(var)


def illumination_modulation(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale and shift fields conditioned on illumination.

    Both reduce to the identity modulation (1, 0) on a constant plane.
    """
    mean, std = local_stats(L)
    return 1.0 - std, mean - L


def fvss_surrogate(R_hat: np.ndarray, L: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Residual update from wavelet shrinkage plus illumination modulation.

    ``R_hat`` may be a plane or a ``(C, H, W)`` stack sharing ``L``.
    """
    if cfg.prox_reflectance == "identity":
        return np.zeros_like(R_hat)
    if min(R_hat.shape[-2:]) >= 2:
        R1 = idwt2(band_shrink(dwt2(R_hat), cfg.shrink_tau))
    else:
        R1 = R_hat
    sigma_l, mu_l = illumination_modulation(L)
    return 0.5 * (R1 + (sigma_l * R1 + mu_l)) - R_hat


def gate_weight(delta_mean: float, gate: GateParams) -> float:
    z = gate.sigma_g * delta_mean + gate.mu_g
    # two-class softmax == logistic
    return float(0.5 * (1.0 + np.tanh(0.5 * z)))


def rk2_compose(R_hat: np.ndarray, L: np.ndarray, gate: GateParams,
                cfg: SolverConfig) -> np.ndarray:
    """Gated second-order Runge-Kutta refinement of the reflectance."""
    k1 = fvss_surrogate(R_hat, L, cfg)
    k2 = fvss_surrogate(R_hat + k1, L, cfg)
    g = gate_weight(float(np.mean(np.abs(k1 - k2))), gate)
    return R_hat + g * k1 + (1.0 - g) * k2
