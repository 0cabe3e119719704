"""Objective ingredients of the Retinex restoration model.

The texture term uses a Huber-smoothed l1 so that its gradient is
(1/delta)-Lipschitz; ``huber_value`` is that surrogate and ``huber_grad``
its gradient.
"""
from __future__ import annotations

import numpy as np

from .config import SolverConfig
from .diffops import (LinearOperator, diffusion_field, diffusion_gram, frozen_aggregate,
                      grad_magnitude, neighbor_diffs, pm_coeff, sobel_grad)
from .image import RetinexPair, as_image


def huber_value(x, delta: float) -> float:
    a = np.abs(np.asarray(x, dtype=np.float64))
    return float(np.where(a <= delta, 0.5 * a * a / delta, a - 0.5 * delta).sum())


def huber_grad(x, delta: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.clip(x / delta, -1.0, 1.0)


def illum_weight(L: np.ndarray) -> np.ndarray:
    """Gradient-aware illumination weight exp(-|grad L|)."""
    return np.exp(-grad_magnitude(sobel_grad(L)))


def _coeffs(x: np.ndarray, s: float) -> np.ndarray:
    return pm_coeff(np.abs(neighbor_diffs(x)), s)


def assemble_Qa(R_prev: np.ndarray, cfg: SolverConfig) -> LinearOperator:
    if cfg.mu == 0:
        return LinearOperator()
    return diffusion_gram(_coeffs(R_prev, cfg.s)) * (cfg.mu * cfg.lipschitz)


def assemble_Qb(R_prev: np.ndarray, R_prev2: np.ndarray, I: np.ndarray,
                cfg: SolverConfig) -> np.ndarray:
    """Right-hand-side texture field for the reflectance system (one plane).

    Coefficients of the two frozen aggregates come from ``R_prev`` and
    ``R_prev2`` respectively; at the first stage callers pass the
    initial reflectance for both.
    """
    if cfg.mu == 0:
        return np.zeros_like(np.asarray(R_prev, dtype=np.float64))
    _, A1t = frozen_aggregate(_coeffs(R_prev, cfg.s))
    A2, _ = frozen_aggregate(_coeffs(R_prev2, cfg.s))
    a2r = A2(R_prev2)
    target = diffusion_field(I, cfg.s).aggregate
    return cfg.mu * cfg.lipschitz * A1t(a2r) + cfg.mu * A1t(huber_grad(target - a2r, cfg.huber_delta))


def objective_energy(pair: RetinexPair, I, cfg: SolverConfig) -> float:
    """Explicit part of the restoration objective at ``pair``.

    0.5 ||I - R*L||^2 + mu * huber(A(I) - A(R)) + lambda/2 ||w * grad L||^2,
    with A applied per channel and w = exp(-|grad L|).
    """
    I = as_image(I)
    R, L = pair.reflectance, pair.illumination
    fidelity = 0.5 * float(np.sum(np.square(I - R * L)))
    texture = 0.0
    if cfg.mu > 0:
        for c in range(I.shape[0]):
            diff = diffusion_field(I[c], cfg.s).aggregate - diffusion_field(R[c], cfg.s).aggregate
            texture += huber_value(diff, cfg.huber_delta)
    g = sobel_grad(L)
    w2 = np.exp(-2.0 * grad_magnitude(g))
    smooth = 0.5 * cfg.lambda_ * float(np.sum(w2 * (g.gx**2 + g.gy**2)))
    return fidelity + cfg.mu * texture + smooth
