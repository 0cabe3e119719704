"""K-stage unfolding engine and the inter-stage consistency (ISIC) metric."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .diffops import sobel_grad
from .errors import NumericalError
from .image import RetinexPair, as_image, clamp_unit, decompose_init
from .model import objective_energy
from .solvers import (CgReport, GateParams, illumination_model, linear_solve_cg,
                      refine_illumination, reflectance_model, reflectance_system,
                      rk2_compose, solve_illumination)

log = logging.getLogger(__name__)


@dataclass
class StageTrace:
    stage_index: int
    l_hat: np.ndarray
    l: np.ndarray
    r_hat: np.ndarray
    r: np.ndarray
    energy: float
    isic: float | None
    cg_reports: list[CgReport]
    # (value at previous iterate, value at half-step output) of each sub-problem
    illum_descent: tuple[float, float] = (0.0, 0.0)
    refl_descent: tuple[float, float] = (0.0, 0.0)


@dataclass
class PipelineResult:
    output: np.ndarray
    traces: list[StageTrace] = field(default_factory=list)
    final_isic: float = 0.0
    init: RetinexPair | None = None


def isic_metric(r_k, r_prev, l_k, l_prev) -> float:
    """||R_k L_{k-1} - R_k L_k||_2 + ||grad(R_{k-1} L_k) - grad(R_k L_k)||_1."""
    r_k = np.asarray(r_k, dtype=np.float64)
    r_prev = np.asarray(r_prev, dtype=np.float64)
    first = float(np.linalg.norm((r_k * l_prev - r_k * l_k).ravel()))
    ga = sobel_grad(r_prev * l_k)
    gb = sobel_grad(r_k * l_k)
    second = float(np.abs(ga.gx - gb.gx).sum() + np.abs(ga.gy - gb.gy).sum())
    return first + second


def compose_output(R: np.ndarray, L: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    if cfg.output_mode == "relit":
        return clamp_unit(R * L ** (1.0 / cfg.illum_gamma))
    return clamp_unit(R)


def _check(report: CgReport, stage: int, what: str, cfg: SolverConfig) -> None:
    if report.converged:
        return
    msg = f"{what} solve did not converge (residual {report.relative_residual:.3e} after {report.iterations} iterations)"
    if cfg.best_effort:
        log.warning("stage %d: %s; continuing", stage, msg)
        return
    raise NumericalError(msg, stage=stage)


def run_pipeline(image, cfg: SolverConfig | None = None) -> PipelineResult:
    cfg = cfg or SolverConfig()
    I = as_image(image)
    gate = GateParams(cfg.gw_sigma, cfg.gw_mu)
    init = decompose_init(I, cfg.epsilon)
    R_prev, L_prev = init.reflectance, init.illumination
    R_prev2 = R_prev
    r_ceiling = 1.0 / cfg.epsilon
    traces: list[StageTrace] = []

    for k in range(1, cfg.stages + 1):
        L_hat, rep_l = solve_illumination(R_prev, L_prev, I, cfg)
        _check(rep_l, k, "illumination", cfg)
        illum_descent = (illumination_model(L_prev, R_prev, L_prev, I, cfg),
                         illumination_model(L_hat, R_prev, L_prev, I, cfg))
        L_k = refine_illumination(L_hat, L_prev, cfg)

        R_hat = np.empty_like(R_prev)
        reports = [rep_l]
        before = after = 0.0
        for c in range(I.shape[0]):
            op, rhs = reflectance_system(L_k, R_prev[c], R_prev2[c], I[c], cfg)
            R_hat[c], rep = linear_solve_cg(op, rhs, R_prev[c], cfg.cg_tol, cfg.cg_max_iter)
            _check(rep, k, f"reflectance channel {c}", cfg)
            reports.append(rep)
            before += reflectance_model(R_prev[c], op, rhs)
            after += reflectance_model(R_hat[c], op, rhs)

        R_k = np.clip(rk2_compose(R_hat, L_k, gate, cfg), 0.0, r_ceiling)
        if not (np.all(np.isfinite(R_k)) and np.all(np.isfinite(L_k))):
            raise NumericalError("non-finite stage output", stage=k)

        isic = isic_metric(R_k, R_prev, L_k, L_prev) if k > 1 else None
        energy = objective_energy(RetinexPair(R_k, L_k), I, cfg)
        traces.append(StageTrace(k, L_hat, L_k, R_hat, R_k, energy, isic, reports,
                                 illum_descent, (before, after)))
        log.info("stage %d energy=%.6g isic=%s cg=%s", k, energy, isic,
                 [r.iterations for r in reports])
        R_prev2, R_prev, L_prev = R_prev, R_k, L_k

    final_isic = traces[-1].isic if traces[-1].isic is not None else 0.0
    return PipelineResult(compose_output(R_prev, L_prev, cfg), traces, final_isic, init)
