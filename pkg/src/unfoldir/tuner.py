"""Training-free parameter tuning driven by inter-stage consistency.

The objective for one image is::

    mean ISIC over the last ``isic_last_n`` stages / number of samples
    + EXPOSURE_WEIGHT * |mean(output) - 0.5|
    + GRADIENT_WEIGHT * max(0, 1 - ||grad output||_1 / ||grad input||_1)

ISIC alone is minimised by freezing the stages or flattening the output;
the two no-reference penalties rule those out.  The set objective is the
mean over images.  Search is coordinate descent on a multiplicative grid
and only accepts strict improvements, so the result is never worse than
the starting configuration.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import SolverConfig
from .diffops import sobel_grad
from .errors import ConfigError, NumericalError
from .image import as_image
from .pipeline import run_pipeline

log = logging.getLogger(__name__)

EXPOSURE_WEIGHT = 1.0
GRADIENT_WEIGHT = 1.0
TUNED_PARAMS = ("beta", "gamma", "lambda_", "mu", "s", "shrink_tau")
STEP_FACTORS = (0.5, 2.0)
# starting value for a parameter currently at zero
ZERO_SEEDS = {"lambda_": 0.01, "mu": 0.001, "shrink_tau": 0.01}
# closed search box; candidates outside it are not evaluated
BOUNDS = {
    "beta": (1e-3, 10.0),
    "gamma": (1e-3, 10.0),
    "lambda_": (0.0, 10.0),
    "mu": (0.0, 1.0),
    "s": (1e-3, 10.0),
    "shrink_tau": (0.0, 0.5),
}


def worker_count() -> int:
    raw = os.environ.get("UNFOLDIR_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("UNFOLDIR_THREADS", f"expected an integer, got {raw!r}")
    if n < 0:
        raise ConfigError("UNFOLDIR_THREADS", "must be >= 0")
    return n or (os.cpu_count() or 1)


def _grad_l1(x: np.ndarray) -> float:
    g = sobel_grad(x)
    return float(np.abs(g.gx).sum() + np.abs(g.gy).sum())


def image_objective(image, cfg: SolverConfig) -> float:
    I = as_image(image)
    result = run_pipeline(I, cfg)
    window = [t.isic for t in result.traces[-cfg.isic_last_n:] if t.isic is not None]
    isic = float(np.mean(window)) / I.size if window else 0.0
    out = result.output
    exposure = abs(float(out.mean()) - 0.5)
    gin = _grad_l1(I)
    ratio = _grad_l1(out) / gin if gin > 0 else 1.0
    return isic + EXPOSURE_WEIGHT * exposure + GRADIENT_WEIGHT * max(0.0, 1.0 - ratio)


def tuning_objective(images, cfg: SolverConfig) -> float:
    """Mean per-image objective; ``inf`` if the pipeline fails on any image."""
    images = list(images)
    workers = min(worker_count(), len(images))
    try:
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                values = list(pool.map(lambda im: image_objective(im, cfg), images))
        else:
            values = [image_objective(im, cfg) for im in images]
    except (NumericalError, ConfigError) as exc:
        log.info("candidate discarded: %s", exc)
        return math.inf
    return float(np.mean(values))


def _candidates(name: str, value: float) -> list[float]:
    if value == 0:
        steps = [ZERO_SEEDS[name]] if name in ZERO_SEEDS else []
    else:
        steps = [value * f for f in STEP_FACTORS]
    lo, hi = BOUNDS[name]
    return [v for v in steps if lo <= v <= hi]


def tune_params(images, cfg0: SolverConfig, budget: int, history: list | None = None) -> SolverConfig:
    """Coordinate descent over ``TUNED_PARAMS``.

    ``budget`` counts objective evaluations, the initial one included.  If
    ``history`` is a list, ``(config, objective)`` pairs are appended to it.
    """
    images = [as_image(im) for im in images]
    if not images:
        raise ValueError("tune_params needs at least one image")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    best = cfg0
    best_val = tuning_objective(images, best)
    evals = 1
    if history is not None:
        history.append((best, best_val))
    improved = True
    while improved and evals < budget:
        improved = False
        for name in TUNED_PARAMS:
            for value in _candidates(name, getattr(best, name)):
                if evals >= budget:
                    break
                try:
                    cand = best.replace(**{name: value})
                except ConfigError as exc:
                    log.info("candidate %s=%r rejected: %s", name, value, exc)
                    continue
                val = tuning_objective(images, cand)
                evals += 1
                if history is not None:
                    history.append((cand, val))
                if val < best_val:
                    log.info("tune: %s -> %r (objective %.6g -> %.6g)", name, value, best_val, val)
                    best, best_val = cand, val
                    improved = True
                    break
    return best
