"""Unfolded Retinex restoration for illumination-degraded images."""

__version__ = "0.1.0"

from .config import SolverConfig, dump_config, load_config
from .errors import ConfigError, ImageIOError, NumericalError, ShapeError
from .image import RetinexPair, clamp_unit, decompose_init, hadamard
from .pipeline import PipelineResult, StageTrace, isic_metric, run_pipeline
from .tuner import tune_params

__all__ = [
    "SolverConfig", "dump_config", "load_config",
    "ConfigError", "ImageIOError", "NumericalError", "ShapeError",
    "RetinexPair", "clamp_unit", "decompose_init", "hadamard",
    "PipelineResult", "StageTrace", "isic_metric", "run_pipeline",
    "tune_params",
]
