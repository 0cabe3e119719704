"""Solver configuration and its flat YAML serialisation.

Scale notes: gradients are in intensity-per-pixel units (Sobel / 8), so
``lambda_`` and ``s`` are relative to that scale.  ``mu / huber_delta`` is
the effective weight of the texture-consistency quadratic in the
reflectance system.  The defaults are starting points for the tuner; the
underlying model learns these values and reports none of them.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .errors import ConfigError

PROX_ILLUM_MODES = ("identity", "gaussian", "guided")
PROX_REFL_MODES = ("wavelet", "identity")
OUTPUT_MODES = ("reflectance", "relit")

# key names in files; ``lambda`` is a Python keyword
_FILE_ALIASES = {"lambda": "lambda_"}


@dataclass(frozen=True)
class SolverConfig:
    beta: float = 0.05
    gamma: float = 0.05
    lambda_: float = 0.1
    mu: float = 0.01
    s: float = 0.1
    huber_delta: float = 0.01
    epsilon: float = 1e-4
    stages: int = 3
    cg_tol: float = 1e-8
    cg_max_iter: int = 500
    prox_illum: str = "guided"
    illum_sigma: float = 1.0
    guided_radius: int = 2
    guided_eps: float = 1e-3
    prox_reflectance: str = "wavelet"
    shrink_tau: float = 0.05
    gw_sigma: float = 1.0
    gw_mu: float = 0.0
    isic_last_n: int = 2
    output_mode: str = "reflectance"
    illum_gamma: float = 2.2
    best_effort: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def lipschitz(self) -> float:
        """Lipschitz constant of the Huber gradient, 1 / delta."""
        return 1.0 / self.huber_delta

    def validate(self) -> None:
        positive = ("beta", "gamma", "s", "huber_delta", "cg_tol", "illum_sigma",
                    "guided_eps", "illum_gamma")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(_file_key(name), f"must be > 0, got {getattr(self, name)!r}")
        for name in ("lambda_", "mu", "shrink_tau"):
            if not getattr(self, name) >= 0:
                raise ConfigError(_file_key(name), f"must be >= 0, got {getattr(self, name)!r}")
        if not 0 < self.epsilon < 0.1:
            raise ConfigError("epsilon", f"must lie in (0, 0.1), got {self.epsilon!r}")
        for name in ("stages", "cg_max_iter", "guided_radius", "isic_last_n"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be >= 1, got {getattr(self, name)!r}")
        for name, allowed in (("prox_illum", PROX_ILLUM_MODES),
                              ("prox_reflectance", PROX_REFL_MODES),
                              ("output_mode", OUTPUT_MODES)):
            if getattr(self, name) not in allowed:
                raise ConfigError(name, f"must be one of {', '.join(allowed)}; got {getattr(self, name)!r}")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {_file_key(f.name): getattr(self, f.name) for f in fields(self)}


def _file_key(name: str) -> str:
    return "lambda" if name == "lambda_" else name


def _coerce(key: str, value, typ: str):
    if typ == "bool":
        if isinstance(value, bool):
            return value
        raise ConfigError(key, f"expected a boolean, got {value!r}")
    if typ == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if typ == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def config_from_mapping(data: dict, extra_keys: tuple[str, ...] = ()) -> tuple[SolverConfig, dict]:
    """Build a config from a flat mapping.

    Keys listed in ``extra_keys`` are returned separately (CLI io keys);
    any other unknown key is rejected.
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a flat key/value mapping")
    types = {f.name: f.type for f in fields(SolverConfig)}
    kwargs, extra = {}, {}
    for key, value in data.items():
        if not isinstance(key, str):
            raise ConfigError(str(key), "keys must be strings")
        if key in extra_keys:
            extra[key] = value
            continue
        name = _FILE_ALIASES.get(key, key)
        if name not in types or name == "lambda_" and key != "lambda":
            raise ConfigError(key, "unknown key")
        if isinstance(value, (dict, list)):
            raise ConfigError(key, "nested values are not allowed")
        kwargs[name] = _coerce(key, value, types[name])
    return SolverConfig(**kwargs), extra


def load_config(path, extra_keys: tuple[str, ...] = ()) -> tuple[SolverConfig, dict]:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<syntax>", str(exc).replace("\n", " ")) from exc
    return config_from_mapping(data, extra_keys)


def dump_config(cfg: SolverConfig, path=None) -> str:
    text = yaml.safe_dump(cfg.to_dict(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text
