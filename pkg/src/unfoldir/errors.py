"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value is outside its allowed range."""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")


class ShapeError(ValueError):
    pass


class NumericalError(ArithmeticError):
    """Raised on NaN/Inf or solver failure.

    ``iteration`` is set for failures inside CG, ``stage`` for failures the
    pipeline attributes to an unfolding stage.
    """

    def __init__(self, reason: str, iteration: int | None = None, stage: int | None = None):
        self.reason = reason
        self.iteration = iteration
        self.stage = stage
        parts = [reason]
        if iteration is not None:
            parts.append(f"iteration={iteration}")
        if stage is not None:
            parts.append(f"stage={stage}")
        super().__init__(" ".join(parts))


class ImageIOError(OSError):
    def __init__(self, path, offset: int, reason: str):
        self.path = str(path)
        self.offset = offset
        self.reason = reason
        super().__init__(f"{self.path}: {reason} at byte offset {offset}")
