"""Discrete gradient machinery.

Sobel gradients, the Perona-Malik neighbourhood aggregate and its
diffusion coefficient, and the two symmetric positive semi-definite Gram
operators used inside the illumination and reflectance linear systems.
Every operator here has an exact adjoint under the mirror boundary, so the
Gram forms are symmetric to rounding error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .image import correlate3, correlate3_adjoint, mirror_pad, mirror_pad_adjoint

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]) / 8.0
SOBEL_Y = SOBEL_X.T.copy()

# 3x3 window including the centre; the centre difference is always zero
OFFSETS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)]
NEIGHBOURS = len(OFFSETS)
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class GradientPair:
    gx: np.ndarray
    gy: np.ndarray


@dataclass(frozen=True)
class DiffusionField:
    """Perona-Malik aggregate of a plane.

    ``coeffs`` and ``neighbor_diffs`` are stacked along axis 0 in
    :data:`OFFSETS` order.
    """

    aggregate: np.ndarray
    coeffs: np.ndarray
    neighbor_diffs: np.ndarray


@dataclass
class LinearOperator:
    """Symmetric PSD map ``x -> shift * x + apply_fn(x)`` on planes.

    ``shift`` is a per-pixel diagonal field (or scalar).  Operators compose
    with ``+`` and scale with ``*``.
    """

    apply_fn: Callable[[np.ndarray], np.ndarray] | None = None
    shift: np.ndarray | float = 0.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = self.shift * x
        if self.apply_fn is not None:
            out = out + self.apply_fn(x)
        return out

    apply = __call__

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        f, g = self.apply_fn, other.apply_fn
        if f is None:
            fn = g
        elif g is None:
            fn = f
        else:
            fn = lambda x: f(x) + g(x)  # noqa: E731
        return LinearOperator(fn, self.shift + other.shift)

    def __mul__(self, scale: float) -> "LinearOperator":
        f = self.apply_fn
        fn = None if f is None or scale == 0 else (lambda x: scale * f(x))
        return LinearOperator(fn, scale * self.shift)

    __rmul__ = __mul__

    def to_dense(self, shape: tuple[int, int]) -> np.ndarray:
        """Materialise as an (N, N) matrix by probing unit vectors (tests only)."""
        n = shape[0] * shape[1]
        mat = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            mat[:, k] = self(e.reshape(shape)).ravel()
        return mat


def diagonal(field) -> LinearOperator:
    return LinearOperator(None, field)


def sobel_grad(x: np.ndarray) -> GradientPair:
    """Sobel gradient normalised by 1/8 (a unit ramp has slope 1)."""
    return GradientPair(correlate3(x, SOBEL_X), correlate3(x, SOBEL_Y))


def sobel_grad_adjoint(g: GradientPair) -> np.ndarray:
    return correlate3_adjoint(g.gx, SOBEL_X) + correlate3_adjoint(g.gy, SOBEL_Y)


def grad_magnitude(g: GradientPair) -> np.ndarray:
    return np.hypot(g.gx, g.gy)


def pm_coeff(mag, s: float) -> np.ndarray:
    """Perona-Malik diffusion coefficient exp(-(mag/s)^2)."""
    if not s > 0:
        raise ConfigError("s", f"diffusion sensitivity must be > 0, got {s!r}")
    c = np.exp(-np.square(np.asarray(mag, dtype=np.float64) / s))
    # keep strictly positive where exp underflows
    return np.maximum(c, _TINY)


def neighbor_diffs(x: np.ndarray) -> np.ndarray:
    """Stack of X_j - X_i for every offset of the 3x3 window."""
    h, w = x.shape[-2:]
    p = mirror_pad(x)
    return np.stack([p[..., 1 + dr:1 + dr + h, 1 + dc:1 + dc + w] - x for dr, dc in OFFSETS])


def neighbor_diffs_adjoint(y: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`neighbor_diffs`, mapping 9 stacked planes to one."""
    h, w = y.shape[-2:]
    z = np.zeros(y.shape[1:-2] + (h + 2, w + 2))
    for k, (dr, dc) in enumerate(OFFSETS):
        z[..., 1 + dr:1 + dr + h, 1 + dc:1 + dc + w] += y[k]
    return mirror_pad_adjoint(z) - y.sum(axis=0)


def diffusion_field(x: np.ndarray, s: float) -> DiffusionField:
    diffs = neighbor_diffs(x)
    coeffs = pm_coeff(np.abs(diffs), s)
    aggregate = (coeffs * diffs).sum(axis=0) / NEIGHBOURS
    return DiffusionField(aggregate, coeffs, diffs)


def frozen_aggregate(coeffs: np.ndarray) -> tuple[Callable, Callable]:
    """The diffusion aggregate with coefficients held fixed, and its adjoint.

    Returns ``(A, At)`` with ``A(x) = (1/9) sum_j c_j * (x_j - x)`` linear in x.
    """

    def forward(x):
        return (coeffs * neighbor_diffs(x)).sum(axis=0) / NEIGHBOURS

    def adjoint(y):
        return neighbor_diffs_adjoint(coeffs * y[None]) / NEIGHBOURS

    return forward, adjoint


def weighted_laplacian(w2: np.ndarray) -> LinearOperator:
    """``x -> D^T (w2 * D x)`` with D the Sobel gradient.

    This is the gradient of ``0.5 * ||w * grad x||^2`` for ``w2 = w**2``.
    """
    w2 = np.asarray(w2, dtype=np.float64)
    if np.any(w2 < 0):
        raise ConfigError("w2", "weights must be non-negative")

    def apply(x):
        g = sobel_grad(x)
        return sobel_grad_adjoint(GradientPair(w2 * g.gx, w2 * g.gy))

    return LinearOperator(apply)


def diffusion_gram(coeffs: np.ndarray) -> LinearOperator:
    """``x -> N^T (c^2 * N x)`` with N the neighbour-difference stack scaled by 1/9."""
    c2 = np.square(coeffs)
    scale = 1.0 / NEIGHBOURS**2

    def apply(x):
        return scale * neighbor_diffs_adjoint(c2 * neighbor_diffs(x))

    return LinearOperator(apply)
