"""Image containers, Retinex initialisation and elementwise algebra.

Images are float64 numpy arrays stored planar as ``(C, H, W)`` with C in
{1, 3}.  A single plane is a 2-D ``(H, W)`` array; the illumination of a
:class:`RetinexPair` is kept as a plane and broadcast over channels.

All neighbourhood reads use mirror boundaries (index -1 reads index 1,
index H reads H-2), implemented once here in :func:`mirror_pad` and its
exact adjoint :func:`mirror_pad_adjoint`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError


def as_image(data) -> np.ndarray:
    """Validate and return ``data`` as a float64 ``(C, H, W)`` array.

    A 2-D input is promoted to a single channel image.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ShapeError(f"expected (C, H, W) array, got shape {arr.shape}")
    c, h, w = arr.shape
    if c not in (1, 3) or h < 1 or w < 1:
        raise ShapeError(f"invalid image shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("image contains non-finite values")
    return arr


@dataclass(frozen=True)
class RetinexPair:
    """Coupled reflectance ``(C, H, W)`` and illumination ``(H, W)`` estimate."""

    reflectance: np.ndarray
    illumination: np.ndarray

    def __post_init__(self):
        if self.reflectance.shape[-2:] != self.illumination.shape:
            raise ShapeError(
                f"reflectance {self.reflectance.shape} and illumination "
                f"{self.illumination.shape} differ spatially"
            )

    def relit(self) -> np.ndarray:
        return hadamard(self.reflectance, self.illumination)


def check_epsilon(eps: float) -> None:
    if not 0.0 < eps < 0.1:
        raise ConfigError("epsilon", f"must lie in (0, 0.1), got {eps!r}")


def decompose_init(image, eps: float = 1e-4) -> RetinexPair:
    """Max-channel Retinex initialisation.

    L0 is the per-pixel channel maximum floored at ``eps`` and R0 = I / L0.
    """
    check_epsilon(eps)
    img = as_image(image)
    illum = np.maximum(img.max(axis=0), eps)
    return RetinexPair(reflectance=img / illum, illumination=illum)


def hadamard(a, b) -> np.ndarray:
    """Elementwise product; a 1-channel or plane ``b`` broadcasts over channels."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-2:] != b.shape[-2:]:
        raise ShapeError(f"spatial mismatch {a.shape} vs {b.shape}")
    if b.ndim == 3 and a.ndim == 3 and b.shape[0] not in (1, a.shape[0]):
        raise ShapeError(f"channel mismatch {a.shape} vs {b.shape}")
    if a.ndim == 3 and b.ndim == 3 and a.shape[0] == 1 and b.shape[0] > 1:
        raise ShapeError(f"channel mismatch {a.shape} vs {b.shape}")
    return a * b


def clamp_unit(x) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def _mirror_index(n: int) -> np.ndarray:
    # indices -1..n mapped into 0..n-1
    if n == 1:
        return np.zeros(3, dtype=np.intp)
    idx = np.arange(-1, n + 1)
    idx[0] = 1
    idx[-1] = n - 2
    return idx


def mirror_pad(x: np.ndarray) -> np.ndarray:
    """Pad the last two axes by one sample with mirror reflection."""
    h, w = x.shape[-2:]
    return x[..., _mirror_index(h)[:, None], _mirror_index(w)[None, :]]


def _fold_axis(z: np.ndarray, axis: int) -> np.ndarray:
    z = np.moveaxis(z, axis, 0)
    n = z.shape[0] - 2
    out = z[1:n + 1].copy()
    if n == 1:
        out[0] += z[0] + z[-1]
    else:
        out[1] += z[0]
        out[n - 2] += z[-1]
    return np.moveaxis(out, 0, axis)


def mirror_pad_adjoint(z: np.ndarray) -> np.ndarray:
    """Exact adjoint of :func:`mirror_pad`: folds the border back inside."""
    return _fold_axis(_fold_axis(z, -2), -1)


def correlate3(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 correlation over the last two axes with mirror boundary."""
    h, w = x.shape[-2:]
    p = mirror_pad(x)
    out = np.zeros(x.shape, dtype=np.float64)
    for a in range(3):
        for b in range(3):
            k = kernel[a, b]
            if k != 0.0:
                out += k * p[..., a:a + h, b:b + w]
    return out


def correlate3_adjoint(y: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    h, w = y.shape[-2:]
    z = np.zeros(y.shape[:-2] + (h + 2, w + 2), dtype=np.float64)
    for a in range(3):
        for b in range(3):
            k = kernel[a, b]
            if k != 0.0:
                z[..., a:a + h, b:b + w] += k * y
    return mirror_pad_adjoint(z)
