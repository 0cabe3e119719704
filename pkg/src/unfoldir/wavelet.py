"""Single-level orthonormal 2-D Haar transform and detail-band shrinkage.

Per 2x2 block ``[a b; c d]``::

    ll = (a + b + c + d) / 2     hl = (a + b - c - d) / 2
    lh = (a - b + c - d) / 2     hh = (a - b - c + d) / 2

Odd dimensions are mirror-padded by one row/column before analysis; the
original size is remembered in the bands and cropped after synthesis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError


@dataclass(frozen=True)
class WaveletBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    shape: tuple[int, int] | None = None  # source size before padding

    def details(self):
        return self.lh, self.hl, self.hh


def _pad_even(x: np.ndarray) -> np.ndarray:
    h, w = x.shape[-2:]
    if h % 2:
        x = np.concatenate([x, x[..., h - 2:h - 1, :]], axis=-2)
    if w % 2:
        x = np.concatenate([x, x[..., :, w - 2:w - 1]], axis=-1)
    return x


def dwt2(x: np.ndarray) -> WaveletBands:
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape[-2:]
    if h < 2 or w < 2:
        raise ShapeError(f"dwt2 needs at least 2x2, got {x.shape}")
    p = _pad_even(x)
    a = p[..., 0::2, 0::2]
    b = p[..., 0::2, 1::2]
    c = p[..., 1::2, 0::2]
    d = p[..., 1::2, 1::2]
    return WaveletBands(
        ll=(a + b + c + d) / 2,
        lh=(a - b + c - d) / 2,
        hl=(a + b - c - d) / 2,
        hh=(a - b - c + d) / 2,
        shape=(h, w),
    )


def idwt2(bands: WaveletBands) -> np.ndarray:
    ll, lh, hl, hh = bands.ll, bands.lh, bands.hl, bands.hh
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise ShapeError("wavelet bands have inconsistent shapes")
    h2, w2 = ll.shape[-2:]
    out = np.empty(ll.shape[:-2] + (2 * h2, 2 * w2))
    out[..., 0::2, 0::2] = (ll + lh + hl + hh) / 2
    out[..., 0::2, 1::2] = (ll - lh + hl - hh) / 2
    out[..., 1::2, 0::2] = (ll + lh - hl - hh) / 2
    out[..., 1::2, 1::2] = (ll - lh - hl + hh) / 2
    if bands.shape is not None:
        h, w = bands.shape
        if not (h <= 2 * h2 and w <= 2 * w2):
            raise ShapeError("recorded source shape exceeds band size")
        out = out[..., :h, :w]
    return out


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def band_shrink(bands: WaveletBands, tau: float) -> WaveletBands:
    """Soft-threshold the detail bands by ``tau``; LL passes through."""
    if tau < 0:
        raise ConfigError("shrink_tau", f"must be >= 0, got {tau!r}")
    if tau == 0:
        return bands
    return WaveletBands(
        ll=bands.ll,
        lh=soft_threshold(bands.lh, tau),
        hl=soft_threshold(bands.hl, tau),
        hh=soft_threshold(bands.hh, tau),
        shape=bands.shape,
    )
