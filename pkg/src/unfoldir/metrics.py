"""Full-reference quality metrics on unit-range images."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ShapeError
from .image import as_image

PSNR_CAP = 99.0
SSIM_WIN = 11
SSIM_SIGMA = 1.5
C1 = 0.01**2
C2 = 0.03**2


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    energy_trace: list[float] = field(default_factory=list)
    isic_trace: list[float] = field(default_factory=list)
    runtime_ms: float = 0.0

    def format(self) -> str:
        parts = [f"psnr={self.psnr!r}", f"ssim={self.ssim!r}"]
        parts.append("energy_trace=" + ",".join(repr(e) for e in self.energy_trace))
        parts.append("isic_trace=" + ",".join(repr(e) for e in self.isic_trace))
        parts.append(f"runtime_ms={self.runtime_ms:.3f}")
        return " ".join(parts)


def _pair(a, b):
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b) -> float:
    a, b = _pair(a, b)
    mse = float(np.mean(np.square(a - b)))
    if mse == 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, max(0.0, -10.0 * np.log10(mse))))


def _gaussian_window() -> np.ndarray:
    r = SSIM_WIN // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2 * SSIM_SIGMA**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a, b) -> float:
    """Single-scale SSIM, 11x11 Gaussian window, valid region, mean over channels."""
    a, b = _pair(a, b)
    if min(a.shape[-2:]) < SSIM_WIN:
        raise ShapeError(f"ssim needs images at least {SSIM_WIN}x{SSIM_WIN}")
    win = _gaussian_window()
    r = SSIM_WIN // 2

    def filt(x):
        return ndimage.correlate(x, win, mode="constant")[r:-r, r:-r]

    vals = []
    for x, y in zip(a, b):
        mx, my = filt(x), filt(y)
        sxx = filt(x * x) - mx * mx
        syy = filt(y * y) - my * my
        sxy = filt(x * y) - mx * my
        num = (2 * mx * my + C1) * (2 * sxy + C2)
        den = (mx * mx + my * my + C1) * (sxx + syy + C2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))
