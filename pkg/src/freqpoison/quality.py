"""Invisibility metrics: PSNR and SSIM between clean and poisoned images."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .image import ColorSpace, Image, rgb_to_yuv

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * PEAK) ** 2
SSIM_C2 = (0.03 * PEAK) ** 2


def _check_pair(a: Image, b: Image, op: str, same_space: bool):
    if a.shape != b.shape:
        raise ValueError(f"{op}: shape mismatch {a.shape} vs {b.shape}")
    if same_space and a.color_space is not b.color_space:
        raise ValueError(f"{op}: color-space mismatch {a.color_space} vs {b.color_space}")


def psnr(a: Image, b: Image) -> float:
    """10*log10(255^2 / MSE), MSE over all channels and pixels jointly.

    Returns +inf when the images are identical.
    """
    _check_pair(a, b, "psnr", same_space=True)
    mse = np.mean((a.planes - b.planes) ** 2)
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / mse)


def _ssim_window() -> np.ndarray:
    ax = np.arange(SSIM_WINDOW, dtype=np.float64) - SSIM_WINDOW // 2
    g = np.exp(-(ax**2) / (2.0 * SSIM_SIGMA**2))
    w = np.outer(g, g)
    return w / w.sum()


_WINDOW = _ssim_window()


def _luminance(img: Image) -> np.ndarray:
    if img.channels != 3:
        raise ValueError(f"ssim expects 3-channel images, got {img.channels} channels")
    if img.color_space is ColorSpace.RGB:
        return rgb_to_yuv(img).planes[0]
    return img.planes[0]


def ssim(a: Image, b: Image) -> float:
    """Mean local SSIM on the luminance channel.

    Canonical parameterization: 11x11 Gaussian window (sigma 1.5),
    C1=(0.01*255)^2, C2=(0.03*255)^2, windows fully inside the image.
    """
    _check_pair(a, b, "ssim", same_space=False)
    ya, yb = _luminance(a), _luminance(b)
    if ya.shape[0] < SSIM_WINDOW or ya.shape[1] < SSIM_WINDOW:
        raise ValueError(f"ssim needs images at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {ya.shape}")
    mu1 = convolve2d(ya, _WINDOW, mode="valid")
    mu2 = convolve2d(yb, _WINDOW, mode="valid")
    s11 = convolve2d(ya * ya, _WINDOW, mode="valid") - mu1**2
    s22 = convolve2d(yb * yb, _WINDOW, mode="valid") - mu2**2
    s12 = convolve2d(ya * yb, _WINDOW, mode="valid") - mu1 * mu2
    num = (2.0 * mu1 * mu2 + SSIM_C1) * (2.0 * s12 + SSIM_C2)
    den = (mu1**2 + mu2**2 + SSIM_C1) * (s11 + s22 + SSIM_C2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class QualityReport:
    mean_psnr: float
    min_psnr: float
    mean_ssim: float
    min_ssim: float
    rows: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "mean_psnr": self.mean_psnr,
            "min_psnr": self.min_psnr,
            "mean_ssim": self.mean_ssim,
            "min_ssim": self.min_ssim,
            "count": len(self.rows),
            "rows": list(self.rows),
        }


def batch_quality(clean, poisoned) -> QualityReport:
    """Pairwise PSNR/SSIM over aligned indices plus aggregates.

    PSNR is over joint RGB MSE; SSIM is luminance-only (see the metric
    functions for the exact conventions).
    """
    if len(clean) != len(poisoned):
        raise ValueError(f"batch_quality: {len(clean)} clean vs {len(poisoned)} poisoned images")
    if not len(clean):
        raise ValueError("batch_quality: empty input")
    rows = []
    for i, (a, b) in enumerate(zip(clean, poisoned)):
        rows.append({"index": i, "psnr": psnr(a, b), "ssim": ssim(a, b)})
    psnrs = [r["psnr"] for r in rows]
    ssims = [r["ssim"] for r in rows]
    return QualityReport(
        mean_psnr=float(np.mean(psnrs)),
        min_psnr=float(np.min(psnrs)),
        mean_ssim=float(np.mean(ssims)),
        min_ssim=float(np.min(ssims)),
        rows=tuple(rows),
    )
