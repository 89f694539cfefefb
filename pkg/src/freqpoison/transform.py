"""Orthonormal 2-D DCT / inverse DCT over whole image planes.

The transform pair is

    F(u,v) = sum_i sum_j f(i,j) c(u) c(v) cos[(i+0.5)pi u / M] cos[(j+0.5)pi v / N]
    f(i,j) = sum_u sum_v F(u,v) c(u) c(v) cos[(i+0.5)pi u / M] cos[(j+0.5)pi v / N]

with c(0) = sqrt(1/M) and c(u) = sqrt(2/M) otherwise (same for v with N).
`u` indexes rows (0..M-1), `v` indexes columns (0..N-1). This is exactly the
orthonormal DCT-II/DCT-III pair, so the implementation delegates to
scipy.fft; tests check it against the direct double-summation oracle.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from .image import ColorSpace, Image


@dataclass(frozen=True)
class Spectrum:
    """Per-channel DCT coefficient planes, same shape as the source image."""

    planes: np.ndarray  # (channels, M, N) float64
    color_space: ColorSpace

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3:
            raise ValueError(f"planes must be (channels, M, N), got shape {planes.shape}")
        object.__setattr__(self, "planes", planes)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.planes.shape


def _check_finite(plane: np.ndarray, op: str):
    if not np.isfinite(plane).all():
        raise ValueError(f"{op}: input contains non-finite values")


def dct2(plane: np.ndarray) -> np.ndarray:
    """Forward orthonormal 2-D DCT of a single (M, N) plane."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.shape[0] < 1 or plane.shape[1] < 1:
        raise ValueError(f"dct2 expects a 2-D plane, got shape {plane.shape}")
    _check_finite(plane, "dct2")
    return dctn(plane, norm="ortho")


def idct2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of `dct2`; idct2(dct2(x)) == x to floating-point precision."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[0] < 1 or coeffs.shape[1] < 1:
        raise ValueError(f"idct2 expects a 2-D plane, got shape {coeffs.shape}")
    _check_finite(coeffs, "idct2")
    return idctn(coeffs, norm="ortho")


def image_to_spectrum(img: Image) -> Spectrum:
    """Channel-wise forward DCT; the color-space tag is carried through."""
    _check_finite(img.planes, "image_to_spectrum")
    return Spectrum(dctn(img.planes, norm="ortho", axes=(1, 2)), img.color_space)


def spectrum_to_image(spec: Spectrum) -> Image:
    """Channel-wise inverse DCT; mirror of `image_to_spectrum`."""
    _check_finite(spec.planes, "spectrum_to_image")
    return Image(idctn(spec.planes, norm="ortho", axes=(1, 2)), spec.color_space)
