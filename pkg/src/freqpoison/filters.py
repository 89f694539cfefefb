"""Filter battery: Gaussian, mean and median in the spatial domain plus a
low-rank SVD filter in the frequency domain.

The same filters serve two purposes: screening trigger frequencies for
filter robustness during generation, and evaluating how well an injected
trigger survives input preprocessing. Edge handling is reflect padding
everywhere so borders do not bias frequency statistics.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import Image
from .transform import dct2, idct2

FILTER_TYPES = ("gaussian", "mean", "median", "svd")


def _check_kernel(kernel_size: int):
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValueError(f"kernel_size must be odd and >= 1, got {kernel_size}")


def gaussian_kernel(kernel_size: int, sigma: float) -> np.ndarray:
    """Normalized kernel_size x kernel_size Gaussian sampled at integer offsets."""
    _check_kernel(kernel_size)
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    ax = np.arange(kernel_size, dtype=np.float64) - kernel_size // 2
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _convolve_channels(planes: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = np.empty_like(planes)
    for c in range(planes.shape[0]):
        out[c] = ndimage.convolve(planes[c], kernel, mode="reflect")
    return out


def gaussian_filter(img: Image, kernel_size: int = 3, sigma: float = 1.0) -> Image:
    """Per-channel convolution with a normalized Gaussian kernel."""
    kernel = gaussian_kernel(kernel_size, sigma)
    return Image(_convolve_channels(img.planes, kernel), img.color_space)


def mean_filter(img: Image, kernel_size: int = 3) -> Image:
    """Per-channel box filter."""
    _check_kernel(kernel_size)
    kernel = np.full((kernel_size, kernel_size), 1.0 / kernel_size**2)
    return Image(_convolve_channels(img.planes, kernel), img.color_space)


def median_filter(img: Image, kernel_size: int = 3) -> Image:
    """Per-channel sliding-window median."""
    _check_kernel(kernel_size)
    out = np.empty_like(img.planes)
    for c in range(img.channels):
        out[c] = ndimage.median_filter(img.planes[c], size=kernel_size, mode="reflect")
    return Image(out, img.color_space)


def svd_filter(img: Image, rank: int) -> Image:
    """Low-rank truncation of each channel's DCT spectrum.

    Per channel: transform to the frequency domain, keep the top `rank`
    singular values of the coefficient grid, transform back.
    """
    max_rank = min(img.height, img.width)
    if not 1 <= rank <= max_rank:
        raise ValueError(f"rank must be in [1, {max_rank}], got {rank}")
    out = np.empty_like(img.planes)
    for c in range(img.channels):
        coeffs = dct2(img.planes[c])
        u, s, vt = np.linalg.svd(coeffs, full_matrices=False)
        s[rank:] = 0.0
        out[c] = idct2((u * s) @ vt)
    return Image(out, img.color_space)


@dataclass(frozen=True)
class FilterSpec:
    """A filter choice plus parameters, serializable for CLI flags and provenance.

    String form: "gaussian:k=3:sigma=1.0", "mean:k=3", "median:k=3", "svd:rank=8".
    """

    type: str = "gaussian"
    kernel_size: int = 3
    sigma: float = 1.0
    rank: int | None = None

    def __post_init__(self):
        if self.type not in FILTER_TYPES:
            raise ValueError(f"unknown filter type {self.type!r}, expected one of {FILTER_TYPES}")
        if self.type != "svd":
            _check_kernel(self.kernel_size)
        if self.type == "gaussian" and self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def apply(self, img: Image) -> Image:
        if self.type == "gaussian":
            return gaussian_filter(img, self.kernel_size, self.sigma)
        if self.type == "mean":
            return mean_filter(img, self.kernel_size)
        if self.type == "median":
            return median_filter(img, self.kernel_size)
        # Default SVD rank: a quarter of the smaller image dimension.
        rank = self.rank if self.rank is not None else -(-min(img.height, img.width) // 4)
        return svd_filter(img, rank)

    def to_string(self) -> str:
        if self.type == "gaussian":
            return f"gaussian:k={self.kernel_size}:sigma={self.sigma:g}"
        if self.type in ("mean", "median"):
            return f"{self.type}:k={self.kernel_size}"
        return f"svd:rank={self.rank}" if self.rank is not None else "svd"

    @classmethod
    def from_string(cls, spec: str) -> "FilterSpec":
        parts = spec.strip().lower().split(":")
        ftype = parts[0]
        kwargs = {}
        for part in parts[1:]:
            if "=" not in part:
                raise ValueError(f"bad filter parameter {part!r} in {spec!r} (expected key=value)")
            key, value = part.split("=", 1)
            if key in ("k", "kernel", "kernel_size"):
                kwargs["kernel_size"] = int(value)
            elif key == "sigma":
                kwargs["sigma"] = float(value)
            elif key == "rank":
                kwargs["rank"] = int(value)
            else:
                raise ValueError(f"unknown filter parameter {key!r} in {spec!r}")
        return cls(type=ftype, **kwargs)
