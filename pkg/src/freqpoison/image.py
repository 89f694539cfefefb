"""Pixel rasters and RGB<->YUV conversion (full-range BT.601).

Images are stored as per-channel float64 planes on the 0-255 scale; all
intermediate math stays in double precision. Quantization to 8 bits happens
only when a dataset is written out (see `datasetio`).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np


class ColorSpace(Enum):
    RGB = "rgb"
    YUV = "yuv"


# Full-range BT.601. Y = 0.299R + 0.587G + 0.114B; U and V are centered
# at 128 so all three channels share the 0-255 scale.
RGB_TO_YUV_MATRIX = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ],
    dtype=np.float64,
)
YUV_TO_RGB_MATRIX = np.linalg.inv(RGB_TO_YUV_MATRIX)
YUV_OFFSET = np.array([0.0, 128.0, 128.0], dtype=np.float64)


@dataclass(frozen=True)
class Image:
    """A (channels, height, width) float64 raster with a color-space tag."""

    planes: np.ndarray
    color_space: ColorSpace

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3:
            raise ValueError(f"planes must be (channels, height, width), got shape {planes.shape}")
        object.__setattr__(self, "planes", planes)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.planes.shape


def _require_space(img: Image, space: ColorSpace, op: str):
    if img.color_space is not space:
        raise ValueError(f"{op} expects a {space.value.upper()} image, got {img.color_space.value.upper()}")
    if img.channels != 3:
        raise ValueError(f"{op} expects 3 channels, got {img.channels}")


def rgb_to_yuv(img: Image) -> Image:
    """Convert an RGB image to full-range BT.601 YUV (no rounding, no clamping)."""
    _require_space(img, ColorSpace.RGB, "rgb_to_yuv")
    yuv = np.einsum("dc,chw->dhw", RGB_TO_YUV_MATRIX, img.planes)
    yuv += YUV_OFFSET[:, None, None]
    return Image(yuv, ColorSpace.YUV)


def yuv_to_rgb(img: Image) -> Image:
    """Exact matrix inverse of `rgb_to_yuv`.

    Out-of-range results are not clamped here; clamping is the injection
    pipeline's final quantization step.
    """
    _require_space(img, ColorSpace.YUV, "yuv_to_rgb")
    centered = img.planes - YUV_OFFSET[:, None, None]
    rgb = np.einsum("dc,chw->dhw", YUV_TO_RGB_MATRIX, centered)
    return Image(rgb, ColorSpace.RGB)


def quantize_planes(planes: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-to-even to integral float64 values."""
    return np.rint(np.clip(planes, 0.0, 255.0))


def quantize(img: Image) -> Image:
    """8-bit storage quantization: clamp then round, values stay float64."""
    return Image(quantize_planes(img.planes), img.color_space)
