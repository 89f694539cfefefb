"""Dataset ingestion and emission.

Two on-disk layouts are supported: the classic 10-class binary format
(3073-byte records: one label byte followed by three 1024-byte row-major
color planes) and a directory of 8-bit RGB PNGs grouped by class name.
Pixels are stored 8-bit at rest and promoted to float64 on load;
`save_dataset` quantizes (clamp + round) on the way out, so both formats
round-trip bitwise.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image as PILImage

from .image import ColorSpace, Image, quantize_planes

CIFAR10_RECORD_BYTES = 3073
CIFAR10_IMAGE_SIDE = 32
CIFAR10_MAX_LABEL = 9


class SourceFormat(Enum):
    CIFAR10_BINARY = "cifar10"
    PNG_DIR = "pngdir"


@dataclass
class Dataset:
    images: list[Image]
    labels: np.ndarray
    class_names: list[str] | None = None
    source_format: SourceFormat | None = None
    source_path: str | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if self.images:
            shape = self.images[0].shape
            for i, img in enumerate(self.images):
                if img.shape != shape:
                    raise ValueError(f"image {i} has shape {img.shape}, expected {shape}")
        if self.class_names is not None and len(self.labels) and self.labels.max() >= len(self.class_names):
            raise ValueError(
                f"label {int(self.labels.max())} out of range for {len(self.class_names)} class names"
            )

    def __len__(self) -> int:
        return len(self.images)

    @property
    def class_count(self) -> int:
        if self.class_names is not None:
            return len(self.class_names)
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def class_index(self, target) -> int:
        """Resolve a class given either an integer index or a class name."""
        if isinstance(target, (int, np.integer)):
            idx = int(target)
        else:
            text = str(target)
            if self.class_names is not None and text in self.class_names:
                idx = self.class_names.index(text)
            else:
                try:
                    idx = int(text)
                except ValueError:
                    raise ValueError(f"unknown class {target!r}") from None
        if idx < 0 or (len(self.labels) and not (self.labels == idx).any()):
            raise ValueError(f"class {target!r} has no images in this dataset")
        return idx

    def indices_of_class(self, class_idx: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_idx)


def _planes_from_record(pixel_bytes: np.ndarray) -> np.ndarray:
    side = CIFAR10_IMAGE_SIDE
    return pixel_bytes.reshape(3, side, side).astype(np.float64)


def load_cifar10_binary(path) -> Dataset:
    """Load one batch file, a directory of *.bin batch files, or a list of files."""
    if isinstance(path, (list, tuple)):
        files = [Path(p) for p in path]
    else:
        p = Path(path)
        if p.is_dir():
            files = sorted(p.glob("*.bin"))
            if not files:
                raise ValueError(f"no *.bin batch files in {p}")
        else:
            files = [p]
    images, labels = [], []
    for f in files:
        raw = np.fromfile(f, dtype=np.uint8)
        if raw.size % CIFAR10_RECORD_BYTES != 0:
            offset = (raw.size // CIFAR10_RECORD_BYTES) * CIFAR10_RECORD_BYTES
            raise ValueError(
                f"{f}: size {raw.size} is not a multiple of {CIFAR10_RECORD_BYTES} "
                f"(truncated record starts at byte offset {offset})"
            )
        records = raw.reshape(-1, CIFAR10_RECORD_BYTES)
        batch_labels = records[:, 0]
        bad = np.flatnonzero(batch_labels > CIFAR10_MAX_LABEL)
        if bad.size:
            raise ValueError(
                f"{f}: record {int(bad[0])} has label byte {int(batch_labels[bad[0]])} > {CIFAR10_MAX_LABEL}"
            )
        for rec in records:
            images.append(Image(_planes_from_record(rec[1:]), ColorSpace.RGB))
        labels.extend(batch_labels.tolist())
    return Dataset(
        images,
        np.asarray(labels),
        class_names=None,
        source_format=SourceFormat.CIFAR10_BINARY,
        source_path=str(path),
    )


def load_png_dir(path) -> Dataset:
    """Load `<root>/<class_name>/<image>.png`; class indices follow sorted names."""
    root = Path(path)
    if not root.is_dir():
        raise ValueError(f"{root} is not a directory")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise ValueError(f"no class directories in {root}")
    images, labels = [], []
    class_names = [d.name for d in class_dirs]
    for idx, class_dir in enumerate(class_dirs):
        for png in sorted(class_dir.glob("*.png")):
            with PILImage.open(png) as pil:
                if pil.mode != "RGB":
                    raise ValueError(f"{png}: mode {pil.mode} is not 8-bit RGB")
                arr = np.asarray(pil, dtype=np.float64)
            images.append(Image(arr.transpose(2, 0, 1), ColorSpace.RGB))
            labels.append(idx)
    if not images:
        raise ValueError(f"no PNG images under {root}")
    return Dataset(
        images,
        np.asarray(labels),
        class_names=class_names,
        source_format=SourceFormat.PNG_DIR,
        source_path=str(root),
    )


def load_dataset(path, fmt: SourceFormat) -> Dataset:
    if fmt is SourceFormat.CIFAR10_BINARY:
        return load_cifar10_binary(path)
    return load_png_dir(path)


def save_dataset(ds: Dataset, path, fmt: SourceFormat):
    """Write the dataset; quantizes pixel values (clamp to [0,255], round)."""
    if fmt is SourceFormat.CIFAR10_BINARY:
        _save_cifar10_binary(ds, Path(path))
    else:
        _save_png_dir(ds, Path(path))


def _save_cifar10_binary(ds: Dataset, path: Path):
    if any(img.shape != (3, CIFAR10_IMAGE_SIDE, CIFAR10_IMAGE_SIDE) for img in ds.images):
        raise ValueError("binary format requires 3x32x32 images")
    if len(ds.labels) and ds.labels.max() > CIFAR10_MAX_LABEL:
        raise ValueError(f"binary format labels must be <= {CIFAR10_MAX_LABEL}")
    path.parent.mkdir(parents=True, exist_ok=True)
    out = np.empty((len(ds), CIFAR10_RECORD_BYTES), dtype=np.uint8)
    for i, (img, label) in enumerate(zip(ds.images, ds.labels)):
        out[i, 0] = label
        out[i, 1:] = quantize_planes(img.planes).astype(np.uint8).reshape(-1)
    out.tofile(path)


def _save_png_dir(ds: Dataset, root: Path):
    root.mkdir(parents=True, exist_ok=True)
    names = ds.class_names or [f"class_{i}" for i in range(ds.class_count)]
    for name in names:
        (root / name).mkdir(exist_ok=True)
    for i, (img, label) in enumerate(zip(ds.images, ds.labels)):
        pixels = quantize_planes(img.planes).astype(np.uint8).transpose(1, 2, 0)
        PILImage.fromarray(pixels, mode="RGB").save(root / names[label] / f"{i:06d}.png")
    with open(root / "classes.json", "w") as fh:
        json.dump(names, fh)
        fh.write("\n")
