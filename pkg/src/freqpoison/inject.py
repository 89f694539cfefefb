"""Backdoor injection: replace trigger-frequency intensities in the YUV
spectrum of each target-class image.

The pipeline per image is RGB -> YUV -> DCT -> intensity replacement ->
inverse DCT -> RGB. `inject_trigger` returns the exact floating-point result
(no clamping, no rounding) so the poisoned spectrum equals the target
intensities to machine precision; clamping to [0, 255] and rounding to 8 bits
happen together as the final quantization step when a poisoned dataset is
materialized (`poison_dataset` / `save_dataset`). `verify_injection` measures
how much of the trigger survives that quantization.
"""

from dataclasses import dataclass

import numpy as np

from .datasetio import Dataset
from .image import ColorSpace, Image, quantize, rgb_to_yuv, yuv_to_rgb
from .quality import batch_quality
from .transform import image_to_spectrum, spectrum_to_image
from .trigger import FrequencyTrigger

MANIFEST_FORMAT_VERSION = 1

# Default flag threshold for post-quantization spectrum deviation; covers
# 8-bit rounding plus mild clamping.
DEVIATION_THRESHOLD = 3.0


def inject_trigger(img: Image, trigger: FrequencyTrigger) -> Image:
    """Patch the trigger into one RGB image (pre-quantization, exact)."""
    if img.color_space is not ColorSpace.RGB:
        raise ValueError("inject_trigger expects an RGB image")
    if (img.channels, img.height, img.width) != (trigger.channels, trigger.height, trigger.width):
        raise ValueError(
            f"image shape {img.shape} does not match trigger shape "
            f"({trigger.channels}, {trigger.height}, {trigger.width})"
        )
    if not trigger.entries:
        return Image(img.planes.copy(), ColorSpace.RGB)
    spec = image_to_spectrum(rgb_to_yuv(img))
    coeffs = spec.planes.copy()
    for entry in trigger.entries:
        u, v = entry.freq
        coeffs[:, u, v] = entry.intensity
    poisoned_yuv = spectrum_to_image(type(spec)(coeffs, spec.color_space))
    return yuv_to_rgb(poisoned_yuv)


@dataclass(frozen=True)
class DeviationReport:
    """Per-entry, per-channel deviation of a poisoned image's spectrum from I_T."""

    frequencies: tuple[tuple[int, int], ...]
    deviations: np.ndarray  # (entries, channels)
    threshold: float

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max()) if self.deviations.size else 0.0

    @property
    def flagged(self) -> list[dict]:
        out = []
        for k, (u, v) in enumerate(self.frequencies):
            for ch in range(self.deviations.shape[1]):
                if self.deviations[k, ch] > self.threshold:
                    out.append({"channel": ch, "u": u, "v": v, "deviation": float(self.deviations[k, ch])})
        return out

    @property
    def ok(self) -> bool:
        return not self.flagged


def verify_injection(
    poisoned: Image, trigger: FrequencyTrigger, threshold: float = DEVIATION_THRESHOLD
) -> DeviationReport:
    """Re-measure the poisoned image's spectrum against the trigger intensities."""
    spec = image_to_spectrum(rgb_to_yuv(poisoned) if poisoned.color_space is ColorSpace.RGB else poisoned)
    freqs = tuple(entry.freq for entry in trigger.entries)
    if not freqs:
        return DeviationReport(freqs, np.zeros((0, trigger.channels)), threshold)
    devs = np.empty((len(freqs), trigger.channels))
    for k, entry in enumerate(trigger.entries):
        u, v = entry.freq
        devs[k] = np.abs(spec.planes[:, u, v] - entry.intensity)
    return DeviationReport(freqs, devs, threshold)


@dataclass
class PoisonManifest:
    target_class: int
    rate: float
    seed: int
    trigger: FrequencyTrigger
    poisoned_indices: list[int]
    quality: dict | None
    verify: dict
    per_image: list[dict]
    dataset_info: dict | None = None

    def to_dict(self) -> dict:
        return {
            "version": MANIFEST_FORMAT_VERSION,
            "dataset": self.dataset_info or {},
            "target_class": self.target_class,
            "rate": self.rate,
            "seed": self.seed,
            "trigger": self.trigger.to_dict(),
            "poisoned_indices": self.poisoned_indices,
            "quality": self.quality,
            "verify": self.verify,
            "per_image": self.per_image,
        }


def poison_dataset(
    ds: Dataset,
    target_class,
    rate: float,
    trigger: FrequencyTrigger,
    seed: int = 0,
    dataset_info: dict | None = None,
    deviation_threshold: float = DEVIATION_THRESHOLD,
) -> tuple[Dataset, PoisonManifest]:
    """Poison a seeded uniform fraction of the target class (clean-label).

    Labels are never modified and images outside the target class are
    untouched. Poisoned images are quantized (clamp + round) so the returned
    dataset matches what write-out produces; the manifest records the chosen
    indices, per-image PSNR/SSIM against the clean originals, and the maximum
    post-quantization spectrum deviation.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    class_idx = ds.class_index(target_class)
    class_indices = ds.indices_of_class(class_idx)
    count = int(rate * len(class_indices))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(class_indices, size=count, replace=False))

    images = list(ds.images)
    per_image = []
    max_dev = 0.0
    for idx in chosen:
        clean = images[idx]
        poisoned = quantize(inject_trigger(clean, trigger))
        images[idx] = poisoned
        report = verify_injection(poisoned, trigger, deviation_threshold)
        per_image.append({"index": int(idx), "max_deviation": report.max_deviation})
        max_dev = max(max_dev, report.max_deviation)

    quality_doc = None
    if len(chosen):
        report = batch_quality([ds.images[i] for i in chosen], [images[i] for i in chosen])
        for row, rec in zip(report.rows, per_image):
            rec["psnr"] = row["psnr"]
            rec["ssim"] = row["ssim"]
        quality_doc = {
            "mean_psnr": report.mean_psnr,
            "mean_ssim": report.mean_ssim,
            "min_psnr": report.min_psnr,
            "min_ssim": report.min_ssim,
        }

    poisoned_ds = Dataset(
        images,
        ds.labels.copy(),
        class_names=ds.class_names,
        source_format=ds.source_format,
        source_path=ds.source_path,
    )
    manifest = PoisonManifest(
        target_class=class_idx,
        rate=rate,
        seed=seed,
        trigger=trigger,
        poisoned_indices=[int(i) for i in chosen],
        quality=quality_doc,
        verify={"max_deviation": max_dev, "threshold": deviation_threshold},
        per_image=per_image,
        dataset_info=dataset_info,
    )
    return poisoned_ds, manifest
