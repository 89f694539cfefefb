"""Matplotlib renderers for the report paths.

Every function writes one or more PNG files next to the machine-readable
reports and returns the written paths. All plotting is headless (Agg).
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .image import quantize_planes
from .stats import FrequencyStats
from .trigger import FrequencyTrigger, render_spatial_trigger

CHANNEL_NAMES = ("Y", "U", "V")


def _channel_name(ch: int) -> str:
    return CHANNEL_NAMES[ch] if ch < len(CHANNEL_NAMES) else f"ch{ch}"


def save_stats_heatmaps(stats: FrequencyStats, outdir, prefix: str = "stats") -> list[Path]:
    """Per-channel heatmaps of the filter-robustness and dispersion scores."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    channels = stats.shape[0]
    for name, array, log in (
        ("filter_diff", stats.filter_diff, False),
        ("cov", stats.cov, True),
        ("mean", np.abs(stats.mean), True),
    ):
        fig, axes = plt.subplots(1, channels, figsize=(4 * channels, 3.6), squeeze=False)
        for ch in range(channels):
            data = np.log10(array[ch] + 1e-12) if log else array[ch]
            im = axes[0, ch].imshow(data, cmap="viridis", origin="upper")
            axes[0, ch].set_title(f"{name} ({_channel_name(ch)})" + (" [log10]" if log else ""))
            axes[0, ch].set_xlabel("v")
            axes[0, ch].set_ylabel("u")
            fig.colorbar(im, ax=axes[0, ch], fraction=0.046)
        fig.tight_layout()
        path = outdir / f"{prefix}_{name}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def save_quality_figures(report_doc: dict, outdir, prefix: str = "quality") -> list[Path]:
    """Histograms of per-image PSNR and SSIM from a quality report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = report_doc.get("rows") or report_doc.get("per_image") or []
    psnrs = [r["psnr"] for r in rows if math.isfinite(r.get("psnr", math.inf))]
    ssims = [r["ssim"] for r in rows if "ssim" in r]
    written = []
    for name, values, mean_key in (("psnr", psnrs, "mean_psnr"), ("ssim", ssims, "mean_ssim")):
        if not values:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.hist(values, bins=30, color="#4878a8", edgecolor="white")
        mean_val = report_doc.get(mean_key)
        if mean_val is not None and math.isfinite(mean_val):
            ax.axvline(mean_val, color="crimson", linestyle="--", label=f"mean {mean_val:.3f}")
            ax.legend()
        ax.set_xlabel(name.upper() + (" [dB]" if name == "psnr" else ""))
        ax.set_ylabel("images")
        fig.tight_layout()
        path = outdir / f"{prefix}_{name}_hist.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def save_trigger_patterns(trigger: FrequencyTrigger, images, outdir, count: int = 9,
                          prefix: str = "trigger") -> list[Path]:
    """Grid of per-image spatial trigger patterns plus the cross-image
    per-pixel standard deviation of the luminance pattern."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    images = list(images)[: max(count, 2)]
    patterns = [render_spatial_trigger(trigger, img) for img in images]
    written = []

    shown = patterns[:count]
    cols = math.ceil(math.sqrt(len(shown)))
    rows = math.ceil(len(shown) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(2.4 * cols, 2.4 * rows), squeeze=False)
    vmax = max(np.abs(p[0]).max() for p in shown) or 1.0
    for i, pattern in enumerate(shown):
        ax = axes[i // cols][i % cols]
        ax.imshow(pattern[0], cmap="RdBu_r", vmin=-vmax, vmax=vmax)
        ax.set_title(f"image {i}", fontsize=8)
        ax.axis("off")
    for j in range(len(shown), rows * cols):
        axes[j // cols][j % cols].axis("off")
    fig.suptitle("spatial trigger patterns (luminance)")
    fig.tight_layout()
    path = outdir / f"{prefix}_patterns.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    std_map = np.std(np.stack([p[0] for p in patterns]), axis=0)
    fig, ax = plt.subplots(figsize=(4, 3.4))
    im = ax.imshow(std_map, cmap="magma")
    ax.set_title("per-pixel pattern std across images")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    path = outdir / f"{prefix}_pattern_std.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)
    return written


def save_poison_examples(clean_images, poisoned_images, outdir, count: int = 6,
                         prefix: str = "poison") -> list[Path]:
    """Side-by-side clean vs poisoned examples (quantized for display)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n = min(count, len(clean_images))
    fig, axes = plt.subplots(2, n, figsize=(1.8 * n, 4), squeeze=False)
    for i in range(n):
        for row, img in ((0, clean_images[i]), (1, poisoned_images[i])):
            shown = quantize_planes(img.planes).astype(np.uint8).transpose(1, 2, 0)
            axes[row][i].imshow(shown)
            axes[row][i].axis("off")
    axes[0][0].set_title("clean", loc="left")
    axes[1][0].set_title("poisoned", loc="left")
    fig.tight_layout()
    path = outdir / f"{prefix}_examples.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return [path]


def save_probe_figures(result_doc: dict, feature_shape, outdir, prefix: str = "probe",
                       weights=None) -> list[Path]:
    """Heatmap of |weight| per channel, highlighting what the probe learned."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if weights is None:
        return []
    channels, m, n = feature_shape
    grids = np.abs(np.asarray(weights).reshape(channels, m, n))
    fig, axes = plt.subplots(1, channels, figsize=(4 * channels, 3.6), squeeze=False)
    vmax = grids.max() or 1.0
    for ch in range(channels):
        im = axes[0, ch].imshow(grids[ch], cmap="inferno", vmin=0, vmax=vmax)
        axes[0, ch].set_title(f"|weight| ({_channel_name(ch)})")
        fig.colorbar(im, ax=axes[0, ch], fraction=0.046)
    fig.suptitle(f"probe accuracy {result_doc.get('accuracy', float('nan')):.4f}")
    fig.tight_layout()
    path = outdir / f"{prefix}_weights.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return [path]
