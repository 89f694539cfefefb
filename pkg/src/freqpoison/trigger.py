"""Adaptive frequency-trigger generation.

The trigger is an ordered list of (u, v) frequencies with one target
intensity per channel. Generation runs in three phases over the target-class
slice (converted to YUV first, the color space the injector operates in):

1. screen for frequencies whose coefficients change least under a reference
   filter (robustness to input preprocessing),
2. among those candidates keep the frequencies whose coefficients disperse
   most across the slice (so the spatial pattern differs per image and no
   fixed patch exists for pattern-matching defenses),
3. set each target intensity to the slice mean plus a per-channel offset,
   auditing how often the implied per-image change exceeds the stealth
   threshold epsilon.

Everything is deterministic given the slice order and the configuration.
"""

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .filters import FilterSpec
from .image import ColorSpace, Image, rgb_to_yuv
from .stats import FrequencyStats, all_frequencies, compute_stats, rank_by_cov, rank_by_filter_diff
from .transform import Spectrum, idct2, image_to_spectrum

TRIGGER_FORMAT_VERSION = 1

# How much of the slice may exceed epsilon per frequency before the stealth
# audit emits a warning.
STEALTH_AUDIT_FRACTION = 0.05


@dataclass(frozen=True)
class TriggerEntry:
    freq: tuple[int, int]
    intensity: np.ndarray  # one target value per channel

    def __post_init__(self):
        object.__setattr__(self, "freq", (int(self.freq[0]), int(self.freq[1])))
        intensity = np.asarray(self.intensity, dtype=np.float64)
        if intensity.ndim != 1:
            raise ValueError("intensity must be a 1-D per-channel vector")
        if not np.isfinite(intensity).all():
            raise ValueError(f"non-finite target intensity at frequency {self.freq}")
        object.__setattr__(self, "intensity", intensity)


@dataclass(frozen=True)
class FrequencyTrigger:
    width: int
    height: int
    channels: int
    entries: tuple[TriggerEntry, ...]
    epsilon: float
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for entry in self.entries:
            u, v = entry.freq
            if not (0 <= u < self.height and 0 <= v < self.width):
                raise ValueError(f"frequency {entry.freq} outside {self.height}x{self.width} grid")
            if entry.freq in seen:
                raise ValueError(f"duplicate trigger frequency {entry.freq}")
            if entry.intensity.shape != (self.channels,):
                raise ValueError(
                    f"entry {entry.freq} has {entry.intensity.shape[0]} intensities, expected {self.channels}"
                )
            seen.add(entry.freq)

    @property
    def frequencies(self) -> list[tuple[int, int]]:
        return [entry.freq for entry in self.entries]

    def to_dict(self) -> dict:
        return {
            "version": TRIGGER_FORMAT_VERSION,
            "width": self.width,
            "height": self.height,
            "channels": self.channels,
            "entries": [
                {"u": entry.freq[0], "v": entry.freq[1], "intensity": entry.intensity.tolist()}
                for entry in self.entries
            ],
            "epsilon": self.epsilon,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FrequencyTrigger":
        entries = tuple(
            TriggerEntry((e["u"], e["v"]), np.asarray(e["intensity"], dtype=np.float64))
            for e in doc["entries"]
        )
        return cls(
            width=int(doc["width"]),
            height=int(doc["height"]),
            channels=int(doc["channels"]),
            entries=entries,
            epsilon=float(doc["epsilon"]),
            source=doc.get("source", {}),
        )


@dataclass(frozen=True)
class TriggerConfig:
    top_n: int = 3
    candidate_pool: int = 50
    epsilon: float = 75.0
    delta: tuple[float, ...] = (10.0, 10.0, 10.0)
    filter: FilterSpec = field(default_factory=FilterSpec)

    def __post_init__(self):
        if self.top_n < 0:
            raise ValueError(f"top_n must be >= 0, got {self.top_n}")
        if self.candidate_pool < 1:
            raise ValueError(f"candidate_pool must be >= 1, got {self.candidate_pool}")
        if self.top_n > self.candidate_pool:
            raise ValueError(f"top_n ({self.top_n}) must not exceed candidate_pool ({self.candidate_pool})")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        delta = tuple(float(d) for d in self.delta)
        if not all(np.isfinite(delta)):
            raise ValueError(f"delta must be finite, got {delta}")
        object.__setattr__(self, "delta", delta)


def save_trigger(trigger: FrequencyTrigger, path, extra: dict | None = None):
    """Write the trigger JSON; float repr round-trips values bit-exactly."""
    doc = trigger.to_dict()
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_trigger(path) -> FrequencyTrigger:
    with open(path) as fh:
        return FrequencyTrigger.from_dict(json.load(fh))


def _to_yuv(img: Image) -> Image:
    return rgb_to_yuv(img) if img.color_space is ColorSpace.RGB else img


def _slice_spectra(dataset_slice: Sequence[Image], filter_spec: FilterSpec):
    """YUV spectra of the slice and of its filtered counterpart."""
    if len(dataset_slice) < 2:
        raise ValueError(f"dataset slice must contain at least 2 images, got {len(dataset_slice)}")
    spectra, filtered = [], []
    for img in dataset_slice:
        yuv = _to_yuv(img)
        spectra.append(image_to_spectrum(yuv))
        filtered.append(image_to_spectrum(filter_spec.apply(yuv)))
    return spectra, filtered


def common_top(rankings: Sequence[Sequence[tuple[int, int]]], quota: int) -> list[tuple[int, int]]:
    """Frequencies ranked high on every channel's ranking.

    Grows a shared top-window (starting at `quota`) until at least `quota`
    frequencies are inside it on all channels, then returns the `quota` best
    by summed per-channel rank, ties broken by (u+v, u, v).
    """
    total = len(rankings[0])
    if quota > total:
        raise ValueError(f"quota {quota} exceeds the {total} available frequencies")
    rank = {}
    for ranking in rankings:
        for r, freq in enumerate(ranking):
            rank.setdefault(freq, []).append(r)
    max_rank = {freq: max(rs) for freq, rs in rank.items()}
    sum_rank = {freq: sum(rs) for freq, rs in rank.items()}
    # Window w contains freq iff max_rank < w; the smallest adequate window
    # ending is found by sorting on max_rank.
    by_max = sorted(rank, key=lambda f: (max_rank[f], f[0] + f[1], f[0], f[1]))
    window = max(quota, max_rank[by_max[quota - 1]] + 1)
    common = [f for f in rank if max_rank[f] < window]
    common.sort(key=lambda f: (sum_rank[f], f[0] + f[1], f[0], f[1]))
    return common[:quota]


def select_frequency_robust_to_filter(
    dataset_slice: Sequence[Image], cfg: TriggerConfig
) -> list[tuple[int, int]]:
    """Phase 1: the candidate_pool frequencies least changed by the filter."""
    spectra, filtered = _slice_spectra(dataset_slice, cfg.filter)
    stats = compute_stats(spectra, filtered)
    return _robust_candidates(stats, cfg)


def _robust_candidates(stats: FrequencyStats, cfg: TriggerConfig) -> list[tuple[int, int]]:
    channels = stats.shape[0]
    total = stats.shape[1] * stats.shape[2]
    if cfg.candidate_pool > total:
        raise ValueError(f"candidate_pool {cfg.candidate_pool} exceeds the {total} frequencies available")
    rankings = [rank_by_filter_diff(stats, ch) for ch in range(channels)]
    return common_top(rankings, cfg.candidate_pool)


def select_frequency_discrete(
    dataset_slice: Sequence[Image],
    candidates: Sequence[tuple[int, int]],
    cfg: TriggerConfig,
) -> list[tuple[int, int]]:
    """Phase 2: the top_n most dispersed candidates (cov, descending)."""
    spectra, filtered = _slice_spectra(dataset_slice, cfg.filter)
    stats = compute_stats(spectra, filtered)
    return _discrete_selection(stats, candidates, cfg)


def _discrete_selection(
    stats: FrequencyStats, candidates: Sequence[tuple[int, int]], cfg: TriggerConfig
) -> list[tuple[int, int]]:
    if not candidates:
        raise ValueError("candidate set is empty")
    if cfg.top_n > len(candidates):
        raise ValueError(f"top_n {cfg.top_n} exceeds the {len(candidates)} candidates")
    if cfg.top_n == 0:
        return []
    rankings = [rank_by_cov(stats, ch, candidates) for ch in range(stats.shape[0])]
    return common_top(rankings, cfg.top_n)


def set_value(
    stats: FrequencyStats,
    freqs: Sequence[tuple[int, int]],
    cfg: TriggerConfig,
    spectra: Sequence[Spectrum] | None = None,
    source: dict | None = None,
) -> FrequencyTrigger:
    """Phase 3: target intensity = slice mean + per-channel delta.

    When the per-image spectra are supplied, audits the stealth threshold:
    every (channel, frequency) where |I_T - F_n(u,v)| > epsilon on more than
    5% of the slice gets a warning record in source["stealth_warnings"].
    The intensities themselves are never altered by the audit.
    """
    channels, m, n = stats.shape
    if len(cfg.delta) != channels:
        raise ValueError(f"delta has {len(cfg.delta)} entries, dataset has {channels} channels")
    for u, v in freqs:
        if not (0 <= u < m and 0 <= v < n):
            raise ValueError(f"frequency ({u}, {v}) outside the {m}x{n} grid")
    delta = np.asarray(cfg.delta, dtype=np.float64)
    entries = tuple(
        TriggerEntry((u, v), stats.mean[:, u, v] + delta) for u, v in freqs
    )
    warnings = []
    if spectra is not None and freqs:
        stack = np.stack([spec.planes for spec in spectra])  # (N, C, M, N)
        for entry in entries:
            u, v = entry.freq
            exceed = np.abs(entry.intensity[None, :] - stack[:, :, u, v]) > cfg.epsilon
            frac = exceed.mean(axis=0)
            for ch in range(channels):
                if frac[ch] > STEALTH_AUDIT_FRACTION:
                    warnings.append(
                        {"channel": ch, "u": u, "v": v, "exceed_fraction": float(frac[ch])}
                    )
    src = dict(source or {})
    src.setdefault("top_n", len(entries))
    src.setdefault("delta", list(delta))
    src["stealth_warnings"] = warnings
    return FrequencyTrigger(
        width=n, height=m, channels=channels, entries=entries, epsilon=cfg.epsilon, source=src
    )


def generate_trigger(
    dataset_slice: Sequence[Image], cfg: TriggerConfig, source: dict | None = None
) -> FrequencyTrigger:
    """Run all three phases on a target-class slice.

    Deterministic: the same slice order and configuration always produce a
    bitwise identical trigger.
    """
    spectra, filtered = _slice_spectra(dataset_slice, cfg.filter)
    stats = compute_stats(spectra, filtered)
    candidates = _robust_candidates(stats, cfg)
    freqs = _discrete_selection(stats, candidates, cfg)
    src = dict(source or {})
    src.update(
        {
            "top_n": cfg.top_n,
            "candidate_pool": cfg.candidate_pool,
            "filter": cfg.filter.to_string(),
            "delta": list(cfg.delta),
            "sample_count": len(dataset_slice),
        }
    )
    return set_value(stats, freqs, cfg, spectra=spectra, source=src)


def render_spatial_trigger(trigger: FrequencyTrigger, img: Image) -> np.ndarray:
    """The additive spatial pattern this trigger induces on one image.

    Equal to the inverse DCT of the sparse difference spectrum
    (I_T - F_n at the trigger frequencies, zero elsewhere), evaluated in the
    YUV domain; also equal to inject_trigger(img) - img before quantization.
    Values may be negative.
    """
    if (img.channels, img.height, img.width) != (trigger.channels, trigger.height, trigger.width):
        raise ValueError(
            f"image shape {img.shape} does not match trigger shape "
            f"({trigger.channels}, {trigger.height}, {trigger.width})"
        )
    spec = image_to_spectrum(_to_yuv(img))
    pattern = np.zeros_like(spec.planes)
    if not trigger.entries:
        return pattern
    diff = np.zeros_like(spec.planes)
    for entry in trigger.entries:
        u, v = entry.freq
        diff[:, u, v] = entry.intensity - spec.planes[:, u, v]
    for c in range(trigger.channels):
        pattern[c] = idct2(diff[c])
    return pattern
