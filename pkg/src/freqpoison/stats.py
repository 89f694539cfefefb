"""Per-frequency ensemble statistics over a dataset slice.

For every (channel, u, v) cell these aggregate the coefficient values of all
images in the slice: mean, population standard deviation, coefficient of
variation (dispersion score used to pick variable trigger frequencies), and
the mean relative change under a filter (robustness score; low means the
frequency survives filtering).
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .transform import Spectrum

# Guard against division by near-zero coefficients / means.
EPS_GUARD = 1e-6


@dataclass(frozen=True)
class FrequencyStats:
    """Aggregates per (channel, u, v); all arrays share shape (C, M, N)."""

    mean: np.ndarray
    std: np.ndarray
    cov: np.ndarray
    filter_diff: np.ndarray
    sample_count: int

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mean.shape

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "sample_count": self.sample_count,
            "mean": self.mean.ravel().tolist(),
            "std": self.std.ravel().tolist(),
            "cov": self.cov.ravel().tolist(),
            "filter_diff": self.filter_diff.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FrequencyStats":
        shape = tuple(doc["shape"])
        def arr(key):
            return np.asarray(doc[key], dtype=np.float64).reshape(shape)
        return cls(arr("mean"), arr("std"), arr("cov"), arr("filter_diff"), int(doc["sample_count"]))


def _stack(spectra: Sequence[Spectrum], what: str) -> np.ndarray:
    if len(spectra) < 2:
        raise ValueError(f"{what}: need at least 2 spectra, got {len(spectra)}")
    shape = spectra[0].shape
    for i, spec in enumerate(spectra):
        if spec.shape != shape:
            raise ValueError(f"{what}: spectrum {i} has shape {spec.shape}, expected {shape}")
    return np.stack([spec.planes for spec in spectra])


def compute_stats(spectra: Sequence[Spectrum], filtered_spectra: Sequence[Spectrum]) -> FrequencyStats:
    """Aggregate a slice of spectra and their filtered counterparts.

    filtered_spectra[i] must be the spectrum of the filtered version of
    image i. Reduction order is fixed by the input order, so results are
    bitwise deterministic for a given sequence.

    cov = std / (|mean| + eps): note the eps guard means cov is only
    meaningfully scale-invariant where |mean| clearly exceeds the guard.
    """
    stack = _stack(spectra, "compute_stats")
    fstack = _stack(filtered_spectra, "compute_stats(filtered)")
    if stack.shape != fstack.shape:
        raise ValueError(
            f"compute_stats: got {stack.shape[0]} spectra but {fstack.shape[0]} filtered spectra"
            if stack.shape[0] != fstack.shape[0]
            else f"compute_stats: filtered shape {fstack.shape[1:]} != {stack.shape[1:]}"
        )
    mean = stack.mean(axis=0)
    std = stack.std(axis=0)  # population (the slice is the whole target class)
    cov = std / (np.abs(mean) + EPS_GUARD)
    filter_diff = (np.abs(stack - fstack) / (np.abs(stack) + EPS_GUARD)).mean(axis=0)
    return FrequencyStats(mean, std, cov, filter_diff, stack.shape[0])


def _tie_key(freq: tuple[int, int]) -> tuple[int, int, int]:
    u, v = freq
    return (u + v, u, v)


def all_frequencies(shape: tuple[int, int, int]) -> list[tuple[int, int]]:
    _, m, n = shape
    return [(u, v) for u in range(m) for v in range(n)]


def rank_by_filter_diff(stats: FrequencyStats, ch: int) -> list[tuple[int, int]]:
    """All frequencies sorted by filter_diff ascending (most filter-robust first).

    Ties break by (u+v, u, v) ascending so rankings are deterministic.
    """
    score = stats.filter_diff[ch]
    return sorted(all_frequencies(stats.shape), key=lambda f: (score[f], *_tie_key(f)))


def rank_by_cov(stats: FrequencyStats, ch: int, candidates: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Candidate frequencies sorted by cov descending (most dispersed first)."""
    score = stats.cov[ch]
    return sorted(candidates, key=lambda f: (-score[f], *_tie_key(f)))
