"""Linear separability probe on flattened spectra.

A logistic regression trained by plain gradient descent certifies that
poisoned and clean images are machine-distinguishable in the frequency
domain even when they look identical to a human. This is a desk-scale
learnability signal, not a model-level attack evaluation.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .image import ColorSpace, Image, rgb_to_yuv
from .transform import image_to_spectrum

EPOCHS = 500
LEARNING_RATE = 0.01


def extract_features(images: Sequence[Image]) -> np.ndarray:
    """Flattened YUV DCT coefficients, row-major (channel, u, v) order."""
    feats = []
    for img in images:
        yuv = rgb_to_yuv(img) if img.color_space is ColorSpace.RGB else img
        feats.append(image_to_spectrum(yuv).planes.reshape(-1))
    return np.stack(feats)


@dataclass(frozen=True)
class ProbeResult:
    accuracy: float
    n_train: int
    n_test: int
    weights: np.ndarray
    bias: float
    feature_shape: tuple[int, int, int]

    def top_features(self, k: int = 10) -> list[tuple[int, int, int, float]]:
        """The k highest-|weight| coordinates as (channel, u, v, weight)."""
        order = np.argsort(-np.abs(self.weights), kind="stable")[:k]
        _, m, n = self.feature_shape
        out = []
        for idx in order:
            ch, rest = divmod(int(idx), m * n)
            u, v = divmod(rest, n)
            out.append((ch, u, v, float(self.weights[idx])))
        return out

    def to_dict(self, top_k: int = 10) -> dict:
        return {
            "accuracy": self.accuracy,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "top_features": [
                {"channel": ch, "u": u, "v": v, "weight": w} for ch, u, v, w in self.top_features(top_k)
            ],
        }


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def train_probe(
    clean: Sequence[Image],
    poisoned: Sequence[Image],
    split: float = 0.8,
    seed: int = 0,
) -> ProbeResult:
    """Train clean-vs-poisoned logistic regression on spectra.

    Fixed schedule: 500 epochs of full-batch gradient descent at learning
    rate 0.01 from zero weights, on train-standardized features. The split
    permutation is the only randomness and is fully determined by `seed`.
    """
    if not len(clean) or not len(poisoned):
        raise ValueError("both clean and poisoned sets must be non-empty")
    if not 0.0 < split < 1.0:
        raise ValueError(f"split must be in (0, 1), got {split}")
    feature_shape = None
    for img in list(clean) + list(poisoned):
        if feature_shape is None:
            feature_shape = img.shape
        elif img.shape != feature_shape:
            raise ValueError(f"inconsistent image shapes: {img.shape} vs {feature_shape}")

    x = np.concatenate([extract_features(clean), extract_features(poisoned)])
    y = np.concatenate([np.zeros(len(clean)), np.ones(len(poisoned))])
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(x))
    x, y = x[perm], y[perm]

    n_train = int(split * len(x))
    n_test = len(x) - n_train
    if n_train < 1 or n_test < 1:
        raise ValueError(f"split {split} leaves an empty train or test set for {len(x)} samples")
    x_train, x_test = x[:n_train], x[n_train:]
    y_train, y_test = y[:n_train], y[n_train:]

    mu = x_train.mean(axis=0)
    sd = x_train.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    x_train = (x_train - mu) / sd
    x_test = (x_test - mu) / sd

    weights = np.zeros(x.shape[1])
    bias = 0.0
    for _ in range(EPOCHS):
        p = _sigmoid(x_train @ weights + bias)
        err = p - y_train
        weights -= LEARNING_RATE * (x_train.T @ err) / n_train
        bias -= LEARNING_RATE * err.mean()

    predictions = (x_test @ weights + bias) >= 0.0
    accuracy = float((predictions == y_test.astype(bool)).mean())
    return ProbeResult(
        accuracy=accuracy,
        n_train=n_train,
        n_test=n_test,
        weights=weights,
        bias=float(bias),
        feature_shape=feature_shape,
    )
