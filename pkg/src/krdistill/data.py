"""Long-tailed labeled datasets: exponential imbalance profiles, synthetic
Gaussian mixtures, balanced evaluation splits, and text-file persistence.

Class centers sit at a fixed radius with seeded random directions, so class
difficulty stays roughly uniform for any class count and dimension. Training
and evaluation noise come from disjoint substreams of the same seed, while
both share the center stream, so an evaluation split samples fresh points
from the same mixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Rng, gaussian_sample, l2_normalize_rows
from .validation import ParseError, check_matrix, check_labels, check_positive

# Substream ids for everything the data module draws.
STREAM_CENTERS = 11
STREAM_TRAIN_NOISE = 12
STREAM_EVAL_NOISE = 13

DEFAULT_SPREAD = 6.0
DEFAULT_SIGMA = 1.0


@dataclass
class LabeledDataset:
    features: np.ndarray  # N x d
    labels: np.ndarray  # N, int64 in [0, n_classes)
    n_classes: int

    def __post_init__(self):
        self.features = check_matrix(self.features, "features")
        self.labels = check_labels(self.labels, self.n_classes)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on example count")

    @property
    def n_examples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ImbalanceProfile:
    """Exponential long-tail shape: most frequent class has n_max examples,
    the rarest n_max/rho."""

    n_classes: int
    n_max: int
    rho: float

    def __post_init__(self):
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if self.rho < 1.0:
            raise ValueError(f"imbalance rate must be >= 1, got {self.rho}")
        if self.n_max < self.rho:
            raise ValueError("n_max must be >= rho so the rarest class keeps an example")


def make_exponential_counts(profile: ImbalanceProfile) -> np.ndarray:
    """Per-class counts n_c = round(n_max * rho^(-c/(C-1))), non-increasing."""
    c = profile.n_classes
    if c == 1:
        return np.array([profile.n_max], dtype=np.int64)
    exponents = -np.arange(c) / (c - 1)
    counts = np.rint(profile.n_max * profile.rho ** exponents).astype(np.int64)
    return counts


def class_counts(data: LabeledDataset) -> np.ndarray:
    """Exact label histogram over [0, n_classes). Zeros are possible for
    ingested files; generation always fills every class."""
    # labels already validated against n_classes by the dataset constructor
    return np.bincount(data.labels, minlength=data.n_classes).astype(np.int64)


def mixture_centers(rng: Rng, n_classes: int, dim: int, spread: float) -> np.ndarray:
    """Class centers at radius `spread`, directions drawn from the center
    substream of `rng` (so train/eval splits see the same centers)."""
    check_positive(spread, "spread")
    if dim < 2:
        raise ValueError("dim must be >= 2")
    directions = rng.substream(STREAM_CENTERS).standard_normal((n_classes, dim))
    return spread * l2_normalize_rows(directions)


def synth_gaussian_mixture(rng: Rng, counts, dim: int,
                           spread: float = DEFAULT_SPREAD,
                           sigma: float = DEFAULT_SIGMA) -> LabeledDataset:
    """Gaussian blobs, counts[c] examples around class c's center, rows
    sorted by class."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0 or counts.min() < 0:
        raise ValueError("counts must be a vector of nonnegative integers")
    check_positive(sigma, "sigma")
    n_classes = counts.size
    centers = mixture_centers(rng, n_classes, dim, spread)
    noise = rng.substream(STREAM_TRAIN_NOISE)
    return _sample_mixture(noise, centers, counts, sigma, n_classes)


def balanced_eval_split(rng: Rng, counts_per_class: int, n_classes: int, dim: int,
                        spread: float = DEFAULT_SPREAD,
                        sigma: float = DEFAULT_SIGMA) -> LabeledDataset:
    """Fresh examples from the same mixture, equal counts per class, drawn
    from a noise substream disjoint from training."""
    if counts_per_class < 1:
        raise ValueError("counts_per_class must be >= 1")
    check_positive(sigma, "sigma")
    centers = mixture_centers(rng, n_classes, dim, spread)
    counts = np.full(n_classes, int(counts_per_class), dtype=np.int64)
    noise = rng.substream(STREAM_EVAL_NOISE)
    return _sample_mixture(noise, centers, counts, sigma, n_classes)


def _sample_mixture(noise_rng, centers, counts, sigma, n_classes):
    blocks = []
    labels = []
    for c, n_c in enumerate(counts):
        if n_c:
            blocks.append(gaussian_sample(noise_rng, centers[c], sigma, int(n_c)))
            labels.append(np.full(int(n_c), c, dtype=np.int64))
    features = np.vstack(blocks) if blocks else np.empty((0, centers.shape[1]))
    labels = np.concatenate(labels) if labels else np.empty(0, dtype=np.int64)
    return LabeledDataset(features=features, labels=labels, n_classes=n_classes)


def synthetic_benchmark(seed: int, n_classes: int = 10, dim: int = 32,
                        rho: float = 100.0, n_max: int = 1000,
                        eval_per_class: int = 100,
                        spread: float = DEFAULT_SPREAD,
                        sigma: float = DEFAULT_SIGMA):
    """The standard desk-scale benchmark: an exponentially imbalanced
    training mixture plus a balanced evaluation split from the same centers.
    Returns (train, eval)."""
    counts = make_exponential_counts(ImbalanceProfile(n_classes, n_max, rho))
    rng = Rng(seed)
    train = synth_gaussian_mixture(rng, counts, dim, spread, sigma)
    eval_data = balanced_eval_split(rng, eval_per_class, n_classes, dim, spread, sigma)
    return train, eval_data


def save_dataset(data: LabeledDataset, path) -> None:
    """CSV with header `label,f0,...`; features printed with 17 significant
    digits so a round trip is bit-exact."""
    header = "label," + ",".join(f"f{j}" for j in range(data.dim))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for y, row in zip(data.labels, data.features):
            fh.write(str(int(y)) + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


def load_dataset(path, n_classes: int | None = None) -> LabeledDataset:
    """Parse a dataset file; raises ParseError naming the offending line.

    When n_classes is omitted it is inferred as max(label) + 1.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty dataset file", 1)
    header = lines[0].split(",")
    if header[0] != "label" or len(header) < 2:
        raise ParseError("header must be 'label,f0,...'", 1)
    dim = len(header) - 1
    if header[1:] != [f"f{j}" for j in range(dim)]:
        raise ParseError("feature columns must be named f0..f{d-1} in order", 1)

    labels = []
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise ParseError(f"expected {dim + 1} fields, got {len(parts)}", ln)
        try:
            y = int(parts[0])
        except ValueError:
            raise ParseError(f"label {parts[0]!r} is not an integer", ln) from None
        if y < 0:
            raise ParseError(f"label {y} is negative", ln)
        if n_classes is not None and y >= n_classes:
            raise ParseError(f"label {y} out of range for {n_classes} classes", ln)
        try:
            row = [float(p) for p in parts[1:]]
        except ValueError:
            raise ParseError("non-numeric feature value", ln) from None
        if not all(np.isfinite(row)):
            raise ParseError("non-finite feature value", ln)
        labels.append(y)
        rows.append(row)
    if not rows:
        raise ParseError("dataset has no examples", len(lines))
    c = n_classes if n_classes is not None else max(labels) + 1
    return LabeledDataset(features=np.array(rows), labels=np.array(labels, dtype=np.int64),
                          n_classes=c)
