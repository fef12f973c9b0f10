"""Teacher-knowledge rectification.

Two halves, matching how an imbalanced teacher goes wrong:

* Feature side: per-class running means of L2-normalized teacher features
  (exponential moving average), then projected gradient descent on the unit
  hypersphere pushes those means to a maximally separated configuration (a
  simplex equiangular tight frame when the class count allows one). Teacher
  features are shifted toward the target of their class, scaled by an
  inverse-frequency class weight so rare classes get rectified hardest.

* Prediction side: a misclassified teacher distribution is repaired by
  assigning the target class the maximum probability and uniformly rescaling
  every non-target probability so the result still sums to one; correct
  predictions pass through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .nets import FeedForwardNet, forward
from .numerics import l2_normalize_rows
from .validation import (
    MissingClassError,
    ParseError,
    check_labels,
    check_matrix,
    check_stochastic,
)

MEANS_MAGIC = "KRDMEANS 1"

# A target probability within this slack of the row max counts as a correct
# prediction (ties included); no rectification is applied.
CORRECT_TOL = 1e-12
# Above this max probability a wrong prediction is collapsed straight to the
# one-hot at the target (the scale -> 0 limit of the formula).
NEAR_ONE_HOT = 1.0 - 1e-9


@dataclass
class ClassStats:
    """Running per-class means of (normalized) teacher features."""

    means: np.ndarray  # C x d; row c is undefined until seen[c] > 0
    seen: np.ndarray  # C, examples absorbed per class
    alpha: float  # EMA rate in (0, 1)

    @classmethod
    def empty(cls, n_classes: int, dim: int, alpha: float) -> "ClassStats":
        # alpha = 0 (mean = last example) is a legal recurrence limit;
        # alpha = 1 would freeze the first example and is not
        if not 0.0 <= alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
        return cls(np.zeros((n_classes, dim)), np.zeros(n_classes, dtype=np.int64), float(alpha))

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]


def ema_update(stats: ClassStats, class_id: int, feature) -> ClassStats:
    """Absorb one feature: first example sets the mean, later ones apply
    mu <- alpha*mu + (1-alpha)*f. The caller normalizes the feature."""
    c = int(class_id)
    if not 0 <= c < stats.n_classes:
        raise ValueError(f"class {class_id} outside [0, {stats.n_classes})")
    f = np.asarray(feature, dtype=np.float64)
    if f.shape != (stats.means.shape[1],):
        raise ValueError(f"feature shape {f.shape} != ({stats.means.shape[1]},)")
    if stats.seen[c] == 0:
        stats.means[c] = f
    else:
        stats.means[c] = stats.alpha * stats.means[c] + (1.0 - stats.alpha) * f
    stats.seen[c] += 1
    return stats


def compute_class_means(teacher: FeedForwardNet, data, alpha: float) -> ClassStats:
    """One pass over the dataset in stored order, accumulating the EMA of
    L2-normalized teacher features per class. Every class must appear."""
    stats = ClassStats.empty(data.n_classes, teacher.feature_dim, alpha)
    feats = l2_normalize_rows(forward(teacher, data.features).features)
    for c, f in zip(data.labels, feats):
        ema_update(stats, int(c), f)
    for c in range(data.n_classes):
        if stats.seen[c] == 0:
            raise MissingClassError(c)
    return stats


def ideal_means_objective(means) -> float:
    """(1/C) * sum_i log sum_j exp(mu_i . mu_j), diagonal included."""
    m = check_matrix(means, "means")
    dots = m @ m.T
    mx = dots.max(axis=1, keepdims=True)
    return float(np.mean(mx[:, 0] + np.log(np.exp(dots - mx).sum(axis=1))))


def ideal_means_gradient(means) -> np.ndarray:
    """Euclidean gradient of ideal_means_objective with respect to the rows."""
    m = check_matrix(means, "means")
    c = m.shape[0]
    dots = m @ m.T
    mx = dots.max(axis=1, keepdims=True)
    e = np.exp(dots - mx)
    a = e / e.sum(axis=1, keepdims=True)  # row-softmax of the dot matrix
    return (a @ m + a.T @ m) / c


def optimize_ideal_means(init: ClassStats, steps: int = 2000,
                         step_size: float = 0.1, callback=None) -> np.ndarray:
    """Projected gradient descent on the unit sphere from the class means.

    Rows are renormalized after every step; the step size halves whenever a
    step would increase the objective, so the objective is non-increasing.
    Returns the final iterate (C x d, unit rows). `callback`, when given, is
    invoked with the objective value after every accepted step.
    """
    if np.any(init.seen == 0):
        raise MissingClassError(int(np.argmin(init.seen)))
    m = np.asarray(init.means, dtype=np.float64)
    if m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError("need at least 2 classes and 2 feature dimensions")
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"class {int(np.argmin(norms))} has a zero-norm mean")
    mu = m / norms[:, None]

    obj = ideal_means_objective(mu)
    step = float(step_size)
    if step <= 0.0:
        raise ValueError("step_size must be positive")
    for _ in range(int(steps)):
        grad = ideal_means_gradient(mu)
        while True:
            cand = l2_normalize_rows(mu - step * grad)
            cand_obj = ideal_means_objective(cand)
            if cand_obj <= obj:
                break
            step *= 0.5
            if step < 1e-12:
                return mu  # no descent direction left at float precision
        mu, obj = cand, cand_obj
        if callback is not None:
            callback(obj)
    return mu


def class_weights(counts) -> np.ndarray:
    """Inverse-frequency weights w_c = C / (n_c * sum_i 1/n_i).

    Computed in exact rational arithmetic, so balanced counts give exactly
    ones and the mean over classes is 1 to within one rounding each.
    """
    n = np.asarray(counts)
    if n.ndim != 1 or n.size == 0:
        raise ValueError("counts must be a non-empty vector")
    if np.any(n <= 0):
        raise ValueError("all class counts must be >= 1")
    ints = [int(v) for v in n]
    harmonic = sum(Fraction(1, v) for v in ints)
    c = len(ints)
    return np.array([float(Fraction(c) / (v * harmonic)) for v in ints])


def rectify_features(teacher_features, labels, ideal_means, weights) -> np.ndarray:
    """Shift each (normalized) feature row toward its class target:
    row += w[label] * ideal_means[label]. No renormalization afterwards."""
    f = check_matrix(teacher_features, "teacher_features")
    mu = check_matrix(ideal_means, "ideal_means", cols=f.shape[1])
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (mu.shape[0],):
        raise ValueError(f"weights shape {w.shape} != ({mu.shape[0]},)")
    y = check_labels(labels, mu.shape[0])
    if y.shape[0] != f.shape[0]:
        raise ValueError("labels and features disagree on example count")
    return f + w[y, None] * mu[y]


@dataclass
class RectifiedPrediction:
    probs: np.ndarray  # stochastic, argmax at the target
    scale: float  # multiplier applied to non-target entries
    was_rectified: bool


def rectify_prediction(p, target: int) -> RectifiedPrediction:
    """Repair a single teacher distribution for its ground-truth target.

    Correct predictions (target within CORRECT_TOL of the max, ties
    included) pass through with scale 1. Otherwise the target receives the
    row maximum m and every non-target entry is multiplied by
    s = (1 - m) / (1 - p_target), the unique uniform scale that restores a
    sum of one.
    """
    v = check_stochastic(p, "prediction")
    t = int(target)
    if not 0 <= t < v.shape[0]:
        raise ValueError(f"target {target} outside [0, {v.shape[0]})")
    m = float(v.max())
    pt = float(v[t])
    if pt >= m - CORRECT_TOL:
        return RectifiedPrediction(v.copy(), 1.0, False)
    if m >= NEAR_ONE_HOT:
        out = np.zeros_like(v)
        out[t] = 1.0
        return RectifiedPrediction(out, 0.0, True)
    s = (1.0 - m) / (1.0 - pt)
    out = v * s
    out[t] = m
    return RectifiedPrediction(out, s, True)


def rectify_predictions(probs, targets) -> np.ndarray:
    """Vectorized rectify_prediction over the rows of a stochastic matrix."""
    pm = check_matrix(probs, "probs")
    y = check_labels(targets, pm.shape[1])
    if y.shape[0] != pm.shape[0]:
        raise ValueError("targets and probs disagree on example count")
    if pm.min() < 0.0 or np.any(np.abs(pm.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("probs rows must be stochastic")
    n = pm.shape[0]
    rows = np.arange(n)
    m = pm.max(axis=1)
    pt = pm[rows, y]
    wrong = pt < m - CORRECT_TOL
    collapse = wrong & (m >= NEAR_ONE_HOT)

    scale = np.ones(n)
    np.divide(1.0 - m, 1.0 - pt, out=scale, where=wrong)
    scale[collapse] = 0.0

    out = pm * np.where(wrong, scale, 1.0)[:, None]
    out[rows[wrong], y[wrong]] = m[wrong]
    out[rows[collapse], y[collapse]] = 1.0
    return out


def save_ideal_means(means, path) -> None:
    """Same text-matrix format as model files, magic KRDMEANS."""
    m = check_matrix(means, "ideal_means")
    lines = [MEANS_MAGIC, f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_ideal_means(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MEANS_MAGIC:
        raise ParseError(f"bad magic, expected {MEANS_MAGIC!r}", 1)
    try:
        c, d = (int(t) for t in lines[1].split())
    except (ValueError, IndexError):
        raise ParseError("dims line must be '<classes> <dim>'", 2) from None
    if len(lines) < 2 + c:
        raise ParseError(f"expected {c} rows, found {len(lines) - 2}", len(lines))
    rows = []
    for i in range(c):
        parts = lines[2 + i].split()
        if len(parts) != d:
            raise ParseError(f"expected {d} values, got {len(parts)}", 3 + i)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError("non-numeric value", 3 + i) from None
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise ParseError("non-finite value in means", 3)
    return m
