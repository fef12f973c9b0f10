"""Dense float64 matrix kernel: stable probability ops and seeded randomness.

Matrices are plain numpy float64 arrays (2-D, row-major). Randomness comes
from `Rng`, a thin wrapper over numpy's Philox counter-based generator so
that every stream is pinned by (seed, stream) and experiments replay
bit-identically.
"""

from __future__ import annotations

import numpy as np

from .validation import SupportViolation, check_matrix, check_positive, check_vector

# Floor applied to probabilities before any log; teacher softmax can
# underflow to 0 for confident logits.
PROB_FLOOR = 1e-12

_MASK64 = (1 << 64) - 1


class Rng:
    """Deterministic random stream, Philox4x32-10 keyed by (seed, stream).

    Identical (seed, stream) and call sequence reproduce the identical
    output stream. `substream(k)` returns a fresh stream at position zero,
    independent of this one; distinct stream ids never collide.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"


def softmax_rows(logits, temperature: float = 1.0) -> np.ndarray:
    """Row-wise softmax of logits/temperature, max-subtracted for stability.

    Every output row sums to 1 within 1e-12 and is invariant to a constant
    shift of the corresponding input row.
    """
    z = check_matrix(logits, "logits")
    t = check_positive(temperature, "temperature")
    z = z / t
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_sum_exp(row) -> float:
    """max(row) + log(sum(exp(row - max))); exact for single elements."""
    v = check_vector(row, "row")
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty row")
    m = float(v.max())
    if v.size == 1:
        return m
    return m + float(np.log(np.exp(v - m).sum()))


def kl_divergence(p, q) -> float:
    """KL(p || q) for stochastic vectors, with 0*log(0) = 0.

    Raises SupportViolation when q is exactly zero on a point where p
    carries mass above PROB_FLOOR.
    """
    pv = check_vector(p, "p")
    qv = check_vector(q, "q", length=pv.shape[0])
    if np.any((pv > PROB_FLOOR) & (qv == 0.0)):
        raise SupportViolation("support violation: q is zero where p has mass")
    mask = pv > 0.0
    ps = pv[mask]
    qs = np.maximum(qv[mask], PROB_FLOOR)
    return float(np.sum(ps * (np.log(ps) - np.log(qs))))


def gaussian_sample(rng: Rng, mean, sigma: float, n: int) -> np.ndarray:
    """n rows of mean + sigma * standard normal draws, deterministic per rng."""
    mu = check_vector(mean, "mean")
    s = check_positive(sigma, "sigma")
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.empty((0, mu.shape[0]))
    return mu[None, :] + s * rng.standard_normal((n, mu.shape[0]))


def l2_normalize_rows(x) -> np.ndarray:
    """Scale each row to unit L2 norm; all-zero rows are left as zeros."""
    a = check_matrix(x, "features")
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    return a / np.where(norms == 0.0, 1.0, norms)
