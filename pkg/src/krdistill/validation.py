"""Input validation helpers and shared exception types.

All public entry points funnel their array arguments through these checks so
that shape and finiteness violations fail loudly at the boundary instead of
surfacing as NaNs deep inside a training run.
"""

from __future__ import annotations

import numpy as np


class ParseError(ValueError):
    """A text artifact (dataset, model, config) failed to parse.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingClassError(ValueError):
    """A class id required by the pipeline has no training examples."""

    def __init__(self, class_id):
        super().__init__(f"class {class_id} has no examples")
        self.class_id = class_id


class NumericError(RuntimeError):
    """A non-finite value was produced where the contract forbids one."""

    def __init__(self, message, batch_index=None):
        super().__init__(message)
        self.batch_index = batch_index


class SupportViolation(ValueError):
    """KL divergence is undefined: the reference distribution carries mass
    where the candidate assigns exactly zero."""


def check_matrix(x, name="matrix", cols=None):
    """Coerce to a finite float64 2-D array; raise ValueError otherwise."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {a.shape[1]}")
    return a


def check_vector(x, name="vector", length=None):
    """Coerce to a finite float64 1-D array; raise ValueError otherwise."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    if length is not None and a.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {a.shape[0]}")
    return a


def check_labels(labels, n_classes, name="labels"):
    """Coerce to an int64 label vector with every value in [0, n_classes)."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        if not np.all(y == np.floor(y)):
            raise ValueError(f"{name} must be integers")
    y = y.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        bad = y[(y < 0) | (y >= n_classes)][0]
        raise ValueError(f"{name} value {bad} outside [0, {n_classes})")
    return y


def check_stochastic(p, name="distribution", tol=1e-6):
    """Validate a probability vector: finite, nonnegative, sums to 1 +- tol."""
    v = check_vector(p, name)
    if v.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if v.min() < 0.0:
        raise ValueError(f"{name} has negative entries")
    s = float(v.sum())
    if abs(s - 1.0) > tol:
        raise ValueError(f"{name} sums to {s!r}, expected 1 within {tol}")
    return v


def check_positive(value, name):
    """Require a finite value strictly greater than zero."""
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return v


def check_positive_int(value, name):
    v = int(value)
    if v <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return v
