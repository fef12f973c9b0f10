"""Training objectives and their gradients with respect to student outputs.

Every loss returns a `LossOutput` holding the scalar value plus gradients
with respect to the student logits and/or features (None where a path does
not apply). Gradients are averaged over the batch, matching the 1/N
reduction of the values, and are all checked against central finite
differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import ProjectorNet, backward, forward
from .numerics import PROB_FLOOR, softmax_rows
from .validation import SupportViolation, check_labels, check_matrix

LRD_MODES = ("canonical", "literal")


@dataclass
class LossConfig:
    """Distillation hyperparameters. The defaults are the tuned operating
    point: feature-loss weight 10, EMA rate 0.8, temperature 2 (and the
    projector uses 3 hidden layers)."""

    beta: float = 10.0
    tau: float = 2.0
    alpha: float = 0.8
    tau_squared_scaling: bool = True
    lrd_mode: str = "canonical"

    def __post_init__(self):
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if self.tau <= 0.0:
            raise ValueError("tau must be > 0")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.lrd_mode not in LRD_MODES:
            raise ValueError(f"lrd_mode must be one of {LRD_MODES}")


@dataclass
class LossOutput:
    value: float
    grad_logits: np.ndarray | None = None
    grad_features: np.ndarray | None = None

    @classmethod
    def zero(cls) -> "LossOutput":
        return cls(0.0)


def _add_into(acc, grad, scale):
    if grad is None or scale == 0.0:
        return acc
    g = scale * grad
    return g if acc is None else acc + g


def combine(outputs, scales) -> LossOutput:
    """Linear combination of loss outputs (None gradients act as zero)."""
    value = 0.0
    gl = None
    gf = None
    for out, s in zip(outputs, scales):
        value += s * out.value
        gl = _add_into(gl, out.grad_logits, s)
        gf = _add_into(gf, out.grad_features, s)
    return LossOutput(value, gl, gf)


def ce_loss(student_logits, labels) -> LossOutput:
    """Mean cross-entropy against hard labels at temperature 1."""
    z = check_matrix(student_logits, "student_logits")
    y = check_labels(labels, z.shape[1])
    if y.shape[0] != z.shape[0]:
        raise ValueError("labels and logits disagree on batch size")
    n = z.shape[0]
    p = softmax_rows(z, 1.0)
    picked = np.maximum(p[np.arange(n), y], PROB_FLOOR)
    value = float(-np.log(picked).mean())
    grad = p.copy()
    grad[np.arange(n), y] -= 1.0
    return LossOutput(value, grad_logits=grad / n)


def _kl_rows(t, s):
    """Per-row KL(t || s) for row-stochastic matrices, 0*log(0) = 0."""
    if np.any((t > PROB_FLOOR) & (s == 0.0)):
        raise SupportViolation(
            "support violation: student assigns zero mass where the teacher has some")
    mask = t > 0.0
    logt = np.zeros_like(t)
    logs = np.zeros_like(t)
    np.log(t, out=logt, where=mask)
    np.log(np.maximum(s, PROB_FLOOR), out=logs, where=mask)
    return np.sum(np.where(mask, t * (logt - logs), 0.0), axis=1)


def vanilla_kd_loss(student_out, teacher_out, tau: float,
                    include_features: bool | None = None) -> LossOutput:
    """Plain distillation: mean feature distance plus mean KL from the
    teacher's softened prediction to the student's.

    `include_features=None` includes the feature term exactly when the
    feature dimensions match; pass student features through a projector
    first if they do not. The value is not temperature-scaled.
    """
    zs = check_matrix(student_out.logits, "student logits")
    zt = check_matrix(teacher_out.logits, "teacher logits", cols=zs.shape[1])
    fs = check_matrix(student_out.features, "student features")
    ft = check_matrix(teacher_out.features, "teacher features")
    if zs.shape[0] != zt.shape[0] or fs.shape[0] != zs.shape[0] or ft.shape[0] != zs.shape[0]:
        raise ValueError("student and teacher batches differ in size")
    dims_match = fs.shape[1] == ft.shape[1]
    if include_features is None:
        include_features = dims_match
    if include_features and not dims_match:
        raise ValueError(
            f"feature dims differ ({fs.shape[1]} vs {ft.shape[1]}); "
            "project the student features first")

    n = zs.shape[0]
    ps = softmax_rows(zs, tau)
    pt = softmax_rows(zt, tau)
    value = float(_kl_rows(pt, ps).mean())
    grad_logits = (ps - pt) / (n * tau)

    grad_features = None
    if include_features:
        diff = fs - ft
        dist = np.linalg.norm(diff, axis=1)
        value += float(dist.mean())
        safe = np.where(dist == 0.0, 1.0, dist)
        grad_features = diff / (n * safe[:, None])
        grad_features[dist == 0.0] = 0.0
    return LossOutput(value, grad_logits=grad_logits, grad_features=grad_features)


def rrd_loss(projector: ProjectorNet, student_features, rectified_teacher_features):
    """Mean Euclidean distance between projected student features and the
    rectified teacher targets.

    Returns (LossOutput, projector parameter gradients); grad_features is
    the gradient with respect to the raw student features, i.e. it has been
    chained back through the projector. The gradient is defined as zero at
    exactly zero distance.
    """
    fs = check_matrix(student_features, "student_features", cols=projector.input_dim)
    tgt = check_matrix(rectified_teacher_features, "rectified_teacher_features",
                       cols=projector.output_dim)
    if fs.shape[0] != tgt.shape[0]:
        raise ValueError("student features and targets disagree on batch size")
    n = fs.shape[0]
    out = forward(projector, fs)
    diff = out.logits - tgt
    dist = np.linalg.norm(diff, axis=1)
    value = float(dist.mean())
    safe = np.where(dist == 0.0, 1.0, dist)
    grad_proj = diff / (n * safe[:, None])
    grad_proj[dist == 0.0] = 0.0
    grads = backward(projector, out, grad_logits=grad_proj)
    return LossOutput(value, grad_features=grads.inputs), grads.params


def lrd_loss(student_logits, rectified_teacher_probs, labels, weights, tau: float,
             mode: str = "canonical", tau_squared_scaling: bool = True) -> LossOutput:
    """Class-weighted divergence from the rectified teacher prediction.

    canonical: (1/N) * sum_i w_{y_i} * KL(t_i || softmax(z_i/tau)),
    multiplied by tau^2 when tau_squared_scaling is on, so its gradient
    stays magnitude-comparable to cross-entropy across temperatures.

    literal: (1/N) * sum_i w_{y_i} * sum_j s_ij * log(w_{y_i} * s_ij / t_ij)
    with s = softmax(z/tau), kept verbatim (and unscaled) for side-by-side
    audits; it can go negative for class weights below one.
    """
    if mode not in LRD_MODES:
        raise ValueError(f"mode must be one of {LRD_MODES}")
    z = check_matrix(student_logits, "student_logits")
    t = check_matrix(rectified_teacher_probs, "rectified_teacher_probs", cols=z.shape[1])
    y = check_labels(labels, z.shape[1])
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (z.shape[1],):
        raise ValueError(f"weights shape {w.shape} != ({z.shape[1]},)")
    if np.any(w <= 0.0):
        raise ValueError("class weights must be positive")
    if y.shape[0] != z.shape[0] or t.shape[0] != z.shape[0]:
        raise ValueError("batch sizes disagree")
    if t.min() < 0.0 or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("rectified teacher probs must be row-stochastic")

    n = z.shape[0]
    s = softmax_rows(z, tau)
    wy = w[y]

    if mode == "canonical":
        value = float((wy * _kl_rows(t, s)).mean())
        grad = wy[:, None] * (s - t) / (n * tau)
        if tau_squared_scaling:
            value *= tau * tau
            grad *= tau * tau
        return LossOutput(value, grad_logits=grad)

    # literal form: the weight rides inside the logarithm
    if np.any((s > PROB_FLOOR) & (t == 0.0)):
        raise SupportViolation(
            "support violation: teacher assigns zero mass where the student has some")
    mask = s > 0.0
    ratio = np.log(np.maximum(wy[:, None] * s, PROB_FLOOR)) - np.log(np.maximum(t, PROB_FLOOR))
    per_row = np.sum(np.where(mask, s * ratio, 0.0), axis=1)
    value = float((wy * per_row).mean())
    # dL_i/ds_j = w * (log(w s_j / t_j) + 1); chain through the softmax
    h = wy[:, None] * (ratio + 1.0)
    grad = s * (h - np.sum(s * h, axis=1, keepdims=True)) / (n * tau)
    return LossOutput(value, grad_logits=grad)


def total_loss(config: LossConfig, ce: LossOutput, lrd: LossOutput,
               rrd: LossOutput) -> LossOutput:
    """ce + lrd + beta * rrd, values and gradients combined linearly."""
    return combine((ce, lrd, rrd), (1.0, 1.0, config.beta))
