"""End-to-end training: teacher pretraining, the distillation loop, variant
ablations, and evaluation with head/medium/tail class groups.

The distillation pipeline runs in three timed phases: a statistics pass over
the teacher's features, optimization of the ideal class means, and the
actual student training loop. Baseline variants skip the phases they do not
need (their timings are reported as zero).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from .data import LabeledDataset, class_counts
from .losses import LossConfig, LossOutput, ce_loss, combine, lrd_loss, rrd_loss, \
    total_loss, vanilla_kd_loss
from .nets import FeedForwardNet, OptimizerState, cosine_lr, forward, backward, \
    init_net, make_projector, sgd_step
from .numerics import Rng, l2_normalize_rows, softmax_rows
from .rectify import class_weights, compute_class_means, optimize_ideal_means, \
    rectify_features, rectify_predictions
from .validation import MissingClassError, NumericError, SupportViolation

VARIANTS = ("ce", "vkd", "rrd_only", "lrd_only", "krd")

# Substream ids for everything the trainer draws from the base seed. Shared
# streams (student init, shuffling) make variant runs directly comparable.
STREAM_TEACHER_INIT = 21
STREAM_STUDENT_INIT = 22
STREAM_PROJECTOR_INIT = 23
STREAM_TEACHER_SHUFFLE = 24
STREAM_STUDENT_SHUFFLE = 25


@dataclass
class TrainConfig:
    # epochs and base_lr are calibrated for the desk-scale networks; the
    # momentum/decay/batch settings follow the reference training recipe
    epochs: int = 60
    batch_size: int = 128
    base_lr: float = 0.005
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)
    teacher_hidden: tuple = (128, 128, 64)
    student_hidden: tuple = (32, 16)
    projector_layers: int = 3
    variant: str = "krd"
    teacher_epochs: int | None = None  # defaults to epochs
    ideal_means_steps: int = 2000
    ideal_means_step_size: float = 0.1
    # wiring-check switches: force all class weights to one / skip both
    # rectification steps (used to show the degenerate pipeline collapses
    # onto the vanilla baseline)
    uniform_class_weights: bool = False
    disable_rectification: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        self.teacher_hidden = tuple(int(d) for d in self.teacher_hidden)
        self.student_hidden = tuple(int(d) for d in self.student_hidden)


def config_to_dict(config: TrainConfig) -> dict:
    d = asdict(config)
    d["teacher_hidden"] = list(config.teacher_hidden)
    d["student_hidden"] = list(config.student_hidden)
    return d


@dataclass(frozen=True)
class ClassGroups:
    """A partition of class ids into head/medium/tail."""

    head: tuple
    medium: tuple
    tail: tuple
    description: str

    def __post_init__(self):
        ids = sorted(self.head + self.medium + self.tail)
        if ids != list(range(len(ids))):
            raise ValueError("groups must partition the class ids exactly once")
        if not (self.head and self.medium and self.tail):
            raise ValueError(f"empty group in rule {self.description!r}")


def count_sorted_thirds(train_counts) -> ClassGroups:
    """Classes sorted by training count, split into thirds; the head group
    holds the most frequent classes (and any remainder)."""
    counts = np.asarray(train_counts)
    order = np.argsort(-counts, kind="stable")
    parts = np.array_split(order, 3)
    sizes = tuple(len(p) for p in parts)
    return ClassGroups(
        head=tuple(int(c) for c in parts[0]),
        medium=tuple(int(c) for c in parts[1]),
        tail=tuple(int(c) for c in parts[2]),
        description=f"count-sorted-thirds{sizes}",
    )


def count_threshold_groups(train_counts, head_above: int, tail_below: int) -> ClassGroups:
    """Absolute thresholds: head when count > head_above, tail when
    count < tail_below, medium otherwise."""
    counts = np.asarray(train_counts)
    ids = np.arange(counts.size)
    head = tuple(int(c) for c in ids[counts > head_above])
    tail = tuple(int(c) for c in ids[counts < tail_below])
    medium = tuple(int(c) for c in ids[(counts <= head_above) & (counts >= tail_below)])
    return ClassGroups(head, medium, tail,
                       f"count-thresholds(head>{head_above},tail<{tail_below})")


@dataclass
class Metrics:
    overall_top1: float
    per_class_top1: list
    group_top1: dict  # {"head": ..., "medium": ..., "tail": ...}
    group_rule: str

    def to_dict(self) -> dict:
        return {
            "overall_top1": self.overall_top1,
            "per_class_top1": list(self.per_class_top1),
            "group_top1": dict(self.group_top1),
            "group_rule": self.group_rule,
        }


@dataclass
class ExperimentResult:
    config: dict
    metrics: Metrics | None
    loss_trace: list
    phase_seconds: dict  # {"class_stats", "ideal_means", "train"}
    seed: int

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "config": self.config,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "loss_trace": list(self.loss_trace),
            "seed": self.seed,
        }
        if include_timings:
            d["phase_seconds"] = dict(self.phase_seconds)
        return d


def save_result(result: ExperimentResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_result(path) -> ExperimentResult:
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    metrics = Metrics(**d["metrics"]) if d["metrics"] is not None else None
    return ExperimentResult(config=d["config"], metrics=metrics,
                            loss_trace=d["loss_trace"],
                            phase_seconds=d.get("phase_seconds", {}),
                            seed=d["seed"])


def predict_labels(net: FeedForwardNet, features) -> np.ndarray:
    return np.argmax(forward(net, features).logits, axis=1)


def evaluate(net: FeedForwardNet, eval_data: LabeledDataset,
             groups: ClassGroups) -> Metrics:
    """Top-1 accuracy overall, per class, and per head/medium/tail group."""
    pred = predict_labels(net, eval_data.features)
    correct = pred == eval_data.labels
    counts = class_counts(eval_data)
    hits = np.bincount(eval_data.labels[correct], minlength=eval_data.n_classes)
    per_class = np.divide(hits, counts, out=np.zeros(eval_data.n_classes),
                          where=counts > 0)
    group_top1 = {}
    for name, ids in (("head", groups.head), ("medium", groups.medium),
                      ("tail", groups.tail)):
        ids = list(ids)
        n = int(counts[ids].sum())
        if n == 0:
            raise ValueError(f"group {name!r} has no evaluation examples")
        group_top1[name] = float(hits[ids].sum() / n)
    return Metrics(
        overall_top1=float(correct.sum() / eval_data.n_examples),
        per_class_top1=[float(v) for v in per_class],
        group_top1=group_top1,
        group_rule=groups.description,
    )


def _batches(n, batch_size, perm):
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def pretrain_teacher(config: TrainConfig, train_data: LabeledDataset) -> FeedForwardNet:
    """Cross-entropy training of the teacher on the (long-tailed) data."""
    if train_data.n_examples == 0:
        raise ValueError("training data is empty")
    dims = (train_data.dim,) + config.teacher_hidden + (train_data.n_classes,)
    rng = Rng(config.seed)
    net = init_net(rng.substream(STREAM_TEACHER_INIT), dims)
    epochs = config.teacher_epochs or config.epochs
    _train_ce(net, config, train_data, epochs, rng.substream(STREAM_TEACHER_SHUFFLE))
    return net


def _train_ce(net, config, data, epochs, shuffle_rng):
    opt = OptimizerState.for_params(net.parameters(), config.momentum,
                                    config.weight_decay, config.base_lr)
    n = data.n_examples
    trace = []
    for epoch in range(epochs):
        lr = cosine_lr(epoch, epochs, config.base_lr)
        perm = shuffle_rng.permutation(n)
        total = 0.0
        for idx in _batches(n, config.batch_size, perm):
            out = forward(net, data.features[idx])
            _abort_if_diverged(out, epoch, idx)
            ce = ce_loss(out.logits, data.labels[idx])
            _abort_if_nonfinite(ce.value, epoch, idx)
            grads = backward(net, out, grad_logits=ce.grad_logits)
            sgd_step(opt, net.parameters(), grads.params, lr)
            total += ce.value * len(idx)
        trace.append(total / n)
    return trace


def _abort_if_nonfinite(value, epoch, idx):
    if not np.isfinite(value):
        raise NumericError(
            f"non-finite loss at epoch {epoch}, batch starting with example {int(idx[0])}",
            batch_index=int(idx[0]))


def _abort_if_diverged(out, epoch, idx):
    if not (np.all(np.isfinite(out.logits)) and np.all(np.isfinite(out.features))):
        raise NumericError(
            f"non-finite network output at epoch {epoch}, batch starting with "
            f"example {int(idx[0])}", batch_index=int(idx[0]))


def train_student(config: TrainConfig, teacher: FeedForwardNet | None,
                  train_data: LabeledDataset, eval_data: LabeledDataset | None,
                  artifacts: dict | None = None):
    """Run one variant end to end.

    Returns (student, projector or None, ExperimentResult). The teacher is
    only read, never mutated; the `ce` variant does not touch it at all.
    Intermediate artifacts (the optimized ideal means) are placed into
    `artifacts` when a dict is supplied.
    """
    variant = config.variant
    needs_teacher = variant != "ce"
    needs_features = variant in ("rrd_only", "krd")
    needs_logit_rect = variant in ("lrd_only", "krd")
    if needs_teacher and teacher is None:
        raise ValueError(f"variant {variant!r} requires a teacher")
    if needs_teacher and teacher.input_dim != train_data.dim:
        raise ValueError("teacher input dim does not match the data")

    counts = class_counts(train_data)
    for c in range(train_data.n_classes):
        if counts[c] == 0:
            raise MissingClassError(c)

    loss_cfg = config.loss
    phase = {"class_stats": 0.0, "ideal_means": 0.0, "train": 0.0}
    rng = Rng(config.seed)

    ideal = None
    projector = None
    if needs_features:
        t0 = time.perf_counter()
        stats = compute_class_means(teacher, train_data, loss_cfg.alpha)
        phase["class_stats"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        ideal = optimize_ideal_means(stats, config.ideal_means_steps,
                                     config.ideal_means_step_size)
        phase["ideal_means"] = time.perf_counter() - t0
        if artifacts is not None:
            artifacts["ideal_means"] = ideal

    weights = None
    if needs_features or needs_logit_rect:
        weights = (np.ones(train_data.n_classes) if config.uniform_class_weights
                   else class_weights(counts))

    student_dims = (train_data.dim,) + config.student_hidden + (train_data.n_classes,)
    student = init_net(rng.substream(STREAM_STUDENT_INIT), student_dims)
    params = student.parameters()
    if needs_features:
        projector = make_projector(rng.substream(STREAM_PROJECTOR_INIT),
                                   student.feature_dim, teacher.feature_dim,
                                   config.projector_layers)
        params = params + projector.parameters()
    opt = OptimizerState.for_params(params, config.momentum, config.weight_decay,
                                    config.base_lr)
    shuffle_rng = rng.substream(STREAM_STUDENT_SHUFFLE)

    n = train_data.n_examples
    trace = []
    t_train = time.perf_counter()
    for epoch in range(config.epochs):
        lr = cosine_lr(epoch, config.epochs, config.base_lr)
        perm = shuffle_rng.permutation(n)
        epoch_total = 0.0
        for idx in _batches(n, config.batch_size, perm):
            x = train_data.features[idx]
            y = train_data.labels[idx]
            s_out = forward(student, x)
            _abort_if_diverged(s_out, epoch, idx)

            t_out = forward(teacher, x) if needs_teacher else None
            proj_grads = None
            try:
                ce = ce_loss(s_out.logits, y)
                if variant == "vkd":
                    kd = vanilla_kd_loss(s_out, t_out, loss_cfg.tau)
                    total = combine((ce, kd), (1.0, 1.0))
                else:
                    lrd = LossOutput.zero()
                    rrd = LossOutput.zero()
                    if needs_logit_rect:
                        t_probs = softmax_rows(t_out.logits, loss_cfg.tau)
                        if not config.disable_rectification:
                            t_probs = rectify_predictions(t_probs, y)
                        lrd = lrd_loss(s_out.logits, t_probs, y, weights, loss_cfg.tau,
                                       loss_cfg.lrd_mode, loss_cfg.tau_squared_scaling)
                    if needs_features:
                        t_feat = l2_normalize_rows(t_out.features)
                        if not config.disable_rectification:
                            t_feat = rectify_features(t_feat, y, ideal, weights)
                        rrd, proj_grads = rrd_loss(projector, s_out.features, t_feat)
                    total = total_loss(loss_cfg, ce, lrd, rrd)
            except SupportViolation as exc:
                # a vanished softmax tail means the student has diverged;
                # treat it like any other numeric failure of the run
                raise NumericError(
                    f"{exc} (epoch {epoch}, batch starting with example {int(idx[0])})",
                    batch_index=int(idx[0])) from exc

            _abort_if_nonfinite(total.value, epoch, idx)
            s_grads = backward(student, s_out, grad_logits=total.grad_logits,
                               grad_features=total.grad_features)
            all_grads = s_grads.params
            if proj_grads is not None:
                all_grads = all_grads + [loss_cfg.beta * g for g in proj_grads]
            sgd_step(opt, params, all_grads, lr)
            epoch_total += total.value * len(idx)
        trace.append(epoch_total / n)
    phase["train"] = time.perf_counter() - t_train

    metrics = None
    if eval_data is not None:
        metrics = evaluate(student, eval_data, count_sorted_thirds(counts))
    result = ExperimentResult(config=config_to_dict(config), metrics=metrics,
                              loss_trace=trace, phase_seconds=phase,
                              seed=config.seed)
    return student, projector, result


def distill(config: TrainConfig, teacher: FeedForwardNet,
            train_data: LabeledDataset, eval_data: LabeledDataset | None):
    """The full rectified-distillation pipeline (variant 'krd')."""
    if config.variant != "krd":
        raise ValueError("distill runs the full pipeline; use run_variant for baselines")
    return train_student(config, teacher, train_data, eval_data)


def run_variant(variant: str, config: TrainConfig, teacher: FeedForwardNet | None,
                train_data: LabeledDataset, eval_data: LabeledDataset | None) -> ExperimentResult:
    """One ablation row: same seed and config, only the objective changes."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    cfg = replace(config, variant=variant)
    return train_student(cfg, teacher, train_data, eval_data)[2]
