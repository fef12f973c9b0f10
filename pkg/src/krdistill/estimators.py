"""Scikit-learn style estimators wrapping the training pipeline.

`FeedForwardClassifier` is a plain cross-entropy classifier (the teacher
role); `DistilledClassifier` trains a compact student against a fitted
teacher using any of the ablation variants. Both follow the sklearn
estimator contract (get_params/set_params, fit returns self), so they
compose with pipelines, grid search and cloning.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .losses import LossConfig
from .nets import forward
from .numerics import softmax_rows
from .trainer import TrainConfig, pretrain_teacher, train_student
from .data import LabeledDataset


def _encode_labels(y):
    classes, encoded = np.unique(y, return_inverse=True)
    return classes, encoded.astype(np.int64)


class FeedForwardClassifier(BaseEstimator, ClassifierMixin):
    """ReLU MLP trained with SGD momentum and a cosine learning-rate decay."""

    def __init__(self, hidden_dims=(128, 128, 64), epochs=60, batch_size=128,
                 lr=0.005, momentum=0.9, weight_decay=5e-4, seed=0):
        self.hidden_dims = hidden_dims
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, encoded = _encode_labels(y)
        if len(self.classes_) < 2:
            raise ValueError("need at least 2 classes")
        data = LabeledDataset(np.asarray(X, dtype=np.float64), encoded,
                              len(self.classes_))
        config = TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                             base_lr=self.lr, momentum=self.momentum,
                             weight_decay=self.weight_decay, seed=self.seed,
                             teacher_hidden=tuple(self.hidden_dims))
        self.net_ = pretrain_teacher(config, data)
        self.n_features_in_ = data.dim
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X)
        return softmax_rows(forward(self.net_, X).logits, 1.0)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class DistilledClassifier(BaseEstimator, ClassifierMixin):
    """Compact student distilled from a fitted FeedForwardClassifier.

    `variant` selects the objective: 'ce' (no teacher), 'vkd', 'rrd_only',
    'lrd_only', or 'krd' (feature and prediction rectification, the
    default). Hyperparameters mirror TrainConfig/LossConfig.
    """

    def __init__(self, teacher=None, variant="krd", hidden_dims=(32, 16),
                 epochs=60, batch_size=128, lr=0.005, momentum=0.9,
                 weight_decay=5e-4, beta=10.0, tau=2.0, alpha=0.8,
                 projector_layers=3, seed=0):
        self.teacher = teacher
        self.variant = variant
        self.hidden_dims = hidden_dims
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.beta = beta
        self.tau = tau
        self.alpha = alpha
        self.projector_layers = projector_layers
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, encoded = _encode_labels(y)
        if len(self.classes_) < 2:
            raise ValueError("need at least 2 classes")

        teacher_net = None
        if self.variant != "ce":
            if self.teacher is None:
                raise ValueError(f"variant {self.variant!r} needs a fitted teacher")
            teacher_net = getattr(self.teacher, "net_", self.teacher)
            t_classes = getattr(self.teacher, "classes_", None)
            if t_classes is not None and not np.array_equal(t_classes, self.classes_):
                raise ValueError("teacher was fitted on different classes")

        data = LabeledDataset(np.asarray(X, dtype=np.float64), encoded,
                              len(self.classes_))
        config = TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, base_lr=self.lr,
            momentum=self.momentum, weight_decay=self.weight_decay,
            seed=self.seed,
            loss=LossConfig(beta=self.beta, tau=self.tau, alpha=self.alpha),
            student_hidden=tuple(self.hidden_dims),
            projector_layers=self.projector_layers, variant=self.variant)
        self.net_, self.projector_, self.result_ = train_student(
            config, teacher_net, data, None)
        self.n_features_in_ = data.dim
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X)
        return softmax_rows(forward(self.net_, X).logits, 1.0)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
