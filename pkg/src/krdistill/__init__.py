"""Knowledge-rectification distillation for long-tailed classification.

Trains a compact student classifier against a frozen teacher whose
feature representations and predictions have been rectified to undo the
bias a long-tailed training set leaves in them.
"""

from .numerics import Rng, softmax_rows, log_sum_exp, kl_divergence, \
    gaussian_sample, l2_normalize_rows
from .nets import FeedForwardNet, ProjectorNet, NetOutput, OptimizerState, \
    forward, backward, init_net, make_projector, sgd_step, cosine_lr, \
    save_net, load_net
from .data import LabeledDataset, ImbalanceProfile, make_exponential_counts, \
    synth_gaussian_mixture, balanced_eval_split, class_counts, save_dataset, \
    load_dataset, synthetic_benchmark
from .rectify import ClassStats, RectifiedPrediction, ema_update, \
    compute_class_means, ideal_means_objective, ideal_means_gradient, \
    optimize_ideal_means, class_weights, rectify_features, \
    rectify_prediction, rectify_predictions, save_ideal_means, load_ideal_means
from .losses import LossConfig, LossOutput, ce_loss, vanilla_kd_loss, \
    rrd_loss, lrd_loss, total_loss
from .trainer import TrainConfig, Metrics, ExperimentResult, ClassGroups, \
    count_sorted_thirds, count_threshold_groups, pretrain_teacher, \
    train_student, distill, run_variant, evaluate, predict_labels, \
    save_result, load_result, VARIANTS
from .estimators import FeedForwardClassifier, DistilledClassifier
from .validation import ParseError, MissingClassError, NumericError, SupportViolation

__version__ = "0.1.0"
