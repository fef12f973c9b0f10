"""Small fully-connected classifiers with hand-derived backpropagation.

A `FeedForwardNet` is a stack of affine layers with ReLU on every layer
except the last. The activation feeding the final affine layer is the
network's feature representation; the final affine output is the logit
vector. Teacher, student and the feature projector all share this type.

Gradients are computed analytically and verified against central finite
differences in the test suite; the loss modules inject gradient both at the
logits and directly at the feature layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import Rng
from .validation import ParseError, check_matrix

NET_MAGIC = "KRDNET 1"


@dataclass
class FeedForwardNet:
    layer_dims: tuple
    weights: list  # weights[k] has shape (layer_dims[k], layer_dims[k+1])
    biases: list  # biases[k] has shape (layer_dims[k+1],)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def feature_dim(self) -> int:
        # dimension of the activation feeding the final affine layer
        return self.layer_dims[-2]

    def parameters(self) -> list:
        """Flat parameter list [W0, b0, W1, b1, ...] (live arrays)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "FeedForwardNet":
        return FeedForwardNet(
            tuple(self.layer_dims),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


# A projector is an ordinary FeedForwardNet mapping the student feature
# dimension to the teacher's; see make_projector.
ProjectorNet = FeedForwardNet


@dataclass
class NetOutput:
    features: np.ndarray  # batch x feature_dim, post-ReLU
    logits: np.ndarray  # batch x output_dim
    cache: list | None = field(default=None, repr=False)  # for backward


def init_net(rng: Rng, layer_dims) -> FeedForwardNet:
    """He-initialized net: W ~ N(0, 2/fan_in), biases zero."""
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2:
        raise ValueError("layer_dims needs at least input and output sizes")
    if any(d <= 0 for d in dims):
        raise ValueError(f"layer_dims must be positive, got {dims}")
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.standard_normal((d_in, d_out)) * math.sqrt(2.0 / d_in))
        biases.append(np.zeros(d_out))
    return FeedForwardNet(dims, weights, biases)


def make_projector(rng: Rng, student_dim: int, teacher_dim: int,
                   hidden_layers: int = 3, hidden_width: int | None = None) -> ProjectorNet:
    """MLP aligning student features to the teacher feature dimension.

    Three hidden layers by default; hidden width defaults to
    max(student_dim, teacher_dim). The output layer is linear and starts at
    zero, so the feature-matching path is silent until the projector has
    learned something; a randomly initialized output layer injects
    uninformative gradient into the student trunk at these network sizes.
    """
    if hidden_layers < 0:
        raise ValueError("hidden_layers must be >= 0")
    width = int(hidden_width) if hidden_width else max(int(student_dim), int(teacher_dim))
    dims = [int(student_dim)] + [width] * int(hidden_layers) + [int(teacher_dim)]
    net = init_net(rng, dims)
    net.weights[-1][:] = 0.0
    return net


def forward(net: FeedForwardNet, batch) -> NetOutput:
    """Run the net on a batch (rows are examples); caches for backward."""
    x = check_matrix(batch, "batch", cols=net.input_dim)
    inputs = [x]  # activation feeding each affine layer
    preacts = []
    h = x
    n_layers = len(net.weights)
    for k in range(n_layers - 1):
        a = h @ net.weights[k] + net.biases[k]
        preacts.append(a)
        h = np.maximum(a, 0.0)
        inputs.append(h)
    logits = h @ net.weights[-1] + net.biases[-1]
    return NetOutput(features=h, logits=logits, cache=[inputs, preacts])


@dataclass
class NetGrads:
    params: list  # [dW0, db0, dW1, db1, ...], same order as net.parameters()
    inputs: np.ndarray  # gradient with respect to the input batch


def backward(net: FeedForwardNet, out: NetOutput, grad_logits=None,
             grad_features=None) -> NetGrads:
    """Backpropagate upstream gradients to every weight and bias.

    `grad_logits` enters at the final affine output, `grad_features` directly
    at the feature layer (the final layer sees only the logit path). Either
    may be None, meaning zero. Requires the cache produced by forward().
    """
    if out.cache is None:
        raise RuntimeError("backward requires the forward cache")
    inputs, preacts = out.cache
    batch = inputs[0]
    if grad_logits is None:
        grad_logits = np.zeros_like(out.logits)
    else:
        grad_logits = check_matrix(grad_logits, "grad_logits", cols=net.output_dim)
        if grad_logits.shape[0] != batch.shape[0]:
            raise ValueError("grad_logits batch size mismatch")
    if grad_features is None:
        grad_features = np.zeros_like(out.features)
    else:
        grad_features = check_matrix(grad_features, "grad_features", cols=net.feature_dim)
        if grad_features.shape[0] != batch.shape[0]:
            raise ValueError("grad_features batch size mismatch")

    n_layers = len(net.weights)
    grads = [None] * (2 * n_layers)
    g = grad_logits
    grads[2 * (n_layers - 1)] = inputs[n_layers - 1].T @ g
    grads[2 * (n_layers - 1) + 1] = g.sum(axis=0)
    gh = g @ net.weights[-1].T + grad_features
    for k in range(n_layers - 2, -1, -1):
        ga = gh * (preacts[k] > 0.0)
        grads[2 * k] = inputs[k].T @ ga
        grads[2 * k + 1] = ga.sum(axis=0)
        gh = ga @ net.weights[k].T
    return NetGrads(params=grads, inputs=gh)


@dataclass
class OptimizerState:
    """SGD-with-momentum buffers: v <- m*v + g + wd*theta; theta <- theta - lr*v."""

    velocities: list
    momentum: float = 0.9
    weight_decay: float = 0.0
    base_lr: float = 0.1
    epoch: int = 0

    @classmethod
    def for_params(cls, params, momentum=0.9, weight_decay=0.0, base_lr=0.1):
        return cls([np.zeros_like(p) for p in params], float(momentum),
                   float(weight_decay), float(base_lr))


def sgd_step(state: OptimizerState, params, grads, lr: float) -> None:
    """One decoupled-lr momentum update, in place on params and state."""
    if lr <= 0.0 or not np.isfinite(lr):
        raise ValueError(f"lr must be positive, got {lr!r}")
    if len(params) != len(grads) or len(params) != len(state.velocities):
        raise ValueError("params/grads/velocity length mismatch")
    for p, g, v in zip(params, grads, state.velocities):
        if p.shape != g.shape:
            raise ValueError(f"grad shape {g.shape} != param shape {p.shape}")
        v *= state.momentum
        v += g
        if state.weight_decay:
            v += state.weight_decay * p
        p -= lr * v


def cosine_lr(epoch: int, total_epochs: int, base_lr: float) -> float:
    """base_lr * 0.5 * (1 + cos(pi * epoch / total_epochs))."""
    if not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {total_epochs})")
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * epoch / total_epochs))


def save_net(net: FeedForwardNet, path) -> None:
    """Text format: magic, layer dims, then one line per weight/bias matrix.

    Values are written with 17 significant digits so the round trip is
    bit-exact.
    """
    lines = [NET_MAGIC, " ".join(str(d) for d in net.layer_dims)]
    for w, b in zip(net.weights, net.biases):
        lines.append(" ".join(f"{v:.17g}" for v in w.ravel()))
        lines.append(" ".join(f"{v:.17g}" for v in b))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(text, count, line_no, what):
    parts = text.split()
    if len(parts) != count:
        raise ParseError(f"expected {count} values for {what}, got {len(parts)}", line_no)
    try:
        vals = np.array([float(p) for p in parts])
    except ValueError:
        raise ParseError(f"non-numeric value in {what}", line_no) from None
    if not np.all(np.isfinite(vals)):
        raise ParseError(f"non-finite value in {what}", line_no)
    return vals


def load_net(path) -> FeedForwardNet:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != NET_MAGIC:
        raise ParseError(f"bad magic, expected {NET_MAGIC!r}", 1)
    if len(lines) < 2:
        raise ParseError("missing layer dims", 2)
    try:
        dims = tuple(int(t) for t in lines[1].split())
    except ValueError:
        raise ParseError("layer dims must be integers", 2) from None
    if len(dims) < 2 or any(d <= 0 for d in dims):
        raise ParseError(f"invalid layer dims {dims}", 2)
    n_layers = len(dims) - 1
    expected = 2 + 2 * n_layers
    if len(lines) < expected:
        raise ParseError(f"expected {expected} lines, got {len(lines)}", len(lines))
    weights, biases = [], []
    ln = 3
    for k in range(n_layers):
        d_in, d_out = dims[k], dims[k + 1]
        w = _parse_floats(lines[ln - 1], d_in * d_out, ln, f"weights[{k}]")
        weights.append(w.reshape(d_in, d_out))
        ln += 1
        biases.append(_parse_floats(lines[ln - 1], d_out, ln, f"biases[{k}]"))
        ln += 1
    return FeedForwardNet(dims, weights, biases)
