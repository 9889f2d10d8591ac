"""Feed-forward decision head on frozen document vectors.

Architecture: 1103 -> 128 linear, inverted dropout (p=0.5, training only),
ReLU, then a final linear layer with 1 output (sigmoid score thresholded at
0.5) or 2 outputs (softmax over the two classes).  Gradients are exact
analytic expressions; the optimizer is AdamW with decoupled weight decay.
Everything is seeded and single-threaded deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, ValidationError

INPUT_DIM = 1103
HIDDEN_DIM = 128

POLICY_REGRESSION = "regression_threshold"
POLICY_SOFTMAX = "binary_softmax"


@dataclass
class HeadParams:
    w1: np.ndarray  # (HIDDEN_DIM, input_dim)
    b1: np.ndarray  # (HIDDEN_DIM,)
    w2: np.ndarray  # (out_dim, HIDDEN_DIM)
    b2: np.ndarray  # (out_dim,)
    out_dim: int
    dropout_p: float = 0.5

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    def copy(self) -> "HeadParams":
        return HeadParams(
            w1=self.w1.copy(), b1=self.b1.copy(), w2=self.w2.copy(), b2=self.b2.copy(),
            out_dim=self.out_dim, dropout_p=self.dropout_p,
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-5
    batch_size: int = 8
    epochs: int = 1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1 or self.folds < 2:
            raise DomainError("train hyperparameters must be positive (folds >= 2)")


@dataclass(frozen=True)
class DecisionPolicy:
    kind: str = POLICY_REGRESSION
    threshold: float = 0.5
    preprocess: str = "none"

    def __post_init__(self):
        if self.kind not in (POLICY_REGRESSION, POLICY_SOFTMAX):
            raise ConfigurationError(f"unknown policy kind {self.kind!r}")
        if self.preprocess not in ("none", "strip_urls"):
            raise ConfigurationError(f"unknown preprocess {self.preprocess!r}")
        if self.kind == POLICY_REGRESSION and self.threshold != 0.5:
            raise ConfigurationError("the regression policy threshold is fixed at 0.5")

    @property
    def out_dim(self) -> int:
        return 1 if self.kind == POLICY_REGRESSION else 2


@dataclass(frozen=True)
class Decision:
    label: int
    score: float


def init_head(seed: int, out_dim: int, input_dim: int = INPUT_DIM) -> HeadParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if out_dim not in (1, 2):
        raise DomainError(f"out_dim must be 1 or 2, got {out_dim}")
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(input_dim)
    bound2 = 1.0 / np.sqrt(HIDDEN_DIM)
    return HeadParams(
        w1=rng.uniform(-bound1, bound1, size=(HIDDEN_DIM, input_dim)),
        b1=np.zeros(HIDDEN_DIM),
        w2=rng.uniform(-bound2, bound2, size=(out_dim, HIDDEN_DIM)),
        b2=np.zeros(out_dim),
        out_dim=out_dim,
    )


def _as_batch(x) -> np.ndarray:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise DomainError(f"expected a vector or batch of vectors, got shape {array.shape}")
    return array


def _dropout_mask(shape, p: float, dropout_seed: int | None) -> np.ndarray:
    rng = np.random.default_rng(0 if dropout_seed is None else dropout_seed)
    return (rng.random(shape) >= p).astype(np.float64) / (1.0 - p)


def _forward_full(head: HeadParams, batch: np.ndarray, mode: str, dropout_seed: int | None):
    """Forward pass returning intermediates needed for the backward pass."""
    if batch.shape[1] != head.input_dim:
        raise DomainError(f"input dimension {batch.shape[1]} != expected {head.input_dim}")
    if mode not in ("train", "eval"):
        raise DomainError(f"mode must be 'train' or 'eval', got {mode!r}")
    a1 = batch @ head.w1.T + head.b1
    if mode == "train":
        mask = _dropout_mask(a1.shape, head.dropout_p, dropout_seed)
        dropped = a1 * mask
    else:
        mask = None
        dropped = a1
    hidden = np.maximum(dropped, 0.0)
    logits = hidden @ head.w2.T + head.b2
    return logits, dropped, hidden, mask


def forward(head: HeadParams, x, mode: str = "eval", dropout_seed: int | None = None) -> np.ndarray:
    """Logits for one input vector (eval mode is a pure function of the input)."""
    batch = _as_batch(x)
    logits, _, _, _ = _forward_full(head, batch, mode, dropout_seed)
    return logits[0] if np.asarray(x).ndim == 1 else logits


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def _check_labels(y: np.ndarray) -> None:
    if not np.isin(y, (0, 1)).all():
        raise DomainError("labels must be 0 or 1")


def loss_and_grad(head: HeadParams, batch, mode: str = "train", dropout_seed: int | None = None):
    """Mean loss over the batch plus exact gradients for every parameter.

    out_dim 1 pairs a sigmoid with binary cross-entropy; out_dim 2 pairs a
    softmax with cross-entropy.
    """
    x, y = batch
    x = _as_batch(x)
    y = np.asarray(y)
    if x.shape[0] == 0:
        raise DomainError("batch must be non-empty")
    if x.shape[0] != y.shape[0]:
        raise DomainError("batch inputs and labels differ in length")
    _check_labels(y)
    n = x.shape[0]

    logits, dropped, hidden, mask = _forward_full(head, x, mode, dropout_seed)

    if head.out_dim == 1:
        z = logits[:, 0]
        # log(1 + e^z) - y*z, computed stably.
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        dlogits = ((sigmoid(z) - y) / n)[:, None]
    else:
        log_probs = logits - logits.max(axis=1, keepdims=True)
        log_probs = log_probs - np.log(np.exp(log_probs).sum(axis=1, keepdims=True))
        loss = float(-np.mean(log_probs[np.arange(n), y.astype(int)]))
        one_hot = np.zeros_like(logits)
        one_hot[np.arange(n), y.astype(int)] = 1.0
        dlogits = (np.exp(log_probs) - one_hot) / n

    grad_w2 = dlogits.T @ hidden
    grad_b2 = dlogits.sum(axis=0)
    dhidden = dlogits @ head.w2
    ddropped = dhidden * (dropped > 0.0)
    da1 = ddropped * mask if mask is not None else ddropped
    grad_w1 = da1.T @ x
    grad_b1 = da1.sum(axis=0)

    grads = {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2}
    return loss, grads


def train_head(data, cfg: TrainConfig, out_dim: int, step_callback=None) -> HeadParams:
    """AdamW over seeded shuffled mini-batches; bitwise deterministic per seed.

    ``step_callback(step, batch_loss, head)`` runs after each optimizer step.
    """
    x, y = data
    x = _as_batch(x)
    y = np.asarray(y)
    _check_labels(y)
    n = x.shape[0]
    if n < 2:
        raise DomainError("training needs at least 2 examples")
    if len(np.unique(y)) < 2:
        raise ValidationError("training data must contain both classes")

    head = init_head(cfg.seed, out_dim, input_dim=x.shape[1])
    names = ("w1", "b1", "w2", "b2")
    state = {name: (np.zeros_like(getattr(head, name)), np.zeros_like(getattr(head, name)))
             for name in names}
    scratch = {name: np.empty_like(getattr(head, name)) for name in names}
    rng = np.random.default_rng(cfg.seed)
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            dropout_seed = int(rng.integers(0, 2**31 - 1))
            loss, grads = loss_and_grad(head, (x[idx], y[idx]), mode="train", dropout_seed=dropout_seed)
            step += 1
            # Bias correction folded into the step size:
            # lr * m_hat / (sqrt(v_hat) + eps) == step_size * m / (sqrt(v) + eps_t)
            bc2_sqrt = np.sqrt(1.0 - cfg.beta2**step)
            step_size = cfg.learning_rate * bc2_sqrt / (1.0 - cfg.beta1**step)
            eps_t = cfg.eps * bc2_sqrt
            for name in names:
                grad = grads[name]
                param = getattr(head, name)
                m, v = state[name]
                buffer = scratch[name]
                m *= cfg.beta1
                np.multiply(grad, 1.0 - cfg.beta1, out=buffer)
                m += buffer
                v *= cfg.beta2
                np.multiply(grad, grad, out=buffer)
                buffer *= 1.0 - cfg.beta2
                v += buffer
                np.sqrt(v, out=buffer)
                buffer += eps_t
                np.divide(m, buffer, out=buffer)
                buffer *= step_size
                param *= 1.0 - cfg.learning_rate * cfg.weight_decay
                param -= buffer
            if step_callback is not None:
                step_callback(step, loss, head)
    return head


def binary_prf(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[float, float, float]:
    tp = int(np.sum((y_pred == 1) & (y_true == 1)))
    fp = int(np.sum((y_pred == 1) & (y_true == 0)))
    fn = int(np.sum((y_pred == 0) & (y_true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class FoldResult:
    fold: int
    precision: float
    recall: float
    f1: float


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Round-robin assignment of shuffled per-class indices to folds."""
    rng = np.random.default_rng(seed)
    assignments: list[list[int]] = [[] for _ in range(folds)]
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        for i, example in enumerate(idx):
            assignments[i % folds].append(int(example))
    return [np.array(sorted(fold), dtype=int) for fold in assignments]


def cross_validate(data, cfg: TrainConfig, out_dim: int) -> list[FoldResult]:
    """Stratified k-fold evaluation of the head; k = cfg.folds."""
    x, y = data
    x = _as_batch(x)
    y = np.asarray(y)
    if x.shape[0] < cfg.folds:
        raise DomainError(f"need at least {cfg.folds} examples for {cfg.folds}-fold CV")
    folds = stratified_folds(y, cfg.folds, cfg.seed)
    policy = DecisionPolicy(kind=POLICY_REGRESSION if out_dim == 1 else POLICY_SOFTMAX)
    results = []
    for k, held_out in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(x.shape[0]), held_out)
        fold_cfg = replace(cfg, seed=cfg.seed + k)
        head = train_head((x[train_idx], y[train_idx]), fold_cfg, out_dim)
        predictions = np.array([decide(head, x[i], policy).label for i in held_out])
        precision, recall, f1 = binary_prf(y[held_out], predictions)
        results.append(FoldResult(fold=k, precision=precision, recall=recall, f1=f1))
    return results


def decide(head: HeadParams, x, policy: DecisionPolicy) -> Decision:
    """Map eval-mode logits to a (label, score) decision.

    Regression: score = sigmoid(logit), positive iff score >= threshold.
    Softmax: score = positive-class probability, label = argmax with ties
    resolved positive.
    """
    if policy.out_dim != head.out_dim:
        raise ConfigurationError(
            f"policy {policy.kind!r} expects out_dim {policy.out_dim}, head has {head.out_dim}"
        )
    logits = forward(head, np.asarray(x, dtype=np.float64), mode="eval")
    if policy.kind == POLICY_REGRESSION:
        score = float(sigmoid(np.array([logits[0]]))[0])
        return Decision(label=int(score >= policy.threshold), score=score)
    probs = softmax(logits)
    score = float(probs[1])
    return Decision(label=int(probs[1] >= probs[0]), score=score)


def save_head(head: HeadParams, path, *, seed: int | None = None, config: dict | None = None) -> None:
    payload = {
        "dims": {"input": head.input_dim, "hidden": HIDDEN_DIM},
        "out_dim": head.out_dim,
        "dropout_p": head.dropout_p,
        "W1": head.w1.tolist(),
        "b1": head.b1.tolist(),
        "W2": head.w2.tolist(),
        "b2": head.b2.tolist(),
        "seed": seed,
        "config": config or {},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_head(path) -> HeadParams:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return HeadParams(
        w1=np.asarray(payload["W1"], dtype=np.float64),
        b1=np.asarray(payload["b1"], dtype=np.float64),
        w2=np.asarray(payload["W2"], dtype=np.float64),
        b2=np.asarray(payload["b2"], dtype=np.float64),
        out_dim=int(payload["out_dim"]),
        dropout_p=float(payload.get("dropout_p", 0.5)),
    )
