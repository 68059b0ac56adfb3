"""Supervised classification head over cross-modal embedding vectors.

A 2-hidden-layer MLP maps the concatenated modality vector to two logits
(real, fake); the classification score is the softmax probability of the
fake class. Training minimizes binary cross-entropy with Adam under a
cosine-decayed learning rate and balances classes each epoch by
oversampling the minority class. Everything is plain numpy with analytic
gradients; a fixed seed reproduces the final parameters byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import read_tensor, write_tensor
from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    InvariantError,
    ScoreOutOfRangeError,
    WrongModalityError,
)
from .losses import AUDIO, VISUAL, ModalityEmbedding
from .rng import keyed_rng


def concat_modalities(zv: ModalityEmbedding, za: ModalityEmbedding | None = None) -> np.ndarray:
    """[zv || za] in that fixed order; audio-less mode returns zv alone."""
    if zv.modality != VISUAL:
        raise WrongModalityError(f"first argument must be visual, got {zv.modality}")
    if za is None:
        return zv.vector.copy()
    if za.modality != AUDIO:
        raise WrongModalityError(f"second argument must be audio, got {za.modality}")
    return np.concatenate([zv.vector, za.vector])


@dataclass(frozen=True)
class HeadParams:
    w1: np.ndarray  # (h1, d_in)
    b1: np.ndarray
    w2: np.ndarray  # (h2, h1)
    b2: np.ndarray
    w3: np.ndarray  # (2, h2)
    b3: np.ndarray

    def __post_init__(self):
        for name, arr in self.items():
            if not np.all(np.isfinite(arr)):
                raise InvariantError(f"{name} contains non-finite values")
        if self.w3.shape[0] != 2 or self.b3.shape[0] != 2:
            raise InvariantError("output layer must have width exactly 2 (real, fake)")

    def items(self):
        return (
            ("w1", self.w1), ("b1", self.b1),
            ("w2", self.w2), ("b2", self.b2),
            ("w3", self.w3), ("b3", self.b3),
        )

    @property
    def d_in(self) -> int:
        return self.w1.shape[1]


def init_head(d_in: int, h1: int = 512, h2: int = 128, seed: int = 0) -> HeadParams:
    """He-style uniform init, U[-sqrt(6/fan_in), +sqrt(6/fan_in)], zero biases."""
    rng = keyed_rng(seed, "head-init")

    def layer(fan_out, fan_in):
        limit = math.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=(fan_out, fan_in))

    return HeadParams(
        w1=layer(h1, d_in), b1=np.zeros(h1),
        w2=layer(h2, h1), b2=np.zeros(h2),
        w3=layer(2, h2), b3=np.zeros(2),
    )


def _forward_cached(params: HeadParams, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != params.d_in:
        raise DimensionMismatchError(
            f"input dim {x.shape[1]} does not match head input dim {params.d_in}"
        )
    a1 = x @ params.w1.T + params.b1
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ params.w2.T + params.b2
    h2 = np.maximum(a2, 0.0)
    logits = h2 @ params.w3.T + params.b3
    return logits, (x, a1, h1, a2, h2), squeeze


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward(params: HeadParams, x: np.ndarray):
    """Logits and fake-class score for one vector or a batch.

    score = exp(log_softmax(logits)[fake]); strictly inside (0, 1) for
    finite logits.
    """
    logits, _, squeeze = _forward_cached(params, x)
    scores = np.exp(log_softmax(logits)[..., 1])
    if squeeze:
        return logits[0], float(scores[0])
    return logits, scores


def bce_loss(score: float, label: int) -> tuple[float, float]:
    """Binary cross-entropy on the fake-class probability and d(loss)/d(score)."""
    if label not in (0, 1):
        raise InvariantError(f"label must be 0 or 1, got {label}")
    if not 0.0 < score < 1.0:
        raise ScoreOutOfRangeError(f"score must lie strictly in (0, 1), got {score}")
    loss = -(label * math.log(score) + (1 - label) * math.log(1.0 - score))
    grad = -label / score + (1 - label) / (1.0 - score)
    return loss, grad


def backward(params: HeadParams, x: np.ndarray, y) -> tuple[float, HeadParams]:
    """Summed loss and summed parameter gradients over a batch.

    The loss is cross-entropy computed from log-probabilities directly
    (equal to bce_loss on the fake score, but never saturates). Gradients
    are exact; duplicating an example doubles its contribution.
    """
    logits, (x, a1, h1, a2, h2), squeeze = _forward_cached(params, x)
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    if y.shape[0] != logits.shape[0]:
        raise InvariantError(f"{y.shape[0]} labels for {logits.shape[0]} examples")
    if np.any((y != 0) & (y != 1)):
        raise InvariantError("labels must be 0 or 1")

    logp = log_softmax(logits)
    loss = float(-logp[np.arange(y.shape[0]), y].sum())
    dlogits = np.exp(logp)
    dlogits[np.arange(y.shape[0]), y] -= 1.0

    dw3 = dlogits.T @ h2
    db3 = dlogits.sum(axis=0)
    dh2 = dlogits @ params.w3
    da2 = dh2 * (a2 > 0)
    dw2 = da2.T @ h1
    db2 = da2.sum(axis=0)
    dh1 = da2 @ params.w2
    da1 = dh1 * (a1 > 0)
    dw1 = da1.T @ x
    db1 = da1.sum(axis=0)
    grads = HeadParams(w1=dw1, b1=db1, w2=dw2, b2=db2, w3=dw3, b3=db3)
    return loss, grads


def cosine_lr(step: int, total_steps: int, lr0: float = 1e-5, alpha: float = 0.95) -> float:
    """lr(t) = lr0 * (alpha + (1 - alpha) * (1 + cos(pi t / T)) / 2).

    Decays from lr0 at t=0 to alpha * lr0 at t=T.
    """
    if step < 0:
        raise InvariantError(f"step must be >= 0, got {step}")
    if total_steps <= 0:
        return lr0
    frac = min(step, total_steps) / total_steps
    return lr0 * (alpha + (1.0 - alpha) * (1.0 + math.cos(math.pi * frac)) / 2.0)


@dataclass
class OptimizerState:
    """Adam moments plus the schedule bookkeeping."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]
    total_steps: int
    lr0: float = 1e-5
    alpha: float = 0.95
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: HeadParams, total_steps: int, **kw) -> "OptimizerState":
        shapes = [arr for _, arr in params.items()]
        return cls(
            step=0,
            m=[np.zeros_like(a) for a in shapes],
            v=[np.zeros_like(a) for a in shapes],
            total_steps=total_steps,
            **kw,
        )


def adam_step(params: HeadParams, grads: HeadParams, opt: OptimizerState) -> tuple[HeadParams, float]:
    """One Adam update at the scheduled learning rate; returns the lr used.

    The schedule denominator is total_steps - 1, so the first update runs at
    exactly lr0 and the last at exactly alpha * lr0.
    """
    lr = cosine_lr(opt.step, opt.total_steps - 1, opt.lr0, opt.alpha)
    t = opt.step + 1
    new = {}
    for idx, ((name, p), (_, g)) in enumerate(zip(params.items(), grads.items())):
        opt.m[idx] = opt.beta1 * opt.m[idx] + (1.0 - opt.beta1) * g
        opt.v[idx] = opt.beta2 * opt.v[idx] + (1.0 - opt.beta2) * (g * g)
        m_hat = opt.m[idx] / (1.0 - opt.beta1 ** t)
        v_hat = opt.v[idx] / (1.0 - opt.beta2 ** t)
        new[name] = p - lr * m_hat / (np.sqrt(v_hat) + opt.eps)
    opt.step = t
    return HeadParams(**new), lr


def _balanced_indices(labels: np.ndarray, rng) -> np.ndarray:
    """Indices for one epoch with the minority class oversampled.

    After oversampling, per-epoch class counts are equal (and so differ by
    at most one); single-class datasets pass through unchanged.
    """
    idx0 = np.flatnonzero(labels == 0)
    idx1 = np.flatnonzero(labels == 1)
    if idx0.size == 0 or idx1.size == 0:
        return np.arange(labels.shape[0])
    minority, majority = (idx0, idx1) if idx0.size < idx1.size else (idx1, idx0)
    extra = rng.choice(minority, size=majority.size - minority.size, replace=True)
    return np.concatenate([majority, minority, extra])


@dataclass(frozen=True)
class TrainResult:
    params: HeadParams
    lr_trace: np.ndarray
    epoch_losses: list[float]
    final_loss: float


def train(
    x: np.ndarray,
    labels: np.ndarray,
    epochs: int = 6,
    batch_size: int = 4,
    *,
    lr0: float = 1e-5,
    alpha: float = 0.95,
    h1: int = 512,
    h2: int = 128,
    seed: int = 0,
) -> TrainResult:
    """Train the head on (x, labels) rows with the standard recipe.

    Deterministic per seed: initialization, per-epoch oversampling, and
    shuffling all derive from it. final_loss is the mean cross-entropy over
    the raw (un-oversampled) dataset under the final parameters.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("need a nonempty (N, d) example matrix")
    if labels.shape != (x.shape[0],):
        raise InvariantError(f"labels shape {labels.shape} does not match {x.shape[0]} examples")
    if epochs < 1 or batch_size < 1:
        raise InvariantError("epochs and batch_size must be >= 1")

    params = init_head(x.shape[1], h1=h1, h2=h2, seed=seed)
    rng = keyed_rng(seed, "head-train")
    n0 = int((labels == 0).sum())
    n1 = int((labels == 1).sum())
    epoch_size = labels.shape[0] if min(n0, n1) == 0 else 2 * max(n0, n1)
    steps_per_epoch = -(-epoch_size // batch_size)
    opt = OptimizerState.for_params(params, total_steps=epochs * steps_per_epoch,
                                    lr0=lr0, alpha=alpha)

    lr_trace = []
    epoch_losses = []
    for _ in range(epochs):
        order = rng.permutation(_balanced_indices(labels, rng))
        running = 0.0
        for start in range(0, order.shape[0], batch_size):
            batch = order[start : start + batch_size]
            loss_sum, grads = backward(params, x[batch], labels[batch])
            scale = 1.0 / batch.shape[0]
            mean_grads = HeadParams(**{n: g * scale for n, g in grads.items()})
            params, lr = adam_step(params, mean_grads, opt)
            lr_trace.append(lr)
            running += loss_sum
        epoch_losses.append(running / order.shape[0])

    logits, _, _ = _forward_cached(params, x)
    logp = log_softmax(logits)
    final_loss = float(-logp[np.arange(labels.shape[0]), labels].mean())
    return TrainResult(
        params=params,
        lr_trace=np.asarray(lr_trace),
        epoch_losses=epoch_losses,
        final_loss=final_loss,
    )


def save_head(params: HeadParams, out_dir: str | Path) -> None:
    """Serialize as a TensorFile bundle plus a JSON index."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = {"format": "head-bundle-v1", "tensors": {}}
    for name, arr in params.items():
        fname = f"{name}.ft"
        write_tensor(out / fname, arr.astype(np.float32))
        index["tensors"][name] = fname
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")


def load_head(bundle_dir: str | Path) -> HeadParams:
    out = Path(bundle_dir)
    index = json.loads((out / "index.json").read_text())
    if index.get("format") != "head-bundle-v1":
        raise InvariantError(f"not a head bundle: {out}")
    tensors = {
        name: read_tensor(out / fname).astype(np.float64)
        for name, fname in index["tensors"].items()
    }
    return HeadParams(**tensors)
