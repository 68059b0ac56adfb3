"""Contrastive objectives over projected embeddings.

Covers shared-space projection, the exponential similarity scores, the
video-audio NCE loss, the video-text multiple-instance NCE loss (numerator
summed over a positive candidate set), their weighted combination, and
analytic gradients with respect to every projected vector.

All losses are computed in log space (log-sum-exp), so small temperatures
cannot overflow. Both loss families funnel through the same helpers in the
same term order; with a single-element positive set the MIL form therefore
reproduces the plain NCE value bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyPositiveSetError,
    InvariantError,
    SpaceMismatchError,
    WrongModalityError,
)

VISUAL = "visual"
AUDIO = "audio"
TEXT = "text"
MODALITIES = (VISUAL, AUDIO, TEXT)

SPACE_VA = "va"
SPACE_VAT = "vat"


def _finite_1d(vec, name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1:
        raise InvariantError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ModalityEmbedding:
    modality: str
    vector: np.ndarray

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise WrongModalityError(f"unknown modality {self.modality!r}")
        object.__setattr__(self, "vector", _finite_1d(self.vector, "embedding"))

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class SharedSpaceVector:
    space: str
    vector: np.ndarray
    normalized: bool

    def __post_init__(self):
        if self.space not in (SPACE_VA, SPACE_VAT):
            raise InvariantError(f"unknown shared space {self.space!r}")
        vec = _finite_1d(self.vector, "shared-space vector")
        object.__setattr__(self, "vector", vec)
        if self.normalized and abs(np.linalg.norm(vec) - 1.0) > 1e-5:
            raise InvariantError("normalized vector must have unit L2 norm")


@dataclass(frozen=True)
class ProjectionHead:
    weight: np.ndarray  # (d_s, d_m)
    bias: np.ndarray  # (d_s,)
    space: str = SPACE_VA
    l2_normalize_output: bool = True

    def __post_init__(self):
        weight = np.asarray(self.weight, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if weight.ndim != 2 or bias.ndim != 1 or weight.shape[0] != bias.shape[0]:
            raise InvariantError(
                f"weight (d_s, d_m) and bias (d_s,) required, got {weight.shape}, {bias.shape}"
            )
        if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
            raise InvariantError("projection parameters must be finite")
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)


def project(head: ProjectionHead, z: ModalityEmbedding) -> SharedSpaceVector:
    """y = W z + b, optionally L2-normalized."""
    if z.dim != head.weight.shape[1]:
        raise DimensionMismatchError(
            f"embedding dim {z.dim} does not match head input dim {head.weight.shape[1]}"
        )
    y = head.weight @ z.vector + head.bias
    if head.l2_normalize_output:
        norm = np.linalg.norm(y)
        if norm == 0.0:
            raise InvariantError("cannot normalize a zero projection output")
        y = y / norm
    return SharedSpaceVector(space=head.space, vector=y, normalized=head.l2_normalize_output)


def va_score(zv: SharedSpaceVector, za: SharedSpaceVector, tau: float = 0.07) -> float:
    """exp(zv . za / tau). Overflows for large dots at tiny tau by design;
    the loss functions below work in log space instead."""
    if zv.space != za.space:
        raise SpaceMismatchError(f"spaces differ: {zv.space} vs {za.space}")
    if zv.vector.shape != za.vector.shape:
        raise DimensionMismatchError(
            f"vector dims differ: {zv.vector.shape} vs {za.vector.shape}"
        )
    if tau <= 0:
        raise InvariantError(f"temperature must be > 0, got {tau}")
    return math.exp(float(np.dot(zv.vector, za.vector)) / tau)


def vt_score(zv: SharedSpaceVector, zt: SharedSpaceVector, tau: float = 0.07) -> float:
    """exp(zv . zt / tau), the video-text analog of va_score."""
    return va_score(zv, zt, tau)


@dataclass(frozen=True)
class ContrastiveBatch:
    """K anchors of projected vectors plus loss hyperparameters.

    zt, when present, holds one (P_i, d) array of positive text candidates
    per anchor. With symmetric_negatives (the default), anchor i's negative
    pairs are {(v_i, ._j): j != i} followed by {(v_j, ._i): j != i}, giving
    the batch K^2 - K negative pairs per modality pair; one-sided mode keeps
    only the first set. normalize controls L2 normalization of every vector
    before the dot products (gradients flow through it).
    """

    zv: np.ndarray  # (K, d)
    za: np.ndarray  # (K, d)
    zt: tuple[np.ndarray, ...] | None = None
    tau: float = 0.07
    lambda_va: float = 1.0
    lambda_vt: float = 1.0
    normalize: bool = True
    symmetric_negatives: bool = True

    def __post_init__(self):
        zv = np.asarray(self.zv, dtype=np.float64)
        za = np.asarray(self.za, dtype=np.float64)
        if zv.ndim != 2 or zv.shape[0] < 1:
            raise InvariantError(f"zv must be (K, d) with K >= 1, got {zv.shape}")
        if za.shape != zv.shape:
            raise DimensionMismatchError(f"za shape {za.shape} != zv shape {zv.shape}")
        if not (np.all(np.isfinite(zv)) and np.all(np.isfinite(za))):
            raise InvariantError("batch vectors must be finite")
        object.__setattr__(self, "zv", zv)
        object.__setattr__(self, "za", za)
        if self.zt is not None:
            if len(self.zt) != zv.shape[0]:
                raise InvariantError(
                    f"need one positive set per anchor: {len(self.zt)} sets for K={zv.shape[0]}"
                )
            sets = []
            for i, t in enumerate(self.zt):
                t = np.asarray(t, dtype=np.float64)
                if t.ndim != 2 or t.shape[0] < 1:
                    raise EmptyPositiveSetError(f"positive set {i} is empty or not 2-D")
                if t.shape[1] != zv.shape[1]:
                    raise DimensionMismatchError(
                        f"text dim {t.shape[1]} != shared dim {zv.shape[1]}"
                    )
                if not np.all(np.isfinite(t)):
                    raise InvariantError(f"positive set {i} must be finite")
                sets.append(t)
            object.__setattr__(self, "zt", tuple(sets))
        if self.tau <= 0:
            raise InvariantError(f"temperature must be > 0, got {self.tau}")
        if self.lambda_va < 0 or self.lambda_vt < 0:
            raise InvariantError("loss weights must be >= 0")
        if self.normalize:
            for name, arr in (("zv", zv), ("za", za)):
                if np.any(np.linalg.norm(arr, axis=1) == 0.0):
                    raise InvariantError(f"{name} contains a zero vector; cannot normalize")
            if self.zt is not None:
                for i, t in enumerate(self.zt):
                    if np.any(np.linalg.norm(t, axis=1) == 0.0):
                        raise InvariantError(f"positive set {i} contains a zero vector")

    @property
    def k(self) -> int:
        return self.zv.shape[0]


def _unit_rows(arr: np.ndarray) -> np.ndarray:
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def _dots(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Per-row dot products via one canonical elementwise reduction.

    Each row is reduced independently of the others, so a row's dot product
    is bit-identical whether it is computed inside a (1, d) or an (n, d)
    call. The loss equivalence guarantees rest on this.
    """
    return np.multiply(rows, vec).sum(axis=1)


def _logsumexp(values: np.ndarray) -> float:
    m = float(np.max(values))
    return m + math.log(float(np.sum(np.exp(values - m))))


def _ratio_loss(pos_logits: np.ndarray, neg_logits: np.ndarray) -> float:
    """-log( sum exp(pos) / (sum exp(pos) + sum exp(neg)) ) in log space."""
    if neg_logits.size == 0:
        return _logsumexp(pos_logits) - _logsumexp(pos_logits)
    all_logits = np.concatenate([pos_logits, neg_logits])
    return _logsumexp(all_logits) - _logsumexp(pos_logits)


def _normalized_views(batch: ContrastiveBatch):
    if batch.normalize:
        zv = _unit_rows(batch.zv)
        za = _unit_rows(batch.za)
        zt = None if batch.zt is None else tuple(_unit_rows(t) for t in batch.zt)
    else:
        zv, za, zt = batch.zv, batch.za, batch.zt
    return zv, za, zt


def _va_logits(batch: ContrastiveBatch, anchor: int, zv: np.ndarray, za: np.ndarray):
    """(pos_logits, neg_logits, neg_pairs) for the VA loss at one anchor.

    neg_pairs lists (v_index, a_index) aligned with neg_logits so the
    gradient pass can attribute each term.
    """
    k = batch.k
    i = anchor
    pos = _dots(za[i : i + 1], zv[i]) / batch.tau
    others = [j for j in range(k) if j != i]
    row = _dots(za, zv[i]) / batch.tau  # (v_i, a_j) for all j
    neg_logits = [row[j] for j in others]
    neg_pairs = [(i, j) for j in others]
    if batch.symmetric_negatives:
        col = _dots(zv, za[i]) / batch.tau  # (v_j, a_i) for all j
        neg_logits += [col[j] for j in others]
        neg_pairs += [(j, i) for j in others]
    return pos, np.asarray(neg_logits, dtype=np.float64), neg_pairs


def _vt_logits(batch: ContrastiveBatch, anchor: int, zv: np.ndarray, zt):
    """(pos_logits, neg_logits, neg_pairs) for the VT loss at one anchor.

    neg_pairs lists (v_index, t_set_index, t_row_index) per negative term.
    """
    k = batch.k
    i = anchor
    pos = _dots(zt[i], zv[i]) / batch.tau
    neg_logits: list[float] = []
    neg_pairs: list[tuple[int, int, int]] = []
    for j in range(k):
        if j == i:
            continue
        vals = _dots(zt[j], zv[i]) / batch.tau  # (v_i, t in P_j)
        neg_logits.extend(vals.tolist())
        neg_pairs.extend((i, j, r) for r in range(zt[j].shape[0]))
    if batch.symmetric_negatives:
        for j in range(k):
            if j == i:
                continue
            vals = _dots(zt[i], zv[j]) / batch.tau  # (v_j, t in P_i)
            neg_logits.extend(vals.tolist())
            neg_pairs.extend((j, i, r) for r in range(zt[i].shape[0]))
    return pos, np.asarray(neg_logits, dtype=np.float64), neg_pairs


def nce_va(batch: ContrastiveBatch, anchor: int) -> float:
    """Anchor-level video-audio NCE: -log(VA_pos / (VA_pos + sum VA_neg))."""
    if not 0 <= anchor < batch.k:
        raise InvariantError(f"anchor {anchor} outside batch of {batch.k}")
    zv, za, _ = _normalized_views(batch)
    pos, negs, _ = _va_logits(batch, anchor, zv, za)
    return _ratio_loss(pos, negs)


def milnce_vt(batch: ContrastiveBatch, anchor: int) -> float:
    """Anchor-level video-text MIL-NCE; the numerator sums the whole
    positive candidate set. Reduces exactly to nce form when |P| = 1."""
    if not 0 <= anchor < batch.k:
        raise InvariantError(f"anchor {anchor} outside batch of {batch.k}")
    if batch.zt is None:
        raise EmptyPositiveSetError("batch carries no text candidates")
    zv, _, zt = _normalized_views(batch)
    pos, negs, _ = _vt_logits(batch, anchor, zv, zt)
    return _ratio_loss(pos, negs)


def _softmax_coefficients(pos: np.ndarray, negs: np.ndarray):
    """d(ratio_loss)/d(logit) for the pos block and the neg block.

    With a = softmax over all terms and b = softmax over the positive
    block, the derivative is a - b on positives and a on negatives.
    """
    all_logits = np.concatenate([pos, negs])
    shifted = all_logits - np.max(all_logits)
    expd = np.exp(shifted)
    a = expd / expd.sum()
    b = np.exp(pos - np.max(pos))
    b = b / b.sum()
    return a[: pos.size] - b, a[pos.size :]


@dataclass(frozen=True)
class CombinedLossResult:
    loss: float
    grad_zv: np.ndarray
    grad_za: np.ndarray
    grad_zt: tuple[np.ndarray, ...] | None


def combined_loss(batch: ContrastiveBatch) -> CombinedLossResult:
    """Mean over anchors of lambda_va * NCE_va + lambda_vt * MILNCE_vt,
    with analytic gradients w.r.t. every input vector.

    The gradient of each softmax-ratio term is accumulated on the
    (optionally normalized) vectors, then pulled back through the
    normalization Jacobian (I - u u^T)/||z||.
    """
    k = batch.k
    zv, za, zt = _normalized_views(batch)
    g_zv = np.zeros_like(batch.zv)
    g_za = np.zeros_like(batch.za)
    g_zt = None if zt is None else [np.zeros_like(t) for t in zt]

    total = 0.0
    inv_tau = 1.0 / batch.tau
    for i in range(k):
        if batch.lambda_va > 0:
            w = batch.lambda_va / k
            pos, negs, pairs = _va_logits(batch, i, zv, za)
            total += w * _ratio_loss(pos, negs)
            c_pos, c_neg = _softmax_coefficients(pos, negs)
            g_zv[i] += w * c_pos[0] * inv_tau * za[i]
            g_za[i] += w * c_pos[0] * inv_tau * zv[i]
            for c, (vi, ai) in zip(c_neg, pairs):
                g_zv[vi] += w * c * inv_tau * za[ai]
                g_za[ai] += w * c * inv_tau * zv[vi]
        if batch.zt is not None and batch.lambda_vt > 0:
            w = batch.lambda_vt / k
            pos, negs, pairs = _vt_logits(batch, i, zv, zt)
            total += w * _ratio_loss(pos, negs)
            c_pos, c_neg = _softmax_coefficients(pos, negs)
            for r, c in enumerate(c_pos):
                g_zv[i] += w * c * inv_tau * zt[i][r]
                g_zt[i][r] += w * c * inv_tau * zv[i]
            for c, (vi, tj, tr) in zip(c_neg, pairs):
                g_zv[vi] += w * c * inv_tau * zt[tj][tr]
                g_zt[tj][tr] += w * c * inv_tau * zv[vi]

    if batch.normalize:
        g_zv = _through_normalization(batch.zv, zv, g_zv)
        g_za = _through_normalization(batch.za, za, g_za)
        if g_zt is not None:
            g_zt = [
                _through_normalization(raw, unit, g)
                for raw, unit, g in zip(batch.zt, zt, g_zt)
            ]
    return CombinedLossResult(
        loss=float(total),
        grad_zv=g_zv,
        grad_za=g_za,
        grad_zt=None if g_zt is None else tuple(g_zt),
    )


def _through_normalization(raw: np.ndarray, unit: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Pull gradients w.r.t. u = z/||z|| back to z: (g - (g.u)u)/||z||."""
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    radial = np.sum(grad * unit, axis=1, keepdims=True)
    return (grad - radial * unit) / norms
