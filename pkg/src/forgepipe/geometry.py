"""Bounding-box algebra, similarity-transform estimation, and frame warping.

Conventions: image buffers are HxWx3 float32 arrays indexed [row, col];
points are (x, y) with x along columns. Landmark sets are (5, 2) arrays in
the fixed order [left-eye-outer, left-eye-inner, nose, right-eye-inner,
right-eye-outer].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    EmptyFrameError,
    InvariantError,
    NonPositiveFactorError,
)

ALIGNED_SIZE = 224

# Five-point face template in the 224x224 output space. The alignment target
# is a config value, not ground truth; override via load_reference_landmarks.
DEFAULT_REFERENCE_LANDMARKS = np.array(
    [
        [70.7, 85.0],
        [98.0, 85.0],
        [112.0, 120.0],
        [126.0, 85.0],
        [153.3, 85.0],
    ],
    dtype=np.float64,
)


def as_landmarks(points) -> np.ndarray:
    """Validate and return a (5, 2) float64 landmark array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.shape != (5, 2):
        raise InvariantError(f"landmark set must have shape (5, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvariantError("landmark coordinates must be finite")
    return arr


def load_reference_landmarks(path: str | Path) -> np.ndarray:
    """Read reference landmarks from a JSON file.

    Accepts either a bare [[x, y] x5] list or an object with a
    "reference_landmarks" key holding one.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["reference_landmarks"]
    return as_landmarks(data)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with top-left origin; w and h must be >= 0."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise InvariantError(f"negative box extent: w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; 0 for disjoint or zero-area boxes."""
    ix = max(a.x, b.x)
    iy = max(a.y, b.y)
    ix2 = min(a.x + a.w, b.x + b.w)
    iy2 = min(a.y + a.h, b.y + b.h)
    inter = max(0.0, ix2 - ix) * max(0.0, iy2 - iy)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def enlarge(b: BoundingBox, factor: float) -> BoundingBox:
    """Scale width and height by `factor` about the box center (no clamping)."""
    if factor <= 0:
        raise NonPositiveFactorError(f"enlarge factor must be > 0, got {factor}")
    cx, cy = b.center
    w = b.w * factor
    h = b.h * factor
    return BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)


def landmark_bbox(landmarks: np.ndarray) -> BoundingBox:
    """Axis-aligned bounding rectangle of a landmark set."""
    pts = as_landmarks(landmarks)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return BoundingBox(lo[0], lo[1], hi[0] - lo[0], hi[1] - lo[1])


@dataclass(frozen=True)
class SimilarityTransform:
    """Scale + rotation + translation; maps p to scale*R(rotation)@p + translation."""

    scale: float
    rotation: float
    translation: tuple[float, float]

    def __post_init__(self):
        if self.scale <= 0:
            raise InvariantError(f"scale must be > 0, got {self.scale}")

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(1.0, 0.0, (0.0, 0.0))

    def matrix(self) -> np.ndarray:
        """2x3 matrix [s*cos, -s*sin, tx; s*sin, s*cos, ty]."""
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        tx, ty = self.translation
        return np.array([[c, -s, tx], [s, c, ty]], dtype=np.float64)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (N, 2) point array."""
        pts = np.asarray(points, dtype=np.float64)
        m = self.matrix()
        return pts @ m[:, :2].T + m[:, 2]

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        c = math.cos(-self.rotation) * inv_scale
        s = math.sin(-self.rotation) * inv_scale
        tx, ty = self.translation
        return SimilarityTransform(
            inv_scale, -self.rotation, (-(c * tx - s * ty), -(s * tx + c * ty))
        )


def estimate_similarity(
    src: np.ndarray, dst: np.ndarray
) -> tuple[SimilarityTransform, float]:
    """Least-squares similarity (no reflection) mapping src points onto dst.

    Umeyama-style closed form: minimizes sum ||T(src_i) - dst_i||^2 over
    scale > 0, rotation, translation. Returns (transform, rms_residual).

    Raises DegenerateConfigurationError when the src points are all
    coincident (rank-0 covariance) or the optimum would need scale <= 0.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2 or src.shape[0] < 2:
        raise InvariantError(f"point sets must share shape (N>=2, 2): {src.shape} vs {dst.shape}")
    if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
        raise InvariantError("point coordinates must be finite")

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    xs = src - mu_src
    ys = dst - mu_dst
    n = src.shape[0]

    var_src = float(np.sum(xs * xs)) / n
    if var_src <= 1e-12:
        raise DegenerateConfigurationError("source points are (nearly) coincident")

    cov = ys.T @ xs / n
    u, d, vt = np.linalg.svd(cov)
    sign = np.ones(2)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        sign[-1] = -1.0
    rot = u @ np.diag(sign) @ vt

    scale = float(np.sum(d * sign)) / var_src
    if scale <= 0:
        raise DegenerateConfigurationError("destination points collapse the similarity scale")

    theta = math.atan2(rot[1, 0], rot[0, 0])
    t = mu_dst - scale * (rot @ mu_src)
    transform = SimilarityTransform(scale, theta, (float(t[0]), float(t[1])))

    residuals = transform.apply(src) - dst
    rms = float(np.sqrt(np.mean(np.sum(residuals * residuals, axis=1))))
    return transform, rms


def warp_frame(
    frame: np.ndarray,
    transform: SimilarityTransform,
    out_size: tuple[int, int] = (ALIGNED_SIZE, ALIGNED_SIZE),
) -> np.ndarray:
    """Resample `frame` under `transform` into an out_size[0] x out_size[1] buffer.

    `transform` maps source coordinates to output coordinates; each output
    pixel is bilinearly sampled at the inverse-mapped source location, with
    out-of-bounds contributions set to 0 (black). Pixel centers sit on
    integer coordinates, so the identity transform reproduces the input
    bit-exactly when sizes match.
    """
    frame = np.asarray(frame, dtype=np.float32)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.shape[0] == 0 or frame.shape[1] == 0:
        raise EmptyFrameError(f"expected non-empty HxWx3 frame, got shape {frame.shape}")

    out_h, out_w = out_size
    h, w = frame.shape[:2]
    inv = transform.inverse().matrix()

    xo, yo = np.meshgrid(np.arange(out_w, dtype=np.float64),
                         np.arange(out_h, dtype=np.float64))
    xs = inv[0, 0] * xo + inv[0, 1] * yo + inv[0, 2]
    ys = inv[1, 0] * xo + inv[1, 1] * yo + inv[1, 2]

    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = (xs - x0).astype(np.float32)
    fy = (ys - y0).astype(np.float32)

    out = np.zeros((out_h, out_w, 3), dtype=np.float32)
    # Accumulate the four bilinear taps; zero weight for out-of-bounds taps.
    for dy in (0, 1):
        for dx in (0, 1):
            wx = fx if dx else 1.0 - fx
            wy = fy if dy else 1.0 - fy
            weight = wx * wy
            xi = x0 + dx
            yi = y0 + dy
            valid = (weight > 0) & (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            if not np.any(valid):
                continue
            out[valid] += weight[valid, None] * frame[yi[valid], xi[valid]]
    return out
