"""Train-time visual augmentation of clips.

One parameter draw per clip: all 32 frames receive the identical flip, hue
shift, brightness shift, and scale jitter, which keeps the clip temporally
coherent. Audio is never touched. The final step clamps RGB back to [0, 1].

The identity configuration (no flip, zero deltas, unit scale) is a bit-exact
no-op: resampling paths are skipped entirely when their drawn parameter is
exactly neutral.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvariantError
from .rng import keyed_rng
from .sampling import Clip


@dataclass(frozen=True)
class AugmentConfig:
    p_flip: float = 0.5
    hue_max_delta: float = 1.0 / 5.0
    brightness_max_delta: float = 32.0 / 255.0
    scale_range: tuple[float, float] = (1.0, 1.25)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_flip <= 1.0:
            raise InvariantError("p_flip must lie in [0, 1]")
        if self.hue_max_delta < 0 or self.brightness_max_delta < 0:
            raise InvariantError("augmentation deltas must be >= 0")
        lo, hi = self.scale_range
        if not 1.0 <= lo <= hi:
            raise InvariantError(f"scale_range must satisfy 1 <= lo <= hi, got ({lo}, {hi})")

    @classmethod
    def identity(cls) -> "AugmentConfig":
        return cls(p_flip=0.0, hue_max_delta=0.0, brightness_max_delta=0.0,
                   scale_range=(1.0, 1.0))


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV, hue and all channels in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    chroma = maxc - minc
    safe_chroma = np.where(chroma == 0, 1.0, chroma)
    s = np.where(maxc == 0, 0.0, chroma / np.where(maxc == 0, 1.0, maxc))

    h = np.zeros_like(maxc)
    is_r = (maxc == r) & (chroma > 0)
    is_g = (maxc == g) & (chroma > 0) & ~is_r
    is_b = (chroma > 0) & ~is_r & ~is_g
    h = np.where(is_r, ((g - b) / safe_chroma) % 6.0, h)
    h = np.where(is_g, (b - r) / safe_chroma + 2.0, h)
    h = np.where(is_b, (r - g) / safe_chroma + 4.0, h)
    return np.stack([h / 6.0, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB, inverse of rgb_to_hsv."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def shift_hue(frames: np.ndarray, delta: float) -> np.ndarray:
    """Rotate hue by delta (normalized, wraps around 1)."""
    hsv = rgb_to_hsv(frames)
    hsv[..., 0] = (hsv[..., 0] + delta) % 1.0
    return hsv_to_rgb(hsv).astype(np.float32)


def scale_jitter(frames: np.ndarray, scale: float) -> np.ndarray:
    """Upscale by `scale` bilinearly, then center-crop to the input size.

    Endpoint-aligned sampling: the scaled image's corner pixels coincide
    with the input's corners, so no sample falls outside the input.
    """
    if scale < 1.0:
        raise InvariantError(f"scale jitter is crop-only, needs scale >= 1, got {scale}")
    n, h, w, _ = frames.shape
    sh, sw = int(round(h * scale)), int(round(w * scale))
    if (sh, sw) == (h, w):
        return frames
    ys = (np.arange(sh, dtype=np.float64) * (h - 1) / max(sh - 1, 1))[(sh - h) // 2 : (sh - h) // 2 + h]
    xs = (np.arange(sw, dtype=np.float64) * (w - 1) / max(sw - 1, 1))[(sw - w) // 2 : (sw - w) // 2 + w]
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0).astype(np.float32)[:, None, None]
    fx = (xs - x0).astype(np.float32)[None, :, None]

    tl = frames[:, y0[:, None], x0[None, :], :]
    tr = frames[:, y0[:, None], x1[None, :], :]
    bl = frames[:, y1[:, None], x0[None, :], :]
    br = frames[:, y1[:, None], x1[None, :], :]
    top = tl + (tr - tl) * fx
    bottom = bl + (br - bl) * fx
    return top + (bottom - top) * fy


def augment_clip(clip: Clip, cfg: AugmentConfig, rng=None) -> Clip:
    """Apply one random draw of flip/hue/brightness/scale to a whole clip.

    `rng` is a numpy Generator; when omitted, one is derived from cfg.seed
    and the clip's identity so each clip augments reproducibly. Parameters
    are drawn in a fixed order regardless of configuration, and transforms
    whose drawn parameter is exactly neutral are skipped, making the
    identity config a bit-exact no-op. Audio passes through untouched.
    """
    if rng is None:
        rng = keyed_rng(cfg.seed, f"{clip.video_id}/t{clip.track_id}", clip.clip_index)
    u_flip = rng.uniform()
    delta_h = rng.uniform(-cfg.hue_max_delta, cfg.hue_max_delta)
    delta_b = rng.uniform(-cfg.brightness_max_delta, cfg.brightness_max_delta)
    scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1])

    frames = clip.frames
    if u_flip < cfg.p_flip:
        frames = frames[:, :, ::-1, :]
    if delta_h != 0.0:
        frames = shift_hue(frames, float(delta_h))
    if delta_b != 0.0:
        frames = frames + np.float32(delta_b)
    if scale != 1.0:
        frames = scale_jitter(frames, float(scale))
    frames = np.clip(frames, 0.0, 1.0)
    return replace(clip, frames=frames)
