"""Clip extraction against a fixed time base.

Videos are standardized to a declared time base (29 FPS, 44.1 kHz audio by
default). Training samples clip starts uniformly at random; inference places
clips on a uniform grid that is non-overlapping whenever the track is long
enough. Audio windows are computed with exact integer arithmetic so the
window length never drifts across clips.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvariantError, TrackTooShortError
from .rng import keyed_rng

CLIP_LEN = 32


@dataclass(frozen=True)
class TimeBase:
    fps: Fraction = Fraction(29, 1)
    sample_rate: int = 44100

    def __post_init__(self):
        if self.fps <= 0:
            raise InvariantError(f"fps must be > 0, got {self.fps}")
        if self.sample_rate <= 0:
            raise InvariantError(f"sample_rate must be > 0, got {self.sample_rate}")


@dataclass(frozen=True)
class Clip:
    """32 consecutive aligned frames plus the matching audio window."""

    video_id: str
    track_id: int
    start_frame: int
    frames: np.ndarray  # (32, H, W, 3) f32 in [0, 1]; H = W = 224 in the pipeline
    audio: np.ndarray | None = None  # (L,) f32 when present
    clip_index: int = 0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 4 or frames.shape[0] != CLIP_LEN or frames.shape[3] != 3:
            raise InvariantError(
                f"clip frames must be ({CLIP_LEN}, H, W, 3), got {frames.shape}"
            )
        if frames.size and (frames.min() < 0.0 or frames.max() > 1.0):
            raise InvariantError("clip frame values must lie in [0, 1]")
        object.__setattr__(self, "frames", frames)
        if self.audio is not None:
            audio = np.asarray(self.audio, dtype=np.float32)
            if audio.ndim != 1:
                raise InvariantError(f"clip audio must be 1-D, got shape {audio.shape}")
            object.__setattr__(self, "audio", audio)


def audio_window_len(tb: TimeBase) -> int:
    """Samples per clip: floor(32 * sample_rate / fps), exact arithmetic."""
    return int(CLIP_LEN * tb.sample_rate * tb.fps.denominator // tb.fps.numerator)


def audio_window(start_frame: int, tb: TimeBase) -> tuple[int, int]:
    """Map a clip's start frame to its (start_sample, length) audio window."""
    if start_frame < 0:
        raise InvariantError(f"start_frame must be >= 0, got {start_frame}")
    start = int(start_frame * tb.sample_rate * tb.fps.denominator // tb.fps.numerator)
    return start, audio_window_len(tb)


def sample_train_clips(track_len: int, clips: int, rng) -> list[int]:
    """Draw clip starts uniformly from [0, track_len - 32].

    `rng` is a numpy Generator or an integer seed; fixed seeds reproduce.
    """
    if track_len < CLIP_LEN:
        raise TrackTooShortError(f"track has {track_len} frames, need >= {CLIP_LEN}")
    if clips < 0:
        raise InvariantError(f"clip count must be >= 0, got {clips}")
    gen = rng if isinstance(rng, np.random.Generator) else keyed_rng(int(rng))
    starts = gen.integers(0, track_len - CLIP_LEN + 1, size=int(clips))
    return [int(s) for s in starts]


def place_inference_clips(track_len: int, n_clips: int) -> list[int]:
    """Uniformly spaced clip starts for inference.

    Tracks shorter than one clip get a single start at 0 (the cutter pads by
    repeating the last frame). Otherwise start_i = round(i*(L-32)/(n-1)),
    which is pairwise >= 32 apart whenever track_len >= 32*n; shorter tracks
    overlap. Rounding is half-up in exact integer arithmetic so placement is
    platform independent.
    """
    if n_clips < 1:
        raise InvariantError(f"n_clips must be >= 1, got {n_clips}")
    if track_len < CLIP_LEN:
        return [0]
    span = track_len - CLIP_LEN
    if n_clips == 1:
        return [span // 2]
    denom = n_clips - 1
    return [(2 * i * span + denom) // (2 * denom) for i in range(n_clips)]


def pad_frames(frames: np.ndarray) -> np.ndarray:
    """Extend a short track to 32 frames by repeating the last frame."""
    frames = np.asarray(frames, dtype=np.float32)
    if frames.shape[0] == 0:
        raise InvariantError("cannot pad an empty track")
    if frames.shape[0] >= CLIP_LEN:
        return frames
    tail = np.repeat(frames[-1:], CLIP_LEN - frames.shape[0], axis=0)
    return np.concatenate([frames, tail], axis=0)


def cut_clip(
    frames: np.ndarray,
    audio: np.ndarray | None,
    start_frame: int,
    tb: TimeBase,
    *,
    video_id: str = "",
    track_id: int = 0,
    clip_index: int = 0,
) -> Clip:
    """Cut one clip from a track's frame buffer and audio stream.

    Tracks shorter than 32 frames are padded by repeating the last frame
    (start_frame must be 0 in that case). Audio shorter than the window is
    zero-padded at the tail; audio-less tracks yield Clip.audio = None.
    """
    frames = np.asarray(frames, dtype=np.float32)
    track_len = frames.shape[0]
    if track_len < CLIP_LEN:
        if start_frame != 0:
            raise InvariantError(
                f"short track ({track_len} frames) only supports start_frame 0"
            )
        window = pad_frames(frames)
    else:
        if start_frame < 0 or start_frame + CLIP_LEN > track_len:
            raise InvariantError(
                f"clip [{start_frame}, {start_frame + CLIP_LEN}) outside track of {track_len} frames"
            )
        window = frames[start_frame : start_frame + CLIP_LEN].copy()

    audio_win = None
    if audio is not None:
        audio = np.asarray(audio, dtype=np.float32)
        if audio.ndim != 1:
            raise InvariantError(f"audio stream must be 1-D, got shape {audio.shape}")
        start_sample, length = audio_window(start_frame, tb)
        audio_win = np.zeros(length, dtype=np.float32)
        avail = audio[start_sample : start_sample + length]
        audio_win[: avail.shape[0]] = avail

    return Clip(
        video_id=video_id,
        track_id=track_id,
        start_frame=int(start_frame),
        frames=window,
        audio=audio_win,
        clip_index=int(clip_index),
    )
