"""Synthetic scenes and embeddings with exact ground truth.

Scenes drive the tracking tests: persons move on affine paths, so every
detection, every interpolated gap, and the correct track assignment are
known in closed form. Embedding datasets stand in for backbone outputs:
two Gaussian classes at a configurable mean separation, which makes the
downstream classifier's attainable quality predictable.

Everything here is a pure function of its spec. Randomness comes from a
counter-based generator keyed by (seed, entity, index), so artifacts can be
regenerated piecemeal and identically on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import FaceObservation, FrameDetections
from .errors import InvariantError
from .geometry import BoundingBox
from .rng import keyed_rng

# 5-point face layout relative to the unit bounding box, mirroring the
# reference mean face used for alignment.
REL_LANDMARKS = np.array(
    [
        [0.3156, 0.3795],
        [0.4375, 0.3795],
        [0.5000, 0.5357],
        [0.5625, 0.3795],
        [0.6845, 0.3795],
    ],
    dtype=np.float64,
)

DISTRACTOR = -1


@dataclass(frozen=True)
class PersonSpec:
    """One face moving on an affine path: bbox(t) = start + t * delta."""

    start_bbox: BoundingBox
    delta: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    base_landmarks: np.ndarray = field(default_factory=lambda: REL_LANDMARKS.copy())
    dropout_frames: frozenset[int] = frozenset()
    confidence: float = 0.99

    def __post_init__(self):
        if not isinstance(self.start_bbox, BoundingBox):
            object.__setattr__(self, "start_bbox", BoundingBox(*self.start_bbox))
        object.__setattr__(self, "dropout_frames", frozenset(self.dropout_frames))
        lm = np.asarray(self.base_landmarks, dtype=np.float64)
        if lm.shape != (5, 2) or not np.all(np.isfinite(lm)):
            raise InvariantError("base_landmarks must be a finite (5, 2) array")
        object.__setattr__(self, "base_landmarks", lm)
        if not 0.0 <= self.confidence <= 1.0:
            raise InvariantError(f"confidence {self.confidence} outside [0, 1]")

    def bbox_at(self, t: int) -> BoundingBox:
        dx, dy, dw, dh = self.delta
        b = self.start_bbox
        return BoundingBox(b.x + t * dx, b.y + t * dy, b.w + t * dw, b.h + t * dh)

    def landmarks_at(self, t: int) -> np.ndarray:
        b = self.bbox_at(t)
        out = np.empty((5, 2), dtype=np.float64)
        out[:, 0] = b.x + self.base_landmarks[:, 0] * b.w
        out[:, 1] = b.y + self.base_landmarks[:, 1] * b.h
        return out


@dataclass(frozen=True)
class SceneSpec:
    num_frames: int
    frame_size: tuple[int, int]  # (W, H)
    persons: tuple[PersonSpec, ...]
    distractors: tuple[PersonSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "persons", tuple(self.persons))
        object.__setattr__(self, "distractors", tuple(self.distractors))
        if self.num_frames < 1:
            raise InvariantError("num_frames must be >= 1")
        for spec in self.persons + self.distractors:
            if any(f < 0 or f >= self.num_frames for f in spec.dropout_frames):
                raise InvariantError("dropout_frames must lie within [0, num_frames)")
            for t in (0, self.num_frames - 1):
                b = spec.bbox_at(t)
                if not all(np.isfinite(v) for v in (b.x, b.y, b.w, b.h)):
                    raise InvariantError("trajectory leaves the finite plane")


@dataclass(frozen=True)
class Scene:
    """Generated detections plus the ground truth behind them.

    owners[frame] lists, per face in detection order, which person produced
    it (index into spec.persons) or DISTRACTOR. truth_centers[p, t] is the
    exact bbox center of person p at frame t, defined for every frame
    whether or not a detection was emitted there.
    """

    spec: SceneSpec
    detections: dict[int, FrameDetections]
    owners: dict[int, tuple[int, ...]]
    truth_centers: np.ndarray  # (P, num_frames, 2) float64

    @property
    def num_persons(self) -> int:
        return len(self.spec.persons)

    def render_frame(self, t: int) -> np.ndarray:
        """Draw frame t: noisy background, one flat-colored patch per person."""
        w, h = self.spec.frame_size
        rng = keyed_rng(self.spec.seed, "frame-noise", t)
        frame = rng.uniform(0.0, 0.05, size=(h, w, 3)).astype(np.float32)
        actors = list(self.spec.persons) + list(self.spec.distractors)
        for idx, actor in enumerate(actors):
            if t in actor.dropout_frames:
                continue
            color = keyed_rng(self.spec.seed, "actor-color", idx).uniform(0.3, 1.0, size=3)
            b = actor.bbox_at(t)
            x0 = max(0, int(round(b.x)))
            y0 = max(0, int(round(b.y)))
            x1 = min(w, int(round(b.x + b.w)))
            y1 = min(h, int(round(b.y + b.h)))
            if x1 > x0 and y1 > y0:
                frame[y0:y1, x0:x1] = color.astype(np.float32)
            # Bright nose marker so warps have a localizable feature.
            nx, ny = actor.landmarks_at(t)[2]
            nx, ny = int(round(nx)), int(round(ny))
            if 0 <= nx < w and 0 <= ny < h:
                frame[ny, nx] = 1.0
        return np.clip(frame, 0.0, 1.0)

    def render_all(self) -> np.ndarray:
        return np.stack([self.render_frame(t) for t in range(self.spec.num_frames)])


def generate_scene(spec: SceneSpec) -> Scene:
    detections: dict[int, FrameDetections] = {}
    owners: dict[int, tuple[int, ...]] = {}
    for t in range(spec.num_frames):
        faces = []
        who = []
        for pid, person in enumerate(spec.persons):
            if t in person.dropout_frames:
                continue
            faces.append(
                FaceObservation(
                    bbox=person.bbox_at(t),
                    confidence=person.confidence,
                    landmarks=person.landmarks_at(t),
                )
            )
            who.append(pid)
        for distractor in spec.distractors:
            if t in distractor.dropout_frames:
                continue
            faces.append(
                FaceObservation(
                    bbox=distractor.bbox_at(t),
                    confidence=distractor.confidence,
                    landmarks=distractor.landmarks_at(t),
                )
            )
            who.append(DISTRACTOR)
        if faces:
            detections[t] = FrameDetections(frame_index=t, faces=tuple(faces))
            owners[t] = tuple(who)

    centers = np.empty((len(spec.persons), spec.num_frames, 2), dtype=np.float64)
    for pid, person in enumerate(spec.persons):
        for t in range(spec.num_frames):
            centers[pid, t] = person.bbox_at(t).center
    return Scene(spec=spec, detections=detections, owners=owners, truth_centers=centers)


def random_scene(seed: int, index: int, max_persons: int = 3) -> SceneSpec:
    """Draw a tracking test scene: 1-3 banded persons, dropout up to 20%,
    plus distractors.

    Persons live in disjoint horizontal bands with slow affine motion, so
    correct association is unambiguous and fully determined by the spec.
    Distractors are low-confidence clutter; scenes without person dropout
    may also get one high-confidence but grossly undersized distractor that
    a size-consistency gate must reject. It enters only after the first few
    frames so it cannot seed a track of its own.
    """
    rng = keyed_rng(seed, "scene", index)
    num_frames = int(rng.integers(48, 73))
    n_persons = int(rng.integers(1, max_persons + 1))
    band_h = 48
    width = 192
    height = band_h * (n_persons + 1)

    persons = []
    for p in range(n_persons):
        side = float(rng.uniform(26.0, 34.0))
        x0 = float(rng.uniform(4.0, width - side - 4.0))
        y0 = p * band_h + float(rng.uniform(2.0, band_h - side - 2.0))
        # Velocity bounded so the whole path stays inside the frame and the
        # person's own band; bands never overlap, so cross-person IOU is 0.
        vx_max = min(1.5, (width - side - 4.0 - x0) / num_frames, (x0 - 4.0) / num_frames)
        vx = float(rng.uniform(-max(vx_max, 0.0), max(vx_max, 0.0)))
        vy_lo = -min(0.2, (y0 - p * band_h - 2.0) / num_frames)
        vy_hi = min(0.2, (p * band_h + band_h - side - 2.0 - y0) / num_frames)
        vy = float(rng.uniform(min(vy_lo, 0.0), max(vy_hi, 0.0)))
        drop_fraction = float(rng.uniform(0.0, 0.2))
        n_drop = int(drop_fraction * num_frames)
        eligible = np.arange(6, num_frames)
        drops = rng.choice(eligible, size=min(n_drop, eligible.size), replace=False)
        persons.append(
            PersonSpec(
                start_bbox=BoundingBox(x0, y0, side, side),
                delta=(vx, vy, 0.0, 0.0),
                dropout_frames=frozenset(int(d) for d in drops),
                confidence=float(rng.uniform(0.96, 1.0)),
            )
        )

    distractors = []
    for _ in range(int(rng.integers(0, 3))):
        side = float(rng.uniform(10.0, 24.0))
        x0 = float(rng.uniform(2.0, width - side - 2.0))
        y0 = n_persons * band_h + float(rng.uniform(2.0, band_h - side - 2.0))
        distractors.append(
            PersonSpec(
                start_bbox=BoundingBox(x0, y0, side, side),
                delta=(float(rng.uniform(-1.0, 1.0)), 0.0, 0.0, 0.0),
                confidence=float(rng.uniform(0.3, 0.8)),
            )
        )
    no_dropout = all(not p.dropout_frames for p in persons)
    if no_dropout and n_persons >= 2 and rng.uniform() < 0.5:
        side = 8.0  # far below the size gate relative to ~30 px persons
        distractors.append(
            PersonSpec(
                start_bbox=BoundingBox(
                    float(rng.uniform(2.0, width - side - 2.0)),
                    n_persons * band_h + 4.0,
                    side,
                    side,
                ),
                dropout_frames=frozenset(range(6)),
                confidence=0.99,
            )
        )

    return SceneSpec(
        num_frames=num_frames,
        frame_size=(width, height),
        persons=tuple(persons),
        distractors=tuple(distractors),
        seed=seed * 1_000_003 + index,
    )


@dataclass(frozen=True)
class EmbeddingDatasetSpec:
    num_videos: int
    clips_per_video: int
    dim_v: int
    dim_a: int
    separation: float  # class-mean distance in units of noise sigma
    fake_fraction: float
    seed: int = 0

    def __post_init__(self):
        if self.num_videos < 1 or self.clips_per_video < 1:
            raise InvariantError("num_videos and clips_per_video must be >= 1")
        if self.dim_v < 1 or self.dim_a < 1:
            raise InvariantError("embedding dims must be >= 1")
        if not 0.0 <= self.fake_fraction <= 1.0:
            raise InvariantError("fake_fraction must lie in [0, 1]")
        if self.separation < 0:
            raise InvariantError("separation must be >= 0")


@dataclass(frozen=True)
class EmbeddingDataset:
    spec: EmbeddingDatasetSpec
    video_ids: tuple[str, ...]
    labels: np.ndarray  # (num_videos,) 0=real 1=fake
    z_v: np.ndarray  # (num_videos, clips_per_video, dim_v) f32
    z_a: np.ndarray  # (num_videos, clips_per_video, dim_a) f32


def generate_embeddings(spec: EmbeddingDatasetSpec) -> EmbeddingDataset:
    """Two-Gaussian clip embeddings with unit noise.

    The class signal lives in the visual embedding: class means sit
    separation apart along a fixed random direction. Audio embeddings are
    pure noise, so any classifier quality must come from z_v.
    """
    n_fake = round(spec.num_videos * spec.fake_fraction)
    labels = np.zeros(spec.num_videos, dtype=np.int64)
    order = keyed_rng(spec.seed, "labels").permutation(spec.num_videos)
    labels[order[:n_fake]] = 1

    direction = keyed_rng(spec.seed, "direction").normal(size=spec.dim_v)
    direction /= np.linalg.norm(direction)
    offset = (spec.separation / 2.0) * direction

    video_ids = tuple(f"v{idx:05d}" for idx in range(spec.num_videos))
    z_v = np.empty((spec.num_videos, spec.clips_per_video, spec.dim_v), dtype=np.float32)
    z_a = np.empty((spec.num_videos, spec.clips_per_video, spec.dim_a), dtype=np.float32)
    for idx, vid in enumerate(video_ids):
        rng = keyed_rng(spec.seed, vid)
        noise_v = rng.normal(size=(spec.clips_per_video, spec.dim_v))
        noise_a = rng.normal(size=(spec.clips_per_video, spec.dim_a))
        mean = offset if labels[idx] == 1 else -offset
        z_v[idx] = (mean + noise_v).astype(np.float32)
        z_a[idx] = noise_a.astype(np.float32)
    return EmbeddingDataset(spec=spec, video_ids=video_ids, labels=labels, z_v=z_v, z_a=z_a)
