"""Face tracking: association, gap interpolation, temporal smoothing, and
alignment of tracked faces into 224x224 crops.

The tracker consumes per-frame detections (boxes, confidences, 5-point
landmarks) produced upstream and turns them into one FaceTrack per person.
Association follows max IOU of the landmark bounding rectangles against the
track's last accepted detection. Multi-person videos additionally gate
candidates on size consistency so background faces do not hijack a track.
Frames where a person's detection is missing are filled by linear
interpolation between the neighbouring detected frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataio import FrameDetections
from .errors import (
    BadOrderingError,
    EvenWindowError,
    InvariantError,
    NoFacesDetectedError,
)
from .geometry import (
    ALIGNED_SIZE,
    BoundingBox,
    as_landmarks,
    estimate_similarity,
    iou,
    landmark_bbox,
    warp_frame,
)

DETECTED = "detected"
INTERPOLATED = "interpolated"

# Number of leading detected frames inspected when deciding between
# single-face and multi-face mode and when seeding multi-face tracks.
SEED_WINDOW = 5


@dataclass(frozen=True)
class TrackPoint:
    frame_index: int
    bbox: BoundingBox
    landmarks: np.ndarray  # (5, 2)
    provenance: str  # DETECTED or INTERPOLATED
    smoothed_landmarks: np.ndarray | None = None

    def __post_init__(self):
        if self.provenance not in (DETECTED, INTERPOLATED):
            raise InvariantError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "landmarks", as_landmarks(self.landmarks))
        if self.smoothed_landmarks is not None:
            object.__setattr__(
                self, "smoothed_landmarks", as_landmarks(self.smoothed_landmarks)
            )


@dataclass(frozen=True)
class FaceTrack:
    track_id: int
    points: tuple[TrackPoint, ...]

    def __post_init__(self):
        if not self.points:
            raise InvariantError("a track must contain at least one point")
        object.__setattr__(self, "points", tuple(self.points))
        for a, b in zip(self.points, self.points[1:]):
            if b.frame_index != a.frame_index + 1:
                raise InvariantError(
                    f"track frames must be consecutive, got {a.frame_index} -> {b.frame_index}"
                )
        if not any(p.provenance == DETECTED for p in self.points):
            raise InvariantError("a track must contain at least one detected point")

    @property
    def first_frame(self) -> int:
        return self.points[0].frame_index

    @property
    def last_frame(self) -> int:
        return self.points[-1].frame_index

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class TrackerConfig:
    confidence_threshold: float = 0.95
    enlarge_factor: float = 1.8
    size_ratio_gate: tuple[float, float] = (0.5, 2.0)
    smooth_window: int = 5
    multi_face: bool | None = None  # None = auto-detect

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise InvariantError("confidence_threshold must lie in [0, 1]")
        lo, hi = self.size_ratio_gate
        if not lo < 1.0 < hi:
            raise InvariantError(f"size gate must straddle 1, got ({lo}, {hi})")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise InvariantError(f"smooth_window must be odd >= 1, got {self.smooth_window}")


def interpolate_gap(before: TrackPoint, after: TrackPoint, frame_index: int) -> TrackPoint:
    """Linearly interpolate bbox and landmarks between two detected points."""
    if not before.frame_index < frame_index < after.frame_index:
        raise BadOrderingError(
            f"frame {frame_index} not strictly between {before.frame_index} and {after.frame_index}"
        )
    t = (frame_index - before.frame_index) / (after.frame_index - before.frame_index)
    b0, b1 = before.bbox, after.bbox
    bbox = BoundingBox(
        b0.x + t * (b1.x - b0.x),
        b0.y + t * (b1.y - b0.y),
        b0.w + t * (b1.w - b0.w),
        b0.h + t * (b1.h - b0.h),
    )
    landmarks = before.landmarks + t * (after.landmarks - before.landmarks)
    return TrackPoint(frame_index, bbox, landmarks, INTERPOLATED)


@dataclass
class _Lane:
    """Mutable per-person accumulator used while scanning the video."""

    detected: list[TrackPoint] = field(default_factory=list)

    @property
    def last(self) -> TrackPoint:
        return self.detected[-1]


def _usable_faces(det: FrameDetections, threshold: float):
    """Faces confident enough to track; landmark-less faces cannot be tracked."""
    return [
        f
        for f in det.faces
        if f.confidence >= threshold and f.landmarks is not None
    ]


def _size_ok(candidate, last: TrackPoint, gate: tuple[float, float]) -> bool:
    last_area = last.bbox.area
    if last_area <= 0:
        return True
    ratio = math.sqrt(candidate.bbox.area / last_area)
    return gate[0] <= ratio <= gate[1]


def _center_dist(a: BoundingBox, b: BoundingBox) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def _assign_frame(lanes, faces, use_gate: bool, gate: tuple[float, float]):
    """Greedy one-to-one assignment of this frame's faces to lanes.

    Pairs are claimed in descending landmark-rectangle IOU; pairs with zero
    IOU fall back to ascending bbox-center distance. A pair failing the size
    gate is skipped (distractor) without claiming either side, so the next
    best candidate still gets its chance.
    """
    rects = {id(f): landmark_bbox(f.landmarks) for f in faces}
    scored = []
    for li, lane in enumerate(lanes):
        last_rect = landmark_bbox(lane.last.landmarks)
        for fi, face in enumerate(faces):
            overlap = iou(last_rect, rects[id(face)])
            dist = _center_dist(lane.last.bbox, face.bbox)
            scored.append((overlap, dist, li, fi))
    # IOU-positive pairs first (best overlap wins), then distance fallback.
    by_iou = sorted((s for s in scored if s[0] > 0), key=lambda s: (-s[0], s[1]))
    by_dist = sorted((s for s in scored if s[0] == 0), key=lambda s: s[1])

    taken_lane: set[int] = set()
    taken_face: set[int] = set()
    assignment: dict[int, int] = {}
    for overlap, dist, li, fi in by_iou + by_dist:
        if li in taken_lane or fi in taken_face:
            continue
        if use_gate and not _size_ok(faces[fi], lanes[li].last, gate):
            continue
        assignment[li] = fi
        taken_lane.add(li)
        taken_face.add(fi)
    return assignment


def build_tracks(
    detections: dict[int, FrameDetections],
    num_frames: int,
    cfg: TrackerConfig | None = None,
) -> list[FaceTrack]:
    """Associate detections into per-person tracks.

    Single-face mode keeps one lane and follows the max-IOU candidate from
    the last frame a face was detected in. Multi-face mode (entered when
    more than one face clears the confidence threshold in at least 3 of the
    first 5 detected frames, unless cfg.multi_face forces it) seeds one lane
    per face in the first detected frame, lets unmatched faces inside that
    window seed further lanes, and gates every candidate on size ratio.
    Gaps inside each lane's detection span are linearly interpolated; frames
    before the first or after the last detection are not extrapolated.
    """
    cfg = cfg or TrackerConfig()
    if num_frames < 1:
        raise InvariantError(f"num_frames must be >= 1, got {num_frames}")

    frame_faces = {}
    for idx in sorted(detections):
        faces = _usable_faces(detections[idx], cfg.confidence_threshold)
        if faces:
            frame_faces[idx] = faces
    if not frame_faces:
        raise NoFacesDetectedError(
            f"no face above confidence {cfg.confidence_threshold} in any frame"
        )

    detected_frames = list(frame_faces)
    window = detected_frames[:SEED_WINDOW]
    if cfg.multi_face is None:
        crowded = sum(1 for idx in window if len(frame_faces[idx]) > 1)
        multi = crowded >= min(3, len(window))
    else:
        multi = cfg.multi_face

    lanes: list[_Lane] = []
    for idx in detected_frames:
        faces = frame_faces[idx]
        if not lanes:
            if multi:
                seeds = faces
            else:
                seeds = [max(faces, key=lambda f: f.confidence)]
            for face in seeds:
                lane = _Lane()
                lane.detected.append(TrackPoint(idx, face.bbox, face.landmarks, DETECTED))
                lanes.append(lane)
            continue

        assignment = _assign_frame(lanes, faces, use_gate=multi, gate=cfg.size_ratio_gate)
        for li, fi in assignment.items():
            face = faces[fi]
            lanes[li].detected.append(TrackPoint(idx, face.bbox, face.landmarks, DETECTED))
        if multi and idx in window:
            claimed = set(assignment.values())
            for fi, face in enumerate(faces):
                if fi not in claimed:
                    lane = _Lane()
                    lane.detected.append(TrackPoint(idx, face.bbox, face.landmarks, DETECTED))
                    lanes.append(lane)

    tracks = []
    for track_id, lane in enumerate(sorted(lanes, key=lambda l: (l.detected[0].frame_index,
                                                                 l.detected[0].bbox.x))):
        points: list[TrackPoint] = []
        for prev, nxt in zip(lane.detected, lane.detected[1:]):
            points.append(prev)
            for missing in range(prev.frame_index + 1, nxt.frame_index):
                points.append(interpolate_gap(prev, nxt, missing))
        points.append(lane.detected[-1])
        tracks.append(FaceTrack(track_id, tuple(points)))
    return tracks


def smooth_track(track: FaceTrack, window: int = 5) -> FaceTrack:
    """Fill smoothed_landmarks with a sliding mean over the raw landmarks.

    The window is centred and shrinks at the track boundaries; bounding
    boxes are left untouched.
    """
    if window % 2 == 0:
        raise EvenWindowError(f"smoothing window must be odd, got {window}")
    if window < 1:
        raise InvariantError(f"smoothing window must be >= 1, got {window}")
    stack = np.stack([p.landmarks for p in track.points])  # (T, 5, 2)
    half = (window - 1) // 2
    n = stack.shape[0]
    points = []
    for i, point in enumerate(track.points):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        smoothed = stack[lo:hi].mean(axis=0)
        points.append(replace(point, smoothed_landmarks=smoothed))
    return FaceTrack(track.track_id, tuple(points))


def align_track(
    track: FaceTrack,
    frames: np.ndarray,
    reference: np.ndarray,
    out_size: tuple[int, int] = (ALIGNED_SIZE, ALIGNED_SIZE),
) -> np.ndarray:
    """Warp each tracked frame so the face lands on the reference landmarks.

    `frames` is indexed by absolute frame index (shape (N, H, W, 3)); the
    result has one out_size frame per track point, in track order.
    """
    reference = as_landmarks(reference)
    aligned = np.empty((len(track.points), out_size[0], out_size[1], 3), dtype=np.float32)
    for i, point in enumerate(track.points):
        if point.smoothed_landmarks is None:
            raise InvariantError(
                "align_track requires smoothed landmarks; run smooth_track first"
            )
        transform, _ = estimate_similarity(point.smoothed_landmarks, reference)
        aligned[i] = warp_frame(np.asarray(frames[point.frame_index]), transform, out_size)
    return aligned


def provenance_mask(track: FaceTrack) -> list[int]:
    """1 where the point was detected, 0 where it was interpolated."""
    return [1 if p.provenance == DETECTED else 0 for p in track.points]
