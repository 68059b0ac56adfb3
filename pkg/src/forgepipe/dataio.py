"""On-disk formats: JSONL manifests and detection streams, the FOTENSR1
binary tensor format, and score CSV tables.

All readers validate invariants and reject malformed input; nothing is
silently repaired. Readers and writers are pure functions over byte streams
and safe to call concurrently on distinct paths.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DimOverflowError,
    InvariantError,
    NonMonotoneFramesError,
    ParseError,
    TruncatedPayloadError,
)
from .geometry import BoundingBox, as_landmarks

TENSOR_MAGIC = b"FOTENSR1"
_DTYPE_F32 = 0
# Caps ndim and total element count; anything larger is a corrupt header.
_MAX_NDIM = 32
_MAX_ELEMS = 1 << 40

LABEL_REAL = 0
LABEL_FAKE = 1

KNOWN_MANIPULATIONS = ("None", "Deepfake", "FaceSwap", "Face2Face", "NeuralTextures")


@dataclass(frozen=True)
class Manipulation:
    """Manipulation family; unknown names are preserved under kind="Other"."""

    kind: str
    other_name: str | None = None

    @classmethod
    def parse(cls, name: str) -> "Manipulation":
        if name in KNOWN_MANIPULATIONS:
            return cls(name)
        return cls("Other", name)

    @property
    def is_none(self) -> bool:
        return self.kind == "None"

    def __str__(self) -> str:
        return self.other_name if self.kind == "Other" else self.kind


@dataclass(frozen=True)
class VideoManifestEntry:
    video_id: str
    label: int  # LABEL_REAL or LABEL_FAKE
    manipulation: Manipulation
    frames_uri: str
    fps: Fraction
    sample_rate: int
    num_frames: int
    audio_uri: str | None = None
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.label not in (LABEL_REAL, LABEL_FAKE):
            raise InvariantError(f"{self.video_id}: label must be LABEL_REAL or LABEL_FAKE")
        if self.fps <= 0:
            raise InvariantError(f"{self.video_id}: fps must be > 0")
        if self.sample_rate <= 0:
            raise InvariantError(f"{self.video_id}: sample_rate must be > 0")
        if self.num_frames < 1:
            raise InvariantError(f"{self.video_id}: num_frames must be >= 1")
        if self.label == LABEL_REAL and not self.manipulation.is_none:
            raise InvariantError(f"{self.video_id}: Real videos must have manipulation None")


@dataclass(frozen=True)
class FaceObservation:
    bbox: BoundingBox
    confidence: float
    landmarks: np.ndarray | None = None  # (5, 2) when present

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InvariantError(f"confidence {self.confidence} outside [0, 1]")
        if self.landmarks is not None:
            object.__setattr__(self, "landmarks", as_landmarks(self.landmarks))


@dataclass(frozen=True)
class FrameDetections:
    frame_index: int
    faces: tuple[FaceObservation, ...]

    def __post_init__(self):
        if self.frame_index < 0:
            raise InvariantError(f"frame_index {self.frame_index} must be >= 0")


@dataclass(frozen=True)
class ScoreRecord:
    video_id: str
    track_id: int
    clip_index: int
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise InvariantError(f"score {self.score} outside [0, 1]")


def parse_fps(value) -> Fraction:
    """Parse an fps value given as "num/den", "num", or an integer."""
    if isinstance(value, int):
        f = Fraction(value)
    elif isinstance(value, str):
        try:
            f = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad fps value {value!r}: {exc}") from None
    else:
        raise InvariantError(f"fps must be a rational string or integer, got {type(value).__name__}")
    if f <= 0:
        raise InvariantError(f"fps must be > 0, got {value!r}")
    return f


def format_fps(fps: Fraction) -> str:
    return f"{fps.numerator}/{fps.denominator}"


_LABELS = {"Real": LABEL_REAL, "Fake": LABEL_FAKE}


def _entry_from_json(obj: dict) -> VideoManifestEntry:
    try:
        label_name = obj["label"]
        if label_name not in _LABELS:
            raise InvariantError(f"unknown label {label_name!r}")
        return VideoManifestEntry(
            video_id=obj["video_id"],
            label=_LABELS[label_name],
            manipulation=Manipulation.parse(obj["manipulation"]),
            frames_uri=obj["frames_uri"],
            fps=parse_fps(obj["fps"]),
            sample_rate=int(obj["sample_rate"]),
            num_frames=int(obj["num_frames"]),
            audio_uri=obj.get("audio_uri"),
            tags=tuple(obj.get("tags", ())),
        )
    except KeyError as exc:
        raise InvariantError(f"manifest entry missing field {exc}") from None


def entry_to_json(entry: VideoManifestEntry) -> dict:
    obj = {
        "video_id": entry.video_id,
        "label": "Real" if entry.label == LABEL_REAL else "Fake",
        "manipulation": str(entry.manipulation),
        "frames_uri": entry.frames_uri,
        "fps": format_fps(entry.fps),
        "sample_rate": entry.sample_rate,
        "num_frames": entry.num_frames,
    }
    if entry.audio_uri is not None:
        obj["audio_uri"] = entry.audio_uri
    if entry.tags:
        obj["tags"] = list(entry.tags)
    return obj


def read_manifest(path: str | Path) -> list[VideoManifestEntry]:
    """Read a JSONL manifest; entries are returned in file order."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line_no) from None
            entries.append(_entry_from_json(obj))
    return entries


def write_manifest(path: str | Path, entries: list[VideoManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry_to_json(entry), sort_keys=True) + "\n")


def read_detections(path: str | Path) -> dict[int, FrameDetections]:
    """Read a JSONL detection stream into a frame_index -> FrameDetections map.

    Frame indices must be strictly increasing; gaps (frames with no line)
    are permitted and simply absent from the map.
    """
    out: dict[int, FrameDetections] = {}
    last = -1
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line_no) from None
            det = _detections_from_json(obj)
            if det.frame_index <= last:
                raise NonMonotoneFramesError(
                    f"line {line_no}: frame {det.frame_index} after frame {last}"
                )
            last = det.frame_index
            out[det.frame_index] = det
    return out


def _detections_from_json(obj: dict) -> FrameDetections:
    try:
        faces = []
        for face in obj["faces"]:
            bbox = face["bbox"]
            landmarks = face.get("landmarks")
            if landmarks is not None and len(landmarks) != 5:
                raise InvariantError(f"landmark list must have exactly 5 points, got {len(landmarks)}")
            faces.append(
                FaceObservation(
                    bbox=BoundingBox(bbox["x"], bbox["y"], bbox["w"], bbox["h"]),
                    confidence=float(face["confidence"]),
                    landmarks=None if landmarks is None else landmarks,
                )
            )
        return FrameDetections(frame_index=int(obj["frame_index"]), faces=tuple(faces))
    except KeyError as exc:
        raise InvariantError(f"detection entry missing field {exc}") from None


def detections_to_json(det: FrameDetections) -> dict:
    faces = []
    for face in det.faces:
        obj = {
            "bbox": {"x": face.bbox.x, "y": face.bbox.y, "w": face.bbox.w, "h": face.bbox.h},
            "confidence": face.confidence,
        }
        obj["landmarks"] = None if face.landmarks is None else face.landmarks.tolist()
        faces.append(obj)
    return {"frame_index": det.frame_index, "faces": faces}


def write_detections(path: str | Path, detections: dict[int, FrameDetections]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame_index in sorted(detections):
            fh.write(json.dumps(detections_to_json(detections[frame_index]), sort_keys=True) + "\n")


def write_tensor(path: str | Path, buffer: np.ndarray, dims: tuple[int, ...] | None = None) -> None:
    """Write a float32 tensor in the FOTENSR1 format.

    Header: magic (8 bytes), dtype u32, ndim u32, dims u64 x ndim, all
    little-endian; payload is row-major little-endian float32.
    """
    arr = np.asarray(buffer, dtype=np.float32)
    if dims is None:
        dims = arr.shape if arr.ndim > 0 else (1,)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise InvariantError(f"all dims must be >= 1, got {dims}")
    expected = int(np.prod(dims, dtype=np.int64))
    if arr.size != expected:
        raise InvariantError(f"buffer has {arr.size} values, dims {dims} require {expected}")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<II", _DTYPE_F32, len(dims)))
        fh.write(struct.pack(f"<{len(dims)}Q", *dims))
        fh.write(arr.reshape(-1).astype("<f4").tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a FOTENSR1 tensor; the write/read round trip is bit-exact."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:8]
    if magic != TENSOR_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if len(data) < 16:
        raise TruncatedPayloadError("header truncated")
    dtype_code, ndim = struct.unpack_from("<II", data, 8)
    if dtype_code != _DTYPE_F32:
        raise InvariantError(f"unsupported dtype code {dtype_code}")
    if ndim == 0 or ndim > _MAX_NDIM:
        raise DimOverflowError(f"ndim {ndim} outside [1, {_MAX_NDIM}]")
    header_end = 16 + 8 * ndim
    if len(data) < header_end:
        raise TruncatedPayloadError("dims truncated")
    dims = struct.unpack_from(f"<{ndim}Q", data, 16)
    if any(d < 1 for d in dims):
        raise InvariantError(f"all dims must be >= 1, got {dims}")
    total = 1
    for d in dims:
        total *= d
        if total > _MAX_ELEMS:
            raise DimOverflowError(f"element count exceeds {_MAX_ELEMS}")
    payload = data[header_end:]
    if len(payload) < 4 * total:
        raise TruncatedPayloadError(f"payload has {len(payload)} bytes, need {4 * total}")
    if len(payload) > 4 * total:
        raise InvariantError(f"{len(payload) - 4 * total} trailing bytes after payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return arr.copy()


def write_scores(path: str | Path, records: list[ScoreRecord]) -> None:
    """Write the score table CSV: video_id,track_id,clip_index,score."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "track_id", "clip_index", "score"])
        for rec in records:
            writer.writerow([rec.video_id, rec.track_id, rec.clip_index, f"{rec.score:.6f}"])


def read_scores(path: str | Path) -> list[ScoreRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["video_id", "track_id", "clip_index", "score"]:
            raise ParseError(f"unexpected score CSV header: {header}", 1)
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 columns, got {len(row)}", line_no)
            try:
                records.append(ScoreRecord(row[0], int(row[1]), int(row[2]), float(row[3])))
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from None
    return records


def read_jsonl(path: str | Path) -> list[dict]:
    """Generic JSONL reader used by auxiliary manifests (clips, embeddings)."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line_no) from None
    return rows


def write_jsonl(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def dumps_json(obj) -> str:
    """Canonical JSON used for deterministic artifact output."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
