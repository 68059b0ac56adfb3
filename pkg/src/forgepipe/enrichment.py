"""Audio-enrichment planning for face-forgery datasets.

Manipulated videos are silent; the right audio depends on how the fake was
made. Face-swapping (Deepfake, FaceSwap) pastes the source identity onto
the target performance, so lips follow the target and the target's audio is
correct. Reenactment (Face2Face, NeuralTextures) drives the target's face
from the source performance, so the source's audio is correct. Real videos
keep their own audio; unknown manipulations stay un-enriched.

The ledger tallies how far enrichment got: of the sources with a retrievable
stream, those with a broken frame mapping stay un-enriched, and
enriched = with_url - bad_mapping.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataio import Manipulation
from .errors import InvariantError, MissingSourceIdError, RangeBeyondStreamError
from .sampling import TimeBase

log = logging.getLogger(__name__)

TARGET_AUDIO = "target_audio"
SOURCE_AUDIO = "source_audio"
OWN_AUDIO = "own_audio"
NO_AUDIO = "none"

ENRICHED = "enriched"
UNENRICHED_NO_URL = "unenriched_no_url"
UNENRICHED_BAD_MAPPING = "unenriched_bad_mapping"

_SWAP_FAMILIES = ("Deepfake", "FaceSwap")
_REENACT_FAMILIES = ("Face2Face", "NeuralTextures")


def plan_audio(manipulation: Manipulation, target_id: str, source_id: str | None) -> str:
    """Pick the audio origin for one video by manipulation family."""
    if manipulation.kind == "None":
        if not target_id:
            raise InvariantError("real videos need a target_id")
        return OWN_AUDIO
    if manipulation.kind == "Other":
        return NO_AUDIO
    if not source_id:
        raise MissingSourceIdError(
            f"{manipulation.kind} video requires a source_id"
        )
    if not target_id:
        raise InvariantError("manipulated videos need a target_id")
    if manipulation.kind in _SWAP_FAMILIES:
        return TARGET_AUDIO
    if manipulation.kind in _REENACT_FAMILIES:
        return SOURCE_AUDIO
    raise InvariantError(f"unhandled manipulation kind {manipulation.kind!r}")


@dataclass(frozen=True)
class EnrichmentRecord:
    video_id: str
    manipulation: Manipulation
    target_id: str
    source_id: str | None
    frame_range: tuple[int, int]
    audio_origin: str
    status: str

    def __post_init__(self):
        if self.audio_origin not in (TARGET_AUDIO, SOURCE_AUDIO, OWN_AUDIO, NO_AUDIO):
            raise InvariantError(f"unknown audio origin {self.audio_origin!r}")
        if self.status not in (ENRICHED, UNENRICHED_NO_URL, UNENRICHED_BAD_MAPPING):
            raise InvariantError(f"unknown status {self.status!r}")
        if self.manipulation.kind == "None" and self.audio_origin not in (OWN_AUDIO, NO_AUDIO):
            raise InvariantError("real videos may only use their own audio")
        if self.status == ENRICHED and self.audio_origin == NO_AUDIO:
            raise InvariantError("an enriched record must name an audio origin")
        start, end = self.frame_range
        if start < 0 or end < start:
            raise InvariantError(f"bad frame range ({start}, {end})")


def cut_audio(stream: np.ndarray, frame_range: tuple[int, int], tb: TimeBase) -> np.ndarray:
    """Cut samples [floor(start*sr/fps), floor(end*sr/fps)) from the stream.

    A range that extends past the stream end raises RangeBeyondStream;
    callers record those videos as un-enriched rather than padding audio.
    """
    stream = np.asarray(stream, dtype=np.float32)
    if stream.ndim != 1:
        raise InvariantError(f"audio stream must be 1-D, got shape {stream.shape}")
    start, end = frame_range
    if start < 0 or end < start:
        raise InvariantError(f"bad frame range ({start}, {end})")
    den, num = tb.fps.denominator, tb.fps.numerator
    s0 = start * tb.sample_rate * den // num
    s1 = end * tb.sample_rate * den // num
    if s1 > stream.shape[0]:
        raise RangeBeyondStreamError(
            f"frame range ({start}, {end}) needs {s1} samples, stream has {stream.shape[0]}"
        )
    if s0 == s1:
        log.warning("degenerate frame range (%d, %d) produced an empty buffer", start, end)
    return stream[s0:s1].copy()


def enrich(rows: list[dict], fetch_audio, tb: TimeBase | None = None) -> tuple[list[EnrichmentRecord], list[np.ndarray | None]]:
    """Plan and cut audio for enrichment spec rows.

    Each row carries {video_id, manipulation, target_id, source_id,
    frame_range, origin_audio_uri}. fetch_audio maps a URI to a 1-D stream
    or None when the origin was never retrievable (no URL). Returns the
    records plus, aligned with them, the cut audio (None when un-enriched).
    """
    tb = tb or TimeBase()
    records = []
    buffers: list[np.ndarray | None] = []
    for row in rows:
        manipulation = Manipulation.parse(row["manipulation"])
        origin = plan_audio(manipulation, row["target_id"], row.get("source_id"))
        frame_range = tuple(int(v) for v in row["frame_range"])
        uri = row.get("origin_audio_uri")
        if origin == NO_AUDIO:
            status, audio = UNENRICHED_NO_URL, None
        else:
            stream = fetch_audio(uri) if uri else None
            if stream is None:
                status, audio = UNENRICHED_NO_URL, None
            else:
                try:
                    audio = cut_audio(stream, frame_range, tb)
                    status = ENRICHED
                except RangeBeyondStreamError:
                    status, audio = UNENRICHED_BAD_MAPPING, None
        records.append(
            EnrichmentRecord(
                video_id=row["video_id"],
                manipulation=manipulation,
                target_id=row["target_id"],
                source_id=row.get("source_id"),
                frame_range=frame_range,
                audio_origin=origin,
                status=status,
            )
        )
        buffers.append(audio)
    return records, buffers


@dataclass(frozen=True)
class EnrichmentLedger:
    total_sources: int
    with_url: int
    bad_mapping: int
    enriched: int

    def __post_init__(self):
        if self.enriched != self.with_url - self.bad_mapping:
            raise InvariantError("ledger must satisfy enriched = with_url - bad_mapping")
        if not self.enriched <= self.with_url <= self.total_sources:
            raise InvariantError("ledger must satisfy enriched <= with_url <= total_sources")

    def to_json(self) -> dict:
        return {
            "total_sources": self.total_sources,
            "with_url": self.with_url,
            "bad_mapping": self.bad_mapping,
            "enriched": self.enriched,
        }


def build_ledger(records: list[EnrichmentRecord]) -> EnrichmentLedger:
    with_url = sum(1 for r in records if r.status != UNENRICHED_NO_URL)
    bad = sum(1 for r in records if r.status == UNENRICHED_BAD_MAPPING)
    done = sum(1 for r in records if r.status == ENRICHED)
    return EnrichmentLedger(
        total_sources=len(records),
        with_url=with_url,
        bad_mapping=bad,
        enriched=done,
    )
