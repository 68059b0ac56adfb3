"""Score aggregation and video-level metrics.

Clip scores roll up per track by mean, then per video by max over tracks.
ROC-AUC is the Mann-Whitney statistic (ties count half), computed from
midranks in O(n log n); accuracy thresholds with >= so ties classify fake.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .dataio import ScoreRecord
from .errors import (
    EmptyScoresError,
    InvariantError,
    SingleClassError,
    UnknownVideoIdError,
)


@dataclass(frozen=True)
class VideoVerdict:
    video_id: str
    video_score: float
    label: int  # 0=real 1=fake
    num_clips_used: int
    num_tracks: int

    def __post_init__(self):
        if not 0.0 <= self.video_score <= 1.0:
            raise InvariantError(f"video_score {self.video_score} outside [0, 1]")
        if self.label not in (0, 1):
            raise InvariantError(f"label must be 0 or 1, got {self.label}")


def aggregate_video(records: list[ScoreRecord], label: int) -> VideoVerdict:
    """Mean of clip scores per track, then max over the video's tracks."""
    if not records:
        raise EmptyScoresError("no score records for video")
    video_id = records[0].video_id
    if any(r.video_id != video_id for r in records):
        raise InvariantError("aggregate_video needs records of a single video")
    by_track: dict[int, list[float]] = defaultdict(list)
    for r in records:
        by_track[r.track_id].append(r.score)
    track_means = [float(np.mean(scores)) for scores in by_track.values()]
    return VideoVerdict(
        video_id=video_id,
        video_score=max(track_means),
        label=label,
        num_clips_used=len(records),
        num_tracks=len(by_track),
    )


def aggregate_all(records: list[ScoreRecord], labels: dict[str, int]) -> list[VideoVerdict]:
    """Group records by video and aggregate each; labels joined by video_id."""
    by_video: dict[str, list[ScoreRecord]] = defaultdict(list)
    for r in records:
        by_video[r.video_id].append(r)
    verdicts = []
    for video_id in sorted(by_video):
        if video_id not in labels:
            raise UnknownVideoIdError(f"no label for video {video_id!r}")
        verdicts.append(aggregate_video(by_video[video_id], labels[video_id]))
    return verdicts


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average rank of their block."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(verdicts: list[VideoVerdict]) -> float:
    """Mann-Whitney AUC over video scores: P(fake outscores real), ties half."""
    if not verdicts:
        raise EmptyScoresError("no verdicts to evaluate")
    scores = np.asarray([v.video_score for v in verdicts], dtype=np.float64)
    labels = np.asarray([v.label for v in verdicts], dtype=np.int64)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError(
            f"need both classes, got {n_pos} fake and {n_neg} real"
        )
    ranks = _midranks(scores)
    rank_sum_pos = float(ranks[labels == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def accuracy(verdicts: list[VideoVerdict], threshold: float = 0.5) -> float:
    """Fraction with (score >= threshold) agreeing with the label."""
    if not verdicts:
        raise EmptyScoresError("no verdicts to evaluate")
    correct = sum(
        1 for v in verdicts if (v.video_score >= threshold) == (v.label == 1)
    )
    return correct / len(verdicts)


def filter_category(verdicts: list[VideoVerdict], metadata: dict[str, object],
                    exclude) -> list[VideoVerdict]:
    """Drop verdicts whose manifest metadata matches the exclude predicate."""
    kept = []
    for v in verdicts:
        if v.video_id not in metadata:
            raise UnknownVideoIdError(f"no metadata for video {v.video_id!r}")
        if not exclude(metadata[v.video_id]):
            kept.append(v)
    return kept
