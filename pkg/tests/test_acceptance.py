"""Release acceptance checks, one test per shipped guarantee.

Each test exercises a pipeline stage end to end at its stated tolerance and
prints a [PASS]/[FAIL] line with timing (visible with `pytest -s`). The
plain `pytest -v` report gives the same one-line-per-criterion verdicts.
"""

import contextlib
import io
import json
import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from forgepipe.augment import AugmentConfig, augment_clip
from forgepipe.cli import main as cli_main
from forgepipe.enrichment import (
    ENRICHED,
    NO_AUDIO,
    SOURCE_AUDIO,
    TARGET_AUDIO,
    UNENRICHED_BAD_MAPPING,
    UNENRICHED_NO_URL,
    EnrichmentRecord,
    build_ledger,
    plan_audio,
)
from forgepipe.dataio import Manipulation, ScoreRecord
from forgepipe.evalmetrics import VideoVerdict, aggregate_video, roc_auc
from forgepipe.geometry import SimilarityTransform, estimate_similarity
from forgepipe.head import forward, train
from forgepipe.losses import ContrastiveBatch, combined_loss, milnce_vt, nce_va
from forgepipe.sampling import Clip, TimeBase, audio_window_len, place_inference_clips
from forgepipe.synth import (
    EmbeddingDatasetSpec,
    generate_embeddings,
    generate_scene,
    random_scene,
)
from forgepipe.tracking import INTERPOLATED, TrackerConfig, build_tracks


@contextmanager
def _criterion(num, title):
    t0 = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException:
        print(f"[FAIL] criterion {num:2d}: {title}")
        raise
    elapsed = time.perf_counter() - t0
    detail = info.get("detail", "")
    suffix = f" | {detail}" if detail else ""
    print(f"[PASS] criterion {num:2d}: {title}{suffix} | {elapsed:.2f}s")


def test_01_similarity_round_trip():
    with _criterion(1, "1000 similarity transforms recovered to 1e-5") as info:
        rng = np.random.default_rng(101)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(1000):
            true = SimilarityTransform(
                scale=float(rng.uniform(0.5, 2.0)),
                rotation=float(rng.uniform(-math.pi, math.pi)),
                translation=(float(rng.uniform(-50.0, 50.0)),
                             float(rng.uniform(-50.0, 50.0))),
            )
            src = rng.uniform(-100.0, 100.0, size=(int(rng.integers(3, 12)), 2))
            estimated, residual = estimate_similarity(src, true.apply(src))
            worst = max(worst, float(np.max(np.abs(estimated.matrix() - true.matrix()))))
        elapsed = time.perf_counter() - t0
        assert worst < 1e-5, f"worst matrix-entry error {worst:.3e}"
        assert elapsed < 5.0, f"took {elapsed:.2f} s"
        info["detail"] = f"worst entry error {worst:.2e}"


def test_02_tracking_matches_scene_truth():
    with _criterion(2, "50 synthetic scenes tracked to ground truth") as info:
        t0 = time.perf_counter()
        cfg = TrackerConfig()
        worst = 0.0
        n_interp = 0
        for i in range(50):
            spec = random_scene(7, i)
            scene = generate_scene(spec)
            tracks = build_tracks(scene.detections, spec.num_frames, cfg)
            assert len(tracks) == scene.num_persons, (
                f"scene {i}: {len(tracks)} tracks for {scene.num_persons} persons"
            )
            claimed = set()
            for track in tracks:
                head = track.points[0]
                center = np.asarray(head.bbox.center)
                dists = np.linalg.norm(
                    scene.truth_centers[:, head.frame_index] - center, axis=1
                )
                person = int(np.argmin(dists))
                assert person not in claimed, f"scene {i}: person {person} claimed twice"
                claimed.add(person)
                for point in track.points:
                    err = float(np.linalg.norm(
                        np.asarray(point.bbox.center)
                        - scene.truth_centers[person, point.frame_index]
                    ))
                    worst = max(worst, err)
                    assert err < 1e-4, (
                        f"scene {i} frame {point.frame_index}: center off by {err:.2e}"
                    )
                    n_interp += point.provenance == INTERPOLATED
            assert claimed == set(range(scene.num_persons))
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0, f"took {elapsed:.2f} s"
        info["detail"] = f"worst center error {worst:.2e}, {n_interp} interpolated points"


def test_03_time_base_constants_and_placement():
    with _criterion(3, "audio window length and inference placement") as info:
        tb = TimeBase()
        exact = Fraction(32) * Fraction(tb.sample_rate) / tb.fps
        assert audio_window_len(tb) == math.floor(exact) == 48662

        starts = place_inference_clips(320, 9)
        assert len(starts) == 9
        assert starts == sorted(starts) and len(set(starts)) == 9
        assert starts[0] == 0 and starts[-1] == 320 - 32
        gaps = [b - a for a, b in zip(starts, starts[1:])]
        assert min(gaps) >= 32, f"overlapping starts {starts}"
        info["detail"] = f"window 48662, starts {starts}"


def _flat_loss(template: ContrastiveBatch):
    """Loss and flat gradient as functions of the flattened (zv, za, zt)."""
    k, d = template.zv.shape
    sizes = [k * d, k * d]
    if template.zt is not None:
        sizes.extend(t.shape[0] * d for t in template.zt)
    cuts = np.cumsum(sizes)[:-1]

    def unpack(flat):
        parts = np.split(flat, cuts)
        zv = parts[0].reshape(k, d)
        za = parts[1].reshape(k, d)
        zt = None
        if template.zt is not None:
            zt = tuple(p.reshape(t.shape) for p, t in zip(parts[2:], template.zt))
        return ContrastiveBatch(
            zv=zv, za=za, zt=zt, tau=template.tau,
            lambda_va=template.lambda_va, lambda_vt=template.lambda_vt,
            normalize=template.normalize,
            symmetric_negatives=template.symmetric_negatives,
        )

    parts = [template.zv.ravel(), template.za.ravel()]
    if template.zt is not None:
        parts.extend(t.ravel() for t in template.zt)
    x0 = np.concatenate(parts)

    def loss_at(flat):
        return combined_loss(unpack(flat)).loss

    result = combined_loss(template)
    gparts = [result.grad_zv.ravel(), result.grad_za.ravel()]
    if template.zt is not None:
        gparts.extend(g.ravel() for g in result.grad_zt)
    return x0, loss_at, np.concatenate(gparts)


def test_04_loss_gradients_match_finite_differences():
    with _criterion(4, "contrastive gradients vs central differences") as info:
        rng = np.random.default_rng(404)
        t0 = time.perf_counter()
        h = 1e-4
        worst = 0.0
        for b in range(100):
            k = int(rng.integers(2, 9))
            d = int(rng.integers(2, 33))
            zt = None
            if b % 2 == 0:
                zt = tuple(
                    rng.normal(size=(int(rng.integers(1, 4)), d)) for _ in range(k)
                )
            batch = ContrastiveBatch(
                zv=rng.normal(size=(k, d)),
                za=rng.normal(size=(k, d)),
                zt=zt,
                symmetric_negatives=bool(b % 4 < 2),
            )
            x0, loss_at, grad = _flat_loss(batch)
            for _ in range(6):
                u = rng.normal(size=x0.shape[0])
                u /= np.linalg.norm(u)
                fd = (loss_at(x0 + h * u) - loss_at(x0 - h * u)) / (2.0 * h)
                an = float(grad @ u)
                rel = abs(fd - an) / max(abs(fd), abs(an), 1e-8)
                worst = max(worst, rel)
                assert rel < 1e-4, f"batch {b}: directional error {rel:.3e}"

        single = combined_loss(ContrastiveBatch(
            zv=rng.normal(size=(1, 8)),
            za=rng.normal(size=(1, 8)),
            zt=(rng.normal(size=(2, 8)),),
        ))
        assert single.loss == 0.0
        assert not single.grad_zv.any() and not single.grad_za.any()
        assert all(not g.any() for g in single.grad_zt)

        for symmetric in (True, False):
            for _ in range(10):
                k, d = 5, 12
                za = rng.normal(size=(k, d))
                batch = ContrastiveBatch(
                    zv=rng.normal(size=(k, d)),
                    za=za,
                    zt=tuple(za[i : i + 1] for i in range(k)),
                    symmetric_negatives=symmetric,
                )
                for anchor in range(k):
                    assert milnce_vt(batch, anchor) == nce_va(batch, anchor)

        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"took {elapsed:.2f} s"
        info["detail"] = f"worst relative error {worst:.2e}"


def test_05_head_training_separates_synthetic_classes():
    with _criterion(5, "head training: AUC 1.0, loss < 0.05, exact lr trace") as info:
        t0 = time.perf_counter()
        spec = EmbeddingDatasetSpec(
            num_videos=100, clips_per_video=25, dim_v=64, dim_a=64,
            separation=10.0, fake_fraction=0.5, seed=11,
        )
        ds = generate_embeddings(spec)
        x = np.concatenate(
            [ds.z_v.reshape(-1, spec.dim_v), ds.z_a.reshape(-1, spec.dim_a)], axis=1
        )
        y = np.repeat(ds.labels, spec.clips_per_video)

        result = train(x, y, epochs=6, batch_size=4, seed=11)
        _, scores = forward(result.params, x)
        verdicts = [
            VideoVerdict(f"e{i}", float(s), int(label), 1, 1)
            for i, (s, label) in enumerate(zip(scores, y))
        ]
        auc = roc_auc(verdicts)
        assert auc == 1.0, f"training AUC {auc}"
        assert result.final_loss < 0.05, f"final loss {result.final_loss}"
        assert result.lr_trace[0] == 1e-5
        assert result.lr_trace[-1] == 0.95e-5

        again = train(x, y, epochs=6, batch_size=4, seed=11)
        assert again.final_loss == result.final_loss
        for (name, a), (_, b) in zip(result.params.items(), again.params.items()):
            assert a.tobytes() == b.tobytes(), f"{name} differs between reruns"

        elapsed = time.perf_counter() - t0
        assert elapsed < 20.0, f"took {elapsed:.2f} s"
        info["detail"] = (
            f"AUC {auc}, loss {result.final_loss:.4f}, {result.lr_trace.shape[0]} steps"
        )


def test_06_auc_equals_pair_count_oracle():
    with _criterion(6, "rank AUC == pair-count oracle on 1000 instances") as info:
        rng = np.random.default_rng(606)
        for trial in range(1000):
            n = int(rng.integers(2, 201))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            if trial % 2 == 0:
                scores = rng.integers(0, 7, size=n) / 6.0  # tie-heavy grid
            else:
                scores = np.round(rng.uniform(size=n), 2)
            verdicts = [
                VideoVerdict(f"v{i}", float(s), int(l), 1, 1)
                for i, (s, l) in enumerate(zip(scores, labels))
            ]
            fast = roc_auc(verdicts)
            pos = scores[labels == 1]
            neg = scores[labels == 0]
            wins = float((pos[:, None] > neg[None, :]).sum())
            ties = float((pos[:, None] == neg[None, :]).sum())
            oracle = (wins + 0.5 * ties) / (pos.size * neg.size)
            assert fast == oracle, f"trial {trial}: {fast!r} != {oracle!r}"

        perfect = [VideoVerdict(f"p{i}", s, l, 1, 1)
                   for i, (s, l) in enumerate([(0.9, 1), (0.8, 1), (0.2, 0), (0.1, 0)])]
        assert roc_auc(perfect) == 1.0
        flat = [VideoVerdict(f"f{i}", 0.5, i % 2, 1, 1) for i in range(6)]
        assert roc_auc(flat) == 0.5
        info["detail"] = "exact equality on all 1000 instances"


def test_07_aggregation_mean_then_max():
    with _criterion(7, "score aggregation: mean per track, max over tracks") as info:
        one_track = [ScoreRecord("v", 0, i, s) for i, s in enumerate([0.2, 0.4, 0.6])]
        assert aggregate_video(one_track, label=1).video_score == pytest.approx(0.4)

        two_tracks = [
            ScoreRecord("v", 0, 0, 0.2), ScoreRecord("v", 0, 1, 0.4),
            ScoreRecord("v", 1, 0, 0.7), ScoreRecord("v", 1, 1, 0.9),
        ]
        verdict = aggregate_video(two_tracks, label=1)
        assert verdict.video_score == pytest.approx(0.8)
        assert verdict.num_tracks == 2

        means_03_08 = [ScoreRecord("v", 0, 0, 0.3), ScoreRecord("v", 1, 0, 0.8)]
        assert aggregate_video(means_03_08, label=0).video_score == pytest.approx(0.8)

        single = [ScoreRecord("v", 2, 0, 0.7)]
        assert aggregate_video(single, label=0).video_score == pytest.approx(0.7)
        info["detail"] = "0.4 from one track, 0.8 over tracks 0.3/0.8"


def test_08_enrichment_mapping_and_ledger():
    with _criterion(8, "audio-origin mapping and enrichment ledger") as info:
        expected = {
            "Deepfake": TARGET_AUDIO,
            "FaceSwap": TARGET_AUDIO,
            "Face2Face": SOURCE_AUDIO,
            "NeuralTextures": SOURCE_AUDIO,
        }
        for kind, origin in expected.items():
            assert plan_audio(Manipulation.parse(kind), "tgt", "src") == origin
        assert plan_audio(Manipulation.parse("None"), "tgt", None) == "own_audio"
        assert plan_audio(Manipulation.parse("Other:X"), "tgt", "src") == NO_AUDIO

        def record(i, status):
            origin = NO_AUDIO if status == UNENRICHED_NO_URL else TARGET_AUDIO
            return EnrichmentRecord(
                video_id=f"v{i}", manipulation=Manipulation.parse("Deepfake"),
                target_id="t", source_id="s", frame_range=(0, 10),
                audio_origin=origin, status=status,
            )

        records = (
            [record(i, ENRICHED) for i in range(701)]
            + [record(700 + i, UNENRICHED_BAD_MAPPING) for i in range(1, 37)]
            + [record(736 + i, UNENRICHED_NO_URL) for i in range(1, 264)]
        )
        ledger = build_ledger(records)
        assert ledger.total_sources == 1000
        assert ledger.with_url == 737
        assert ledger.bad_mapping == 36
        assert ledger.enriched == 701 == ledger.with_url - ledger.bad_mapping
        info["detail"] = "4 families mapped, ledger 737 - 36 = 701"


def test_09_augmentation_contract():
    with _criterion(9, "augmentation identity, involution, clamp, audio") as info:
        rng = np.random.default_rng(909)
        frames = rng.uniform(0.0, 1.0, size=(32, 16, 16, 3)).astype(np.float32)
        audio = rng.normal(size=48662).astype(np.float32)
        clip = Clip(video_id="v", track_id=0, start_frame=0,
                    frames=frames, audio=audio, clip_index=0)

        neutral = AugmentConfig(p_flip=0.0, hue_max_delta=0.0,
                                brightness_max_delta=0.0, scale_range=(1.0, 1.0),
                                seed=5)
        out = augment_clip(clip, neutral)
        assert out.frames.tobytes() == frames.tobytes(), "neutral config changed pixels"

        flip_only = AugmentConfig(p_flip=1.0, hue_max_delta=0.0,
                                  brightness_max_delta=0.0, scale_range=(1.0, 1.0),
                                  seed=5)
        once = augment_clip(clip, flip_only)
        assert once.frames.tobytes() != frames.tobytes()
        twice = augment_clip(once, flip_only)
        assert twice.frames.tobytes() == frames.tobytes(), "double flip is not identity"

        heavy = AugmentConfig(p_flip=0.5, hue_max_delta=0.2,
                              brightness_max_delta=32.0 / 255.0,
                              scale_range=(1.0, 1.25), seed=9)
        outputs = [augment_clip(Clip("v", 0, 0, frames, audio, clip_index=i), heavy)
                   for i in range(8)]
        for out in outputs:
            assert float(out.frames.min()) >= 0.0
            assert float(out.frames.max()) <= 1.0
            assert out.audio.tobytes() == audio.tobytes(), "audio was modified"
        info["detail"] = "bit-exact no-op and involution, 8 heavy draws clamped"


def _cli(argv, buf):
    with contextlib.redirect_stdout(buf):
        rc = cli_main(argv)
    assert rc == 0, f"{argv[0]} exited {rc}"


def _pipeline(root, seed):
    buf = io.StringIO()
    data, tracks, clips, emb, head = (root / n for n in
                                      ("data", "tracks", "clips", "emb", "head"))
    scores = root / "scores.csv"
    _cli(["synth", "scene", "--out", str(data), "--scenes", "4",
          "--seed", str(seed), "--jobs", "1"], buf)
    _cli(["track", "--manifest", str(data / "manifest.jsonl"),
          "--detections", str(data / "detections"), "--frames", str(data / "frames"),
          "--out", str(tracks), "--size", "32", "--seed", str(seed), "--jobs", "1"], buf)
    _cli(["clips", "--tracks", str(tracks), "--manifest", str(data / "manifest.jsonl"),
          "--out", str(clips), "--mode", "infer", "--clips", "2",
          "--seed", str(seed)], buf)
    _cli(["synth", "embeddings", "--out", str(emb),
          "--for-clips", str(clips / "clips.jsonl"),
          "--manifest", str(data / "manifest.jsonl"),
          "--dim-v", "8", "--dim-a", "8", "--separation", "10",
          "--seed", str(seed)], buf)
    _cli(["train-head", "--embeddings", str(emb / "embeddings.jsonl"),
          "--out", str(head), "--epochs", "12", "--seed", str(seed)], buf)
    _cli(["score", "--embeddings", str(emb / "embeddings.jsonl"),
          "--head", str(head), "--out", str(scores), "--seed", str(seed)], buf)
    _cli(["eval", "--scores", str(scores),
          "--manifest", str(data / "manifest.jsonl")], buf)
    return json.loads(buf.getvalue().strip().splitlines()[-1])


def test_10_cli_end_to_end(tmp_path):
    with _criterion(10, "CLI pipeline: AUC 1.0, deterministic artifacts") as info:
        t0 = time.perf_counter()
        first = _pipeline(tmp_path / "a", seed=0)
        assert first["auc"] == 1.0, f"end-to-end AUC {first['auc']}"

        second = _pipeline(tmp_path / "b", seed=0)
        assert second == first

        identical = []
        for rel in ("data/manifest.jsonl", "clips/clips.jsonl",
                    "emb/embeddings.jsonl", "scores.csv"):
            a = (tmp_path / "a" / rel).read_bytes()
            b = (tmp_path / "b" / rel).read_bytes()
            assert a == b, f"{rel} differs between identically seeded runs"
            identical.append(rel)
        head_a = sorted((tmp_path / "a" / "head").glob("*.ft"))
        head_b = sorted((tmp_path / "b" / "head").glob("*.ft"))
        assert head_a and len(head_a) == len(head_b)
        for pa, pb in zip(head_a, head_b):
            assert pa.read_bytes() == pb.read_bytes(), f"{pa.name} differs"

        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"took {elapsed:.2f} s"
        info["detail"] = f"AUC {first['auc']}, {len(identical) + len(head_a)} artifacts byte-identical"
