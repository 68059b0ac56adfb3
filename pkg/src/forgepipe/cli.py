"""Command-line pipeline driver.

One binary, many subcommands: synthetic data generation, tracking, clip
extraction, augmentation, loss evaluation, head training, scoring, metric
evaluation, and enrichment planning. Every subcommand is deterministic
given --seed; domain errors print structured JSON on stderr and exit 1,
usage errors exit 2. FORGEPIPE_LOG controls the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio
from .augment import augment_clip
from .config import augment_config, load_config, time_base, tracker_config
from .enrichment import build_ledger, enrich
from .errors import ForgepipeError, InvariantError
from .evalmetrics import accuracy, aggregate_all, filter_category, roc_auc
from .geometry import ALIGNED_SIZE, DEFAULT_REFERENCE_LANDMARKS, load_reference_landmarks
from .head import HeadParams, forward, load_head, save_head, train
from .losses import CombinedLossResult, ContrastiveBatch, combined_loss
from .rng import keyed_rng
from .sampling import CLIP_LEN, Clip, cut_clip, place_inference_clips, sample_train_clips
from .synth import (
    EmbeddingDatasetSpec,
    generate_embeddings,
    generate_scene,
    random_scene,
)
from .tracking import align_track, build_tracks, provenance_mask, smooth_track

log = logging.getLogger("forgepipe")


def _pmap(fn, items, jobs: int):
    """Map preserving input order; threaded when jobs > 1."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _write_tensor_atomic(path: Path, arr: np.ndarray) -> None:
    tmp = path.with_name(path.name + ".tmp")
    dataio.write_tensor(tmp, arr)
    os.replace(tmp, path)


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


# ---------------------------------------------------------------- synth


def cmd_synth_scene(args, cfg) -> int:
    out = Path(args.out)
    (out / "detections").mkdir(parents=True, exist_ok=True)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    (out / "truth").mkdir(parents=True, exist_ok=True)

    n_fake = round(args.scenes * args.fake_fraction)
    order = keyed_rng(args.seed, "scene-labels").permutation(args.scenes)
    fake_ids = set(int(i) for i in order[:n_fake])

    entries = []
    for i in range(args.scenes):
        spec = random_scene(args.seed, i, max_persons=args.max_persons)
        scene = generate_scene(spec)
        vid = f"scene{i:04d}"
        dataio.write_detections(out / "detections" / f"{vid}.jsonl", scene.detections)
        _write_tensor_atomic(out / "frames" / f"{vid}.ft", scene.render_all())
        truth = {
            "num_persons": scene.num_persons,
            "owners": {str(k): list(v) for k, v in scene.owners.items()},
            "centers": scene.truth_centers.tolist(),
        }
        _write_text_atomic(out / "truth" / f"{vid}.json", dataio.dumps_json(truth))
        fake = i in fake_ids
        entries.append(
            dataio.VideoManifestEntry(
                video_id=vid,
                label=dataio.LABEL_FAKE if fake else dataio.LABEL_REAL,
                manipulation=dataio.Manipulation.parse("Deepfake" if fake else "None"),
                frames_uri=f"frames/{vid}.ft",
                fps=time_base(cfg).fps,
                sample_rate=time_base(cfg).sample_rate,
                num_frames=spec.num_frames,
            )
        )
    dataio.write_manifest(out / "manifest.jsonl", entries)
    _print_json({"scenes": args.scenes, "fake": len(fake_ids), "out": str(out)})
    return 0


def cmd_synth_embeddings(args, cfg) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.for_clips:
        return _synth_embeddings_for_clips(args, out)

    spec = EmbeddingDatasetSpec(
        num_videos=args.videos,
        clips_per_video=args.clips_per_video,
        dim_v=args.dim_v,
        dim_a=args.dim_a,
        separation=args.separation,
        fake_fraction=args.fake_fraction,
        seed=args.seed,
    )
    ds = generate_embeddings(spec)
    (out / "z").mkdir(exist_ok=True)
    rows = []
    for idx, vid in enumerate(ds.video_ids):
        zv_uri = f"z/{vid}.v.ft"
        za_uri = f"z/{vid}.a.ft"
        _write_tensor_atomic(out / zv_uri, ds.z_v[idx])
        _write_tensor_atomic(out / za_uri, ds.z_a[idx])
        label = "Fake" if ds.labels[idx] == 1 else "Real"
        for c in range(spec.clips_per_video):
            rows.append(
                {
                    "video_id": vid,
                    "track_id": 0,
                    "clip_index": c,
                    "row": c,
                    "label": label,
                    "zv_uri": zv_uri,
                    "za_uri": za_uri,
                }
            )
    dataio.write_jsonl(out / "embeddings.jsonl", rows)
    _print_json({"videos": spec.num_videos, "clips": len(rows), "out": str(out)})
    return 0


def _synth_embeddings_for_clips(args, out: Path) -> int:
    """Per-clip embeddings for already-extracted clips, joined to labels.

    Stands in for the frozen backbone: each clip of a fake video draws from
    the fake-class Gaussian, real from the real-class one, at the requested
    separation. One tensor per video holds its clips' rows in manifest
    order.
    """
    clip_rows = dataio.read_jsonl(args.for_clips)
    labels = {e.video_id: e.label for e in dataio.read_manifest(args.manifest)}
    direction = keyed_rng(args.seed, "direction").normal(size=args.dim_v)
    direction /= np.linalg.norm(direction)
    offset = (args.separation / 2.0) * direction

    per_video: dict[str, list[dict]] = defaultdict(list)
    for row in clip_rows:
        per_video[row["video_id"]].append(row)

    (out / "z").mkdir(exist_ok=True)
    rows_out = []
    for vid in sorted(per_video):
        if vid not in labels:
            raise InvariantError(f"clip manifest references unknown video {vid!r}")
        fake = labels[vid] == dataio.LABEL_FAKE
        zv = np.empty((len(per_video[vid]), args.dim_v), dtype=np.float32)
        za = np.empty((len(per_video[vid]), args.dim_a), dtype=np.float32)
        for r, crow in enumerate(per_video[vid]):
            rng = keyed_rng(args.seed, f"{vid}/t{crow['track_id']}", crow["clip_index"])
            mean = offset if fake else -offset
            zv[r] = (mean + rng.normal(size=args.dim_v)).astype(np.float32)
            za[r] = rng.normal(size=args.dim_a).astype(np.float32)
            rows_out.append(
                {
                    "video_id": vid,
                    "track_id": crow["track_id"],
                    "clip_index": crow["clip_index"],
                    "row": r,
                    "label": "Fake" if fake else "Real",
                    "zv_uri": f"z/{vid}.v.ft",
                    "za_uri": f"z/{vid}.a.ft",
                }
            )
        _write_tensor_atomic(out / "z" / f"{vid}.v.ft", zv)
        _write_tensor_atomic(out / "z" / f"{vid}.a.ft", za)
    dataio.write_jsonl(out / "embeddings.jsonl", rows_out)
    _print_json({"clips": len(rows_out), "out": str(out)})
    return 0


# ---------------------------------------------------------------- track


def cmd_track(args, cfg) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = dataio.read_manifest(args.manifest)
    tcfg = tracker_config(cfg)
    if args.reference:
        reference = load_reference_landmarks(args.reference)
    else:
        reference = DEFAULT_REFERENCE_LANDMARKS * (args.size / ALIGNED_SIZE)

    def process(entry):
        detections = dataio.read_detections(Path(args.detections) / f"{entry.video_id}.jsonl")
        frames = dataio.read_tensor(Path(args.frames) / f"{entry.video_id}.ft")
        tracks = build_tracks(detections, entry.num_frames, tcfg)
        results = []
        for track in tracks:
            smoothed = smooth_track(track, tcfg.smooth_window)
            aligned = align_track(smoothed, frames, reference, (args.size, args.size))
            results.append((track, aligned))
        return entry, results

    meta_count = 0
    for entry, results in _pmap(process, entries, args.jobs):
        meta = {"video_id": entry.video_id, "num_frames": entry.num_frames, "tracks": []}
        for track, aligned in results:
            uri = f"{entry.video_id}.t{track.track_id}.ft"
            _write_tensor_atomic(out / uri, aligned)
            meta["tracks"].append(
                {
                    "track_id": track.track_id,
                    "first_frame": track.first_frame,
                    "last_frame": track.last_frame,
                    "provenance": provenance_mask(track),
                    "frames_uri": uri,
                }
            )
        _write_text_atomic(out / f"{entry.video_id}.json", dataio.dumps_json(meta))
        meta_count += 1
    _print_json({"videos": meta_count, "out": str(out)})
    return 0


# ---------------------------------------------------------------- clips


def cmd_clips(args, cfg) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tb = time_base(cfg)
    entries = {e.video_id: e for e in dataio.read_manifest(args.manifest)}
    tracks_dir = Path(args.tracks)

    rows = []
    for entry_id in sorted(entries):
        meta_path = tracks_dir / f"{entry_id}.json"
        if not meta_path.exists():
            continue
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        entry = entries[entry_id]
        audio_full = None
        if entry.audio_uri:
            audio_full = dataio.read_tensor(Path(args.manifest).parent / entry.audio_uri)
        for tmeta in meta["tracks"]:
            frames = dataio.read_tensor(tracks_dir / tmeta["frames_uri"])
            track_len = frames.shape[0]
            if args.mode == "train":
                if track_len < CLIP_LEN:
                    log.warning("skipping short track %s.t%d at train time",
                                entry_id, tmeta["track_id"])
                    continue
                rng = keyed_rng(args.seed, f"{entry_id}/t{tmeta['track_id']}")
                starts = sample_train_clips(track_len, args.clips, rng)
            else:
                starts = place_inference_clips(track_len, args.clips)
            audio_track = None
            if audio_full is not None:
                # Shift the stream so track-local frame 0 lines up with the
                # track's first absolute frame.
                first = tmeta["first_frame"]
                s0 = first * tb.sample_rate * tb.fps.denominator // tb.fps.numerator
                audio_track = audio_full[s0:]
            for ci, start in enumerate(starts):
                clip = cut_clip(
                    frames,
                    audio_track,
                    start,
                    tb,
                    video_id=entry_id,
                    track_id=tmeta["track_id"],
                    clip_index=ci,
                )
                frames_uri = f"{entry_id}.t{tmeta['track_id']}.c{ci}.ft"
                _write_tensor_atomic(out / frames_uri, clip.frames)
                audio_uri = None
                if clip.audio is not None:
                    audio_uri = f"{entry_id}.t{tmeta['track_id']}.c{ci}.audio.ft"
                    _write_tensor_atomic(out / audio_uri, clip.audio)
                rows.append(
                    {
                        "video_id": entry_id,
                        "track_id": tmeta["track_id"],
                        "clip_index": ci,
                        "start_frame": int(start),
                        "abs_start_frame": int(tmeta["first_frame"] + start),
                        "frames_uri": frames_uri,
                        "audio_uri": audio_uri,
                    }
                )
    dataio.write_jsonl(out / "clips.jsonl", rows)
    _print_json({"clips": len(rows), "out": str(out)})
    return 0


# ---------------------------------------------------------------- augment


def cmd_augment(args, cfg) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    acfg = augment_config(cfg, seed=args.seed)
    rows = dataio.read_jsonl(args.clips)
    clips_dir = Path(args.clips).parent

    rows_out = []
    for row in rows:
        frames = dataio.read_tensor(clips_dir / row["frames_uri"])
        audio = dataio.read_tensor(clips_dir / row["audio_uri"]) if row.get("audio_uri") else None
        clip = Clip(
            video_id=row["video_id"],
            track_id=row["track_id"],
            start_frame=row["start_frame"],
            frames=frames,
            audio=audio,
            clip_index=row["clip_index"],
        )
        augmented = augment_clip(clip, acfg)
        frames_uri = f"aug.{row['frames_uri']}"
        _write_tensor_atomic(out / frames_uri, augmented.frames)
        new_row = dict(row)
        new_row["frames_uri"] = frames_uri
        # Audio is untouched by augmentation; keep pointing at the original.
        rows_out.append(new_row)
    dataio.write_jsonl(out / "clips.jsonl", rows_out)
    _print_json({"clips": len(rows_out), "out": str(out)})
    return 0


# ---------------------------------------------------------------- losses


def cmd_loss_eval(args, cfg) -> int:
    spec = json.loads(Path(args.batch).read_text(encoding="utf-8"))
    base = Path(args.batch).parent
    section = cfg["losses"]
    zt = None
    if spec.get("zt"):
        zt = tuple(dataio.read_tensor(base / uri) for uri in spec["zt"])
    batch = ContrastiveBatch(
        zv=dataio.read_tensor(base / spec["zv"]),
        za=dataio.read_tensor(base / spec["za"]),
        zt=zt,
        tau=spec.get("tau", section["tau"]),
        lambda_va=spec.get("lambda_va", section["lambda_va"]),
        lambda_vt=spec.get("lambda_vt", section["lambda_vt"]),
        normalize=spec.get("normalize", section["normalize"]),
        symmetric_negatives=spec.get("symmetric_negatives", section["symmetric_negatives"]),
    )
    result: CombinedLossResult = combined_loss(batch)
    if args.grad_out:
        gout = Path(args.grad_out)
        gout.mkdir(parents=True, exist_ok=True)
        _write_tensor_atomic(gout / "grad_zv.ft", result.grad_zv.astype(np.float32))
        _write_tensor_atomic(gout / "grad_za.ft", result.grad_za.astype(np.float32))
        if result.grad_zt is not None:
            for i, g in enumerate(result.grad_zt):
                _write_tensor_atomic(gout / f"grad_zt{i}.ft", g.astype(np.float32))
    _print_json({"loss": result.loss, "k": batch.k})
    return 0


# ---------------------------------------------------------------- head


def _load_examples(manifest_path: str):
    rows = dataio.read_jsonl(manifest_path)
    base = Path(manifest_path).parent
    cache: dict[str, np.ndarray] = {}

    def tensor(uri: str) -> np.ndarray:
        if uri not in cache:
            cache[uri] = dataio.read_tensor(base / uri)
        return cache[uri]

    xs = []
    ys = []
    keys = []
    for row in rows:
        zv = tensor(row["zv_uri"])[row["row"]]
        if row.get("za_uri"):
            x = np.concatenate([zv, tensor(row["za_uri"])[row["row"]]])
        else:
            x = zv
        xs.append(x)
        ys.append(1 if row["label"] == "Fake" else 0)
        keys.append((row["video_id"], row["track_id"], row["clip_index"]))
    if not xs:
        raise InvariantError(f"no rows in embeddings manifest {manifest_path}")
    return np.stack(xs), np.asarray(ys, dtype=np.int64), keys


def cmd_train_head(args, cfg) -> int:
    section = cfg["head"]
    x, y, _ = _load_examples(args.embeddings)
    result = train(
        x,
        y,
        epochs=args.epochs if args.epochs is not None else section["epochs"],
        batch_size=args.batch_size if args.batch_size is not None else section["batch_size"],
        lr0=section["lr0"],
        alpha=section["alpha"],
        h1=section["h1"],
        h2=section["h2"],
        seed=args.seed,
    )
    save_head(result.params, args.out)
    summary = {
        "examples": int(x.shape[0]),
        "d_in": int(x.shape[1]),
        "steps": int(result.lr_trace.shape[0]),
        "lr_first": result.lr_trace[0],
        "lr_last": result.lr_trace[-1],
        "epoch_losses": result.epoch_losses,
        "final_loss": result.final_loss,
    }
    _write_text_atomic(Path(args.out) / "training.json", dataio.dumps_json(summary))
    _print_json(summary)
    return 0


def cmd_score(args, cfg) -> int:
    params: HeadParams = load_head(args.head)
    x, _, keys = _load_examples(args.embeddings)
    _, scores = forward(params, x)
    records = [
        dataio.ScoreRecord(video_id=vid, track_id=tid, clip_index=cidx, score=float(s))
        for (vid, tid, cidx), s in zip(keys, scores)
    ]
    dataio.write_scores(args.out, records)
    _print_json({"scored": len(records), "out": args.out})
    return 0


# ---------------------------------------------------------------- eval


def cmd_eval(args, cfg) -> int:
    records = dataio.read_scores(args.scores)
    entries = {e.video_id: e for e in dataio.read_manifest(args.manifest)}
    labels = {vid: e.label for vid, e in entries.items()}
    verdicts = aggregate_all(records, labels)
    n_total = len(verdicts)
    if args.exclude_tag:
        verdicts = filter_category(
            verdicts, entries, lambda e: args.exclude_tag in e.tags
        )
    result = {
        "auc": roc_auc(verdicts),
        "accuracy": accuracy(verdicts, cfg["eval"]["threshold"]),
        "n_videos": len(verdicts),
        "n_excluded": n_total - len(verdicts),
    }
    _print_json(result)
    return 0


# ---------------------------------------------------------------- enrich


def cmd_enrich_plan(args, cfg) -> int:
    out = Path(args.out)
    (out / "audio").mkdir(parents=True, exist_ok=True)
    rows = dataio.read_jsonl(args.spec)
    audio_dir = Path(args.audio_dir) if args.audio_dir else Path(args.spec).parent

    def fetch(uri: str):
        path = audio_dir / uri
        if not path.exists():
            return None
        return dataio.read_tensor(path)

    records, buffers = enrich(rows, fetch, time_base(cfg))
    out_rows = []
    for record, audio in zip(records, buffers):
        audio_uri = None
        if audio is not None:
            audio_uri = f"audio/{record.video_id}.ft"
            _write_tensor_atomic(out / audio_uri, audio)
        out_rows.append(
            {
                "video_id": record.video_id,
                "manipulation": str(record.manipulation),
                "target_id": record.target_id,
                "source_id": record.source_id,
                "frame_range": list(record.frame_range),
                "audio_origin": record.audio_origin,
                "status": record.status,
                "audio_uri": audio_uri,
            }
        )
    dataio.write_jsonl(out / "enriched.jsonl", out_rows)
    ledger = build_ledger(records)
    _write_text_atomic(out / "ledger.json", dataio.dumps_json(ledger.to_json()))
    _print_json(ledger.to_json())
    return 0


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads for per-video stages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgepipe",
        description="Face-forgery detection pipeline: tracking, clips, "
                    "contrastive losses, classifier head, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate synthetic scenes or embeddings")
    synth_sub = p_synth.add_subparsers(dest="what", required=True)

    p_scene = synth_sub.add_parser("scene", help="synthetic tracking scenes with ground truth")
    _add_common(p_scene)
    p_scene.add_argument("--out", required=True)
    p_scene.add_argument("--scenes", type=int, default=10)
    p_scene.add_argument("--max-persons", type=int, default=3)
    p_scene.add_argument("--fake-fraction", type=float, default=0.5)
    p_scene.set_defaults(func=cmd_synth_scene)

    p_emb = synth_sub.add_parser("embeddings", help="two-class Gaussian clip embeddings")
    _add_common(p_emb)
    p_emb.add_argument("--out", required=True)
    p_emb.add_argument("--videos", type=int, default=100)
    p_emb.add_argument("--clips-per-video", type=int, default=9)
    p_emb.add_argument("--dim-v", type=int, default=64)
    p_emb.add_argument("--dim-a", type=int, default=64)
    p_emb.add_argument("--separation", type=float, default=10.0)
    p_emb.add_argument("--fake-fraction", type=float, default=0.5)
    p_emb.add_argument("--for-clips", help="clip manifest; draw one embedding per clip")
    p_emb.add_argument("--manifest", help="video manifest for labels (with --for-clips)")
    p_emb.set_defaults(func=cmd_synth_embeddings)

    p_track = sub.add_parser("track", help="associate detections into aligned face tracks")
    _add_common(p_track)
    p_track.add_argument("--manifest", required=True)
    p_track.add_argument("--detections", required=True, help="dir of <video_id>.jsonl files")
    p_track.add_argument("--frames", required=True, help="dir of <video_id>.ft frame tensors")
    p_track.add_argument("--out", required=True)
    p_track.add_argument("--size", type=int, default=ALIGNED_SIZE,
                         help="aligned crop size in pixels")
    p_track.add_argument("--reference", help="reference landmarks JSON")
    p_track.set_defaults(func=cmd_track)

    p_clips = sub.add_parser("clips", help="cut 32-frame clips from aligned tracks")
    _add_common(p_clips)
    p_clips.add_argument("--tracks", required=True)
    p_clips.add_argument("--manifest", required=True)
    p_clips.add_argument("--out", required=True)
    p_clips.add_argument("--mode", choices=("train", "infer"), default="infer")
    p_clips.add_argument("--clips", type=int, default=9,
                         help="clips per track (max at inference)")
    p_clips.set_defaults(func=cmd_clips)

    p_aug = sub.add_parser("augment", help="augment extracted clips")
    _add_common(p_aug)
    p_aug.add_argument("--clips", required=True, help="clips.jsonl manifest")
    p_aug.add_argument("--out", required=True)
    p_aug.set_defaults(func=cmd_augment)

    p_loss = sub.add_parser("loss-eval", help="evaluate the contrastive loss on a batch")
    _add_common(p_loss)
    p_loss.add_argument("--batch", required=True, help="batch spec JSON")
    p_loss.add_argument("--grad-out", help="directory for gradient tensors")
    p_loss.set_defaults(func=cmd_loss_eval)

    p_train = sub.add_parser("train-head", help="train the classification head")
    _add_common(p_train)
    p_train.add_argument("--embeddings", required=True, help="embeddings.jsonl manifest")
    p_train.add_argument("--out", required=True, help="head bundle directory")
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--batch-size", type=int)
    p_train.set_defaults(func=cmd_train_head)

    p_score = sub.add_parser("score", help="score clips with a trained head")
    _add_common(p_score)
    p_score.add_argument("--embeddings", required=True)
    p_score.add_argument("--head", required=True, help="head bundle directory")
    p_score.add_argument("--out", required=True, help="score CSV path")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", help="video-level ROC-AUC and accuracy")
    _add_common(p_eval)
    p_eval.add_argument("--scores", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--exclude-tag", help="drop videos carrying this manifest tag")
    p_eval.set_defaults(func=cmd_eval)

    p_enrich = sub.add_parser("enrich-plan", help="plan audio enrichment and build the ledger")
    _add_common(p_enrich)
    p_enrich.add_argument("--spec", required=True, help="enrichment spec JSONL")
    p_enrich.add_argument("--audio-dir", help="directory holding origin audio tensors")
    p_enrich.add_argument("--out", required=True)
    p_enrich.set_defaults(func=cmd_enrich_plan)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("FORGEPIPE_LOG", "WARNING").upper(),
                      logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = load_config(args.config)
    try:
        return args.func(args, cfg)
    except ForgepipeError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": "file_not_found", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
