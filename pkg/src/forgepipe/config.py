"""Pipeline configuration: JSON sections with per-module defaults.

A config file is a JSON object whose sections mirror the module configs
(tracking, sampling, augment, losses, head, eval, paths). Anything omitted
falls back to the defaults below; CLI flags override file values.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .augment import AugmentConfig
from .errors import ParseError
from .sampling import TimeBase
from .tracking import TrackerConfig

DEFAULTS: dict = {
    "tracking": {
        "confidence_threshold": 0.95,
        "enlarge_factor": 1.8,
        "size_ratio_gate": [0.5, 2.0],
        "smooth_window": 5,
        "multi_face": None,
    },
    "sampling": {
        "fps": "29/1",
        "sample_rate": 44100,
        "train_clips": 8,
        "infer_clips": 9,
    },
    "augment": {
        "p_flip": 0.5,
        "hue_max_delta": 1.0 / 5.0,
        "brightness_max_delta": 32.0 / 255.0,
        "scale_range": [1.0, 1.25],
        "seed": 0,
    },
    "losses": {
        "tau": 0.07,
        "lambda_va": 1.0,
        "lambda_vt": 1.0,
        "normalize": True,
        "symmetric_negatives": True,
    },
    "head": {
        "h1": 512,
        "h2": 128,
        "lr0": 1e-5,
        "alpha": 0.95,
        "epochs": 6,
        "batch_size": 4,
    },
    "eval": {
        "threshold": 0.5,
    },
    "paths": {},
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None) -> dict:
    """Defaults deep-merged with the JSON file at `path` (if given)."""
    if path is None:
        return json.loads(json.dumps(DEFAULTS))
    try:
        user = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path}: {exc}", exc.lineno) from None
    if not isinstance(user, dict):
        raise ParseError(f"config {path}: top level must be an object", 1)
    return _merge(DEFAULTS, user)


def tracker_config(cfg: dict) -> TrackerConfig:
    section = cfg["tracking"]
    return TrackerConfig(
        confidence_threshold=section["confidence_threshold"],
        enlarge_factor=section["enlarge_factor"],
        size_ratio_gate=tuple(section["size_ratio_gate"]),
        smooth_window=section["smooth_window"],
        multi_face=section["multi_face"],
    )


def augment_config(cfg: dict, seed: int | None = None) -> AugmentConfig:
    section = cfg["augment"]
    return AugmentConfig(
        p_flip=section["p_flip"],
        hue_max_delta=section["hue_max_delta"],
        brightness_max_delta=section["brightness_max_delta"],
        scale_range=tuple(section["scale_range"]),
        seed=section["seed"] if seed is None else seed,
    )


def time_base(cfg: dict) -> TimeBase:
    section = cfg["sampling"]
    return TimeBase(fps=Fraction(section["fps"]), sample_rate=int(section["sample_rate"]))
