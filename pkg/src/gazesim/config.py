"""Runtime configuration: one JSON-loadable object bundling every tunable
the simulator exposes, with validation.

Schema (all sections optional; omitted fields keep their defaults):

.. code-block:: json

    {
      "tick_rate": 50,
      "stop_keywords": ["stop", "halt", "wait"],
      "geometry": {"screen_distance": 0.10, "eye_half_spacing": 0.05},
      "ik": {"task_gain": 6.0, "rest_gain": 8.0, "damping": 0.001},
      "filters": {"opacity": 0.8, "exposure_gain": 2.5},
      "camera": {"position": [0, 0, 1.2], "view": [1, 0, -1], "focal": 800},
      "timeline": {"onset": 0.0, "gaze_pick": 0.5}
    }
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .kinematics import HeadGeometry, IKParams
from .mirror import OverlayFilters
from .scene import TIMELINE, SyntheticCamera, default_camera

__all__ = ["SimConfig", "default_config", "load_config", "validate_config",
           "config_to_dict"]

DEFAULT_STOP_KEYWORDS = frozenset({"stop", "halt", "wait"})

# the canonical schedule keys, in the order they must occur
_TIMELINE_ORDER = tuple(TIMELINE)


@dataclass
class SimConfig:
    """Everything the gateway needs to run one simulation."""

    geometry: HeadGeometry = field(default_factory=HeadGeometry)
    ik: IKParams = field(default_factory=IKParams)
    filters: OverlayFilters = field(default_factory=OverlayFilters)
    camera: SyntheticCamera = field(default_factory=default_camera)
    timeline: dict = field(default_factory=lambda: dict(TIMELINE))
    tick_rate: float = 50.0
    stop_keywords: frozenset = DEFAULT_STOP_KEYWORDS

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


def default_config() -> SimConfig:
    return SimConfig()


def _merge_section(cls, defaults, overrides: dict, section: str):
    """Rebuild a dataclass with some fields replaced, rejecting unknown keys."""
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - names
    if unknown:
        raise ValueError(f"unknown key(s) in config section {section!r}: "
                         f"{sorted(unknown)}")
    coerced = {}
    for key, value in overrides.items():
        coerced[key] = tuple(value) if isinstance(value, list) else value
    return dataclasses.replace(defaults, **coerced)


def load_config(source=None) -> SimConfig:
    """Build a validated config from a JSON file path, an already-parsed
    dict, or nothing (defaults). Raises ValueError on unknown keys or any
    invariant violation."""
    if source is None:
        data = {}
    elif isinstance(source, dict):
        data = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config root must be a JSON object")

    known = {"geometry", "ik", "filters", "camera", "timeline",
             "tick_rate", "stop_keywords"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")

    cfg = default_config()
    if "geometry" in data:
        cfg.geometry = _merge_section(HeadGeometry, cfg.geometry,
                                      data["geometry"], "geometry")
    if "ik" in data:
        cfg.ik = _merge_section(IKParams, cfg.ik, data["ik"], "ik")
    if "filters" in data:
        cfg.filters = _merge_section(OverlayFilters, cfg.filters,
                                     data["filters"], "filters")
    if "camera" in data:
        cfg.camera = _merge_section(SyntheticCamera, cfg.camera,
                                    data["camera"], "camera")
    if "timeline" in data:
        cfg.timeline = {k: float(v) for k, v in data["timeline"].items()}
    if "tick_rate" in data:
        cfg.tick_rate = float(data["tick_rate"])
    if "stop_keywords" in data:
        words = data["stop_keywords"]
        if (not isinstance(words, (list, tuple)) or not words
                or not all(isinstance(w, str) and w.strip() for w in words)):
            raise ValueError("stop_keywords must be a non-empty list of words")
        cfg.stop_keywords = frozenset(w.strip().lower() for w in words)

    validate_config(cfg)
    return cfg


def validate_config(cfg: SimConfig) -> None:
    """Check cross-field invariants; nested objects validate themselves at
    construction. Raises ValueError with a readable diagnostic."""
    if not cfg.tick_rate >= 30.0:
        raise ValueError(f"tick_rate must be at least 30 Hz, got {cfg.tick_rate}")
    if cfg.ik.dt <= 0:
        raise ValueError("ik.dt must be positive")

    missing = set(_TIMELINE_ORDER) - set(cfg.timeline)
    extra = set(cfg.timeline) - set(_TIMELINE_ORDER)
    if missing or extra:
        raise ValueError(f"timeline must define exactly {list(_TIMELINE_ORDER)}"
                         f" (missing {sorted(missing)}, extra {sorted(extra)})")
    if cfg.timeline["onset"] != 0.0:
        raise ValueError("timeline onset must be 0")
    times = [cfg.timeline[k] for k in _TIMELINE_ORDER]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("timeline times must be strictly increasing")

    if cfg.camera.focal <= 0:
        raise ValueError("camera focal length must be positive")
    w, h = cfg.camera.resolution
    if int(w) <= 0 or int(h) <= 0:
        raise ValueError("camera resolution must be positive")
    if not cfg.stop_keywords:
        raise ValueError("stop_keywords must not be empty")


def config_to_dict(cfg: SimConfig) -> dict:
    """JSON-ready representation (tuples become lists, sets become sorted
    lists); round-trips through :func:`load_config`."""
    def plain(obj):
        out = {}
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            if isinstance(v, tuple):
                v = [x if isinstance(x, int) else float(x) for x in v]
            out[f.name] = v
        return out

    return {
        "geometry": plain(cfg.geometry),
        "ik": plain(cfg.ik),
        "filters": plain(cfg.filters),
        "camera": plain(cfg.camera),
        "timeline": dict(cfg.timeline),
        "tick_rate": cfg.tick_rate,
        "stop_keywords": sorted(cfg.stop_keywords),
    }
