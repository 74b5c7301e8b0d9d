"""Eye-screen rendering and the expression state machine.

The screen raster covers the physical eye display (screen_width x
screen_height meters at pixels_per_meter), viewed from in front of the
robot: raster x grows toward the robot's left (the viewer's right), raster
y grows downward. A screen-plane point (u, v) — u toward the robot's left,
v up, meters — lands at pixel (W/2 + u*ppm, H/2 - v*ppm).

Rendering is deterministic numpy disc-painting; no randomized or
library-version-dependent rasterization is involved, so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import MissingMirrorInput
from .kinematics import HeadGeometry, clamp_pupil_to_screen
from .mirror import OverlayFilters, composite, flash_envelope

__all__ = [
    "MODES",
    "DEFAULT_IRIS_COLOR",
    "LISTENING_COLOR",
    "ExpressionState",
    "EyeFrame",
    "render_eyes",
    "step_expression",
    "frame_to_png_bytes",
]

MODES = frozenset({
    "neutral", "small_pupil", "positive", "negative",
    "closed", "loading", "color_coded", "mirror",
})

BACKGROUND_COLOR = (12, 12, 16)
DEFAULT_IRIS_COLOR = (86, 155, 210)
PUPIL_COLOR = (8, 8, 8)
LID_COLOR = (120, 120, 126)
LISTENING_COLOR = (64, 200, 96)

RING_RATE_HZ = 1.0          # loading spinner revolutions per second
SMILE_DURATION = 2.0        # seconds the positive expression holds after success
REGISTRATION_DEBOUNCE = 1.0  # seconds before the same entity may flash again
SMALL_PUPIL_FACTOR = 0.5


@dataclass
class ExpressionState:
    """Current expressive state of the eye display.

    ``mode`` is the externally requested base mode; transient conditions
    (a success smile, active processing) override it via
    :meth:`current_mode` without losing the base. ``right_mode`` /
    ``left_mode`` override a single eye.
    """

    mode: str = "neutral"
    iris_color: tuple[int, int, int] = DEFAULT_IRIS_COLOR
    ring_phase: float = 0.0
    listening: bool = False
    right_mode: str | None = None
    left_mode: str | None = None
    smile_remaining: float = 0.0
    processing: bool = False
    flash_time: float | None = None
    registered: dict[str, float] = field(default_factory=dict)
    clock: float = 0.0

    def __post_init__(self):
        for m in (self.mode, self.right_mode, self.left_mode):
            if m is not None and m not in MODES:
                raise ValueError(f"unknown expression mode {m!r}")
        if not 0.0 <= self.ring_phase < 2.0 * math.pi:
            raise ValueError("ring_phase must lie in [0, 2*pi)")

    def current_mode(self, side: str | None = None) -> str:
        """Mode actually in effect, resolving per-eye overrides and
        transient smile/processing states."""
        override = {"right": self.right_mode, "left": self.left_mode}.get(side)
        if override is not None:
            return override
        if self.smile_remaining > 0.0:
            return "positive"
        if self.processing:
            return "loading"
        return self.mode


@dataclass
class EyeFrame:
    """One rendered eye-screen image plus the geometry it was drawn with."""

    raster: np.ndarray
    pupil_centers_px: tuple[tuple[float, float], tuple[float, float]]
    iris_radius_px: float
    pupil_radius_px: float
    expression: ExpressionState
    mirror_enabled: bool


def _disc(raster, cx, cy, r, color):
    h, w = raster.shape[:2]
    x0 = max(0, int(math.floor(cx - r)))
    x1 = min(w, int(math.ceil(cx + r)) + 1)
    y0 = max(0, int(math.floor(cy - r)))
    y1 = min(h, int(math.ceil(cy + r)) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    mask = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= r * r
    block = raster[y0:y1, x0:x1]
    block[mask, 0] = color[0]
    block[mask, 1] = color[1]
    block[mask, 2] = color[2]


def _half_cover(raster, cx, cy, r, lower: bool):
    """Paint background over one vertical half of the iris disc, leaving an
    arc: the upper half survives for the positive lid, the lower for the
    negative one."""
    h, w = raster.shape[:2]
    x0 = max(0, int(math.floor(cx - r)))
    x1 = min(w, int(math.ceil(cx + r)) + 1)
    y0 = max(0, int(math.floor(cy - r)))
    y1 = min(h, int(math.ceil(cy + r)) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    dy = ys + 0.5 - cy
    inside = (xs + 0.5 - cx) ** 2 + dy ** 2 <= r * r
    mask = inside & (dy >= 0 if lower else dy < 0)
    block = raster[y0:y1, x0:x1]
    for c in range(3):
        block[mask, c] = BACKGROUND_COLOR[c]


def _loading_arcs(raster, cx, cy, r_inner, r_outer, phase, color):
    h, w = raster.shape[:2]
    x0 = max(0, int(math.floor(cx - r_outer)))
    x1 = min(w, int(math.ceil(cx + r_outer)) + 1)
    y0 = max(0, int(math.floor(cy - r_outer)))
    y1 = min(h, int(math.ceil(cy + r_outer)) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    dx = xs + 0.5 - cx
    dy = -(ys + 0.5 - cy)  # raster y is down; measure angles with y up
    d2 = dx * dx + dy * dy
    ring = (d2 >= r_inner * r_inner) & (d2 <= r_outer * r_outer)
    theta = np.mod(np.arctan2(dy, dx) - phase, 2.0 * math.pi)
    # three 60-degree segments spaced evenly
    seg = math.pi / 3.0
    lit = ((theta < seg)
           | ((theta >= 2 * seg) & (theta < 3 * seg))
           | ((theta >= 4 * seg) & (theta < 5 * seg)))
    mask = ring & lit
    block = raster[y0:y1, x0:x1]
    for c in range(3):
        block[mask, c] = color[c]


def _lid_line(raster, cx, cy, half_width, color):
    h, w = raster.shape[:2]
    y0 = max(0, int(round(cy)) - 1)
    y1 = min(h, int(round(cy)) + 1)
    x0 = max(0, int(round(cx - half_width)))
    x1 = min(w, int(round(cx + half_width)))
    raster[y0:y1, x0:x1, 0] = color[0]
    raster[y0:y1, x0:x1, 1] = color[1]
    raster[y0:y1, x0:x1, 2] = color[2]


def render_eyes(pupil_screen: np.ndarray,
                expr: ExpressionState,
                geom: HeadGeometry,
                mirror_imgs=None,
                filters: OverlayFilters | None = None) -> EyeFrame:
    """Render the eye screen for one tick.

    ``pupil_screen`` holds the kinematic screen-plane pupil positions in
    meters, right eye first; positions are clamped to the visible screen
    here (the solver reports them unclamped), and non-finite positions fall
    back to each eye's rest point. In mirror mode ``mirror_imgs`` supplies
    the two horizontally flipped camera patches (right, left) and
    ``filters`` controls their blending; a registration flash in
    ``expr.flash_time`` temporarily raises the exposure toward
    ``filters.exposure_gain``.
    """
    w_px = int(round(geom.screen_width * geom.pixels_per_meter))
    h_px = int(round(geom.screen_height * geom.pixels_per_meter))
    iris_r = geom.iris_radius * geom.pixels_per_meter
    pupil_r = geom.pupil_radius * geom.pixels_per_meter

    pupils = np.array(pupil_screen, dtype=float).reshape(2, 2).copy()
    rest_u = (-geom.eye_half_spacing, geom.eye_half_spacing)
    for i in range(2):
        if not np.all(np.isfinite(pupils[i])):
            pupils[i] = (rest_u[i], 0.0)
    pupils = clamp_pupil_to_screen(pupils, geom)

    modes = (expr.current_mode("right"), expr.current_mode("left"))
    if "mirror" in modes and mirror_imgs is None:
        raise MissingMirrorInput("mirror mode requires two pupil images")
    if filters is None:
        filters = OverlayFilters()

    raster = np.empty((h_px, w_px, 4), np.uint8)
    raster[..., 0] = BACKGROUND_COLOR[0]
    raster[..., 1] = BACKGROUND_COLOR[1]
    raster[..., 2] = BACKGROUND_COLOR[2]
    raster[..., 3] = 255

    iris_color = LISTENING_COLOR if expr.listening else expr.iris_color
    centers = []
    for i in range(2):
        u, v = pupils[i]
        cx = w_px / 2.0 + u * geom.pixels_per_meter
        cy = h_px / 2.0 - v * geom.pixels_per_meter
        centers.append((cx, cy))
        mode = modes[i]

        if mode == "closed":
            _lid_line(raster, cx, cy, iris_r, LID_COLOR)
            continue
        if mode == "loading":
            _loading_arcs(raster, cx, cy, pupil_r, iris_r, expr.ring_phase,
                          iris_color)
            continue

        _disc(raster, cx, cy, iris_r, iris_color)
        r_p = pupil_r * SMALL_PUPIL_FACTOR if mode == "small_pupil" else pupil_r
        _disc(raster, cx, cy, r_p, PUPIL_COLOR)

        if mode == "mirror":
            gain = 1.0
            if expr.flash_time is not None:
                gain = max(1.0, flash_envelope(expr.flash_time, filters))
            active = dataclasses.replace(filters, exposure_gain=gain)
            patched = composite(raster, mirror_imgs[i], active,
                                pupil_center=(cx, cy), pupil_radius=r_p)
            raster[...] = patched
        elif mode == "positive":
            _half_cover(raster, cx, cy, iris_r, lower=True)
        elif mode == "negative":
            _half_cover(raster, cx, cy, iris_r, lower=False)

    return EyeFrame(raster=raster,
                    pupil_centers_px=(centers[0], centers[1]),
                    iris_radius_px=iris_r,
                    pupil_radius_px=pupil_r,
                    expression=expr,
                    mirror_enabled="mirror" in modes)


def step_expression(expr: ExpressionState, dt: float, events=()) -> ExpressionState:
    """Advance the expression machine one tick and apply events.

    Recognized events: ``listening_on``/``listening_off``, ``success``
    (positive expression for 2 s), ``processing_on``/``processing_off``
    (loading spinner), and ``("registration", entity_id)`` which starts the
    mirror flash unless the same entity flashed less than a second ago.
    Unknown events are ignored. The input state is not modified.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    clock = expr.clock + dt
    ring_phase = math.fmod(expr.ring_phase + 2.0 * math.pi * RING_RATE_HZ * dt,
                           2.0 * math.pi)
    smile = max(0.0, expr.smile_remaining - dt)
    flash = None if expr.flash_time is None else expr.flash_time + dt
    registered = dict(expr.registered)
    listening = expr.listening
    processing = expr.processing

    for ev in events:
        kind, payload = ev if isinstance(ev, tuple) else (ev, None)
        if kind == "listening_on":
            listening = True
        elif kind == "listening_off":
            listening = False
        elif kind == "success":
            smile = SMILE_DURATION
        elif kind == "processing_on":
            processing = True
        elif kind == "processing_off":
            processing = False
        elif kind == "registration":
            entity = payload or ""
            last = registered.get(entity)
            if last is None or clock - last >= REGISTRATION_DEBOUNCE:
                registered[entity] = clock
                flash = 0.0
        # anything else: ignore

    return dataclasses.replace(
        expr, clock=clock, ring_phase=ring_phase, smile_remaining=smile,
        flash_time=flash, registered=registered, listening=listening,
        processing=processing)


def frame_to_png_bytes(frame: EyeFrame) -> bytes:
    """Encode the raster as PNG (lossless) for recording and golden tests."""
    bgra = frame.raster[..., [2, 1, 0, 3]]
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(bgra))
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return bytes(buf)
