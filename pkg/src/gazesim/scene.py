"""Tabletop scene, synthetic overhead camera, and the timed pick-and-place
action with continuous-time interruption.

World frame: origin at the neck pan axis, x forward across the table, y to
the robot's left, z up, meters. The tabletop sits below the head at
``table_height``. The camera looks down-forward over the table and feeds
the mirror pipeline; its image uses the usual computer-vision convention
(x right, y down, z forward in camera coordinates).

The pick-and-place action runs on a fixed schedule relative to function
onset, identical in every trial. Events are stamped with their scheduled
times — never the tick time that happened to observe them — so event logs
are bit-identical across tick rates, runs, and display conditions.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCamera, UnknownEntity
from .mirror import CameraFrame, RegionOfInterest

__all__ = [
    "TABLE_COLOR",
    "TIMELINE",
    "PLACE_DOWN_DURATION",
    "LIFT_HEIGHT",
    "SceneObject",
    "Scene",
    "SyntheticCamera",
    "ArmAction",
    "default_scene",
    "default_camera",
    "project",
    "render_camera",
    "roi_for",
    "step_action",
    "held_object_position",
]

TABLE_COLOR = (110, 105, 98)

# Scheduled event times in seconds since function onset. The same schedule
# runs in every trial and both display conditions; only a stop command can
# cut it short.
TIMELINE = {
    "onset": 0.0,
    "gaze_pick": 0.5,
    "reach_start": 2.0,
    "gaze_place": 3.5,
    "grasped": 5.0,
    "transport_start": 9.0,
    "over_plate": 13.5,
    "released": 16.0,
    "completed": 20.0,
}

PLACE_DOWN_DURATION = 1.5   # seconds to set a held object down after a stop
LIFT_HEIGHT = 0.15          # how high a grasped object is carried
_LIFT_TIME = 1.0            # seconds spent lifting after the grasp


@dataclass(eq=False)
class SceneObject:
    """One scene entity. ``position`` is mutable runtime state (the arm can
    carry the object); ``home_position`` keeps the layout pose the action
    profile interpolates from."""

    id: str
    label: str
    color: tuple[int, int, int]
    shape: str  # cylinder | plate | person
    position: np.ndarray
    graspable: bool
    radius: float = 0.05
    inner_radius: float | None = None
    height: float | None = None
    blur_on_mirror: bool = False

    def __post_init__(self):
        if self.shape not in ("cylinder", "plate", "person"):
            raise ValueError(f"unknown shape {self.shape!r}")
        self.position = np.asarray(self.position, dtype=float).reshape(3).copy()
        self.home_position = self.position.copy()


@dataclass
class Scene:
    """Entity collection plus the table plane they stand on."""

    objects: list[SceneObject]
    table_height: float = -0.25

    def __post_init__(self):
        labels = [o.label for o in self.objects]
        if len(set(labels)) != len(labels):
            raise ValueError("scene labels must be unique")
        for obj in self.objects:
            if obj.shape == "plate" and obj.graspable:
                raise ValueError(f"plate {obj.id!r} cannot be graspable")
            if obj.shape == "person" and not obj.blur_on_mirror:
                raise ValueError(f"person {obj.id!r} must be blurred on mirror")
        self.by_id = {o.id: o for o in self.objects}
        if len(self.by_id) != len(self.objects):
            raise ValueError("scene ids must be unique")

    def clone(self) -> "Scene":
        return copy.deepcopy(self)


def default_scene() -> Scene:
    """Study layout: two plates, two graspable containers, one person across
    the table."""
    table = -0.25
    return Scene(objects=[
        SceneObject(id="red_bottle", label="red bottle", color=(178, 34, 34),
                    shape="cylinder", position=np.array([0.45, 0.10, table]),
                    graspable=True, radius=0.035),
        SceneObject(id="spray_can", label="spray can", color=(128, 60, 160),
                    shape="cylinder", position=np.array([0.45, -0.10, table]),
                    graspable=True, radius=0.03),
        SceneObject(id="red_plate", label="red plate", color=(200, 40, 40),
                    shape="plate", position=np.array([0.55, 0.25, table]),
                    graspable=False, radius=0.11, inner_radius=0.077),
        SceneObject(id="white_plate", label="white plate", color=(235, 235, 235),
                    shape="plate", position=np.array([0.55, -0.25, table]),
                    graspable=False, radius=0.11, inner_radius=0.077),
        SceneObject(id="person", label="person", color=(70, 90, 140),
                    shape="person", position=np.array([1.5, 0.0, 0.3]),
                    graspable=False, radius=0.20, height=0.35,
                    blur_on_mirror=True),
    ], table_height=table)


@dataclass
class SyntheticCamera:
    """Pinhole camera: world pose plus intrinsics."""

    position: tuple[float, float, float]
    view: tuple[float, float, float]
    focal: float = 800.0
    principal: tuple[float, float] = (960.0, 540.0)
    resolution: tuple[int, int] = (1920, 1080)

    def __post_init__(self):
        v = np.asarray(self.view, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("view direction must be nonzero")
        if abs(n - 1.0) > 1e-12:  # idempotent: keep already-unit vectors bitwise
            v = v / n
        self.view = tuple(float(x) for x in v)

    def basis(self):
        """Right-handed camera basis: x right, y down, z forward."""
        z = np.asarray(self.view)
        up = np.array([0.0, 0.0, 1.0])
        x = np.cross(z, up)
        nx = np.linalg.norm(x)
        if nx < 1e-12:
            # camera pointing straight up/down: pick world x as image right
            x = np.array([1.0, 0.0, 0.0])
            nx = 1.0
        x = x / nx
        y = np.cross(z, x)
        return x, y / np.linalg.norm(y), z


def default_camera() -> SyntheticCamera:
    """Overhead camera 1.2 m above the neck base, pitched 45 degrees down
    over the table."""
    return SyntheticCamera(position=(0.0, 0.0, 1.2), view=(1.0, 0.0, -1.0))


MIN_DEPTH = 0.1


def _camera_point(camera: SyntheticCamera, world_point) -> np.ndarray:
    d = np.asarray(world_point, dtype=float) - np.asarray(camera.position)
    x, y, z = camera.basis()
    return np.array([d @ x, d @ y, d @ z])


def project(camera: SyntheticCamera, world_point) -> tuple[float, float]:
    """Pinhole projection of a world point to image pixels."""
    X, Y, Z = _camera_point(camera, world_point)
    if Z <= MIN_DEPTH:
        raise BehindCamera(f"point at depth {Z:.3f} m is not projectable")
    return (camera.focal * X / Z + camera.principal[0],
            camera.focal * Y / Z + camera.principal[1])


def _paint_disc(pixels, cx, cy, r, color, r_inner=0.0, ry=None):
    h, w = pixels.shape[:2]
    rr = r if ry is None else max(r, ry)
    x0 = max(0, int(math.floor(cx - r)))
    x1 = min(w, int(math.ceil(cx + r)) + 1)
    y0 = max(0, int(math.floor(cy - rr)))
    y1 = min(h, int(math.ceil(cy + rr)) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    dx = xs + 0.5 - cx
    dy = ys + 0.5 - cy
    if ry is None:
        d2 = dx * dx + dy * dy
        mask = d2 <= r * r
        if r_inner > 0:
            mask &= d2 >= r_inner * r_inner
    else:
        mask = (dx / r) ** 2 + (dy / ry) ** 2 <= 1.0
    block = pixels[y0:y1, x0:x1]
    block[mask, 0] = color[0]
    block[mask, 1] = color[1]
    block[mask, 2] = color[2]


def render_camera(scene: Scene, camera: SyntheticCamera,
                  frame_id: int = 0) -> CameraFrame:
    """Rasterize the scene: painter's algorithm over a uniform table
    background, each entity in its label color. Deterministic."""
    w, h = camera.resolution
    pixels = np.empty((h, w, 4), np.uint8)
    pixels[..., 0] = TABLE_COLOR[0]
    pixels[..., 1] = TABLE_COLOR[1]
    pixels[..., 2] = TABLE_COLOR[2]
    pixels[..., 3] = 255

    depth_sorted = []
    for obj in scene.objects:
        X, Y, Z = _camera_point(camera, obj.position)
        if Z <= MIN_DEPTH:
            continue
        depth_sorted.append((Z, obj))
    depth_sorted.sort(key=lambda pair: -pair[0])  # farthest painted first

    for Z, obj in depth_sorted:
        cx, cy = project(camera, obj.position)
        r_px = camera.focal * obj.radius / Z
        if obj.shape == "cylinder":
            _paint_disc(pixels, cx, cy, r_px, obj.color)
        elif obj.shape == "plate":
            inner = camera.focal * (obj.inner_radius or 0.0) / Z
            _paint_disc(pixels, cx, cy, r_px, obj.color, r_inner=inner)
        else:  # person: upright ellipse
            ry_px = camera.focal * (obj.height or obj.radius) / Z
            _paint_disc(pixels, cx, cy, r_px, obj.color, ry=ry_px)

    return CameraFrame(width=w, height=h, pixels=pixels, frame_id=frame_id)


def roi_for(scene: Scene, camera: SyntheticCamera,
            entity_id: str) -> RegionOfInterest:
    """Mirror region for an entity: projected center plus projected
    bounding-box extent, tagged with its privacy-blur flag."""
    obj = scene.by_id.get(entity_id)
    if obj is None:
        raise UnknownEntity(f"no entity {entity_id!r} in scene")
    X, Y, Z = _camera_point(camera, obj.position)
    if Z <= MIN_DEPTH:
        raise BehindCamera(f"entity {entity_id!r} is behind the camera")
    point = project(camera, obj.position)
    w_px = 2.0 * camera.focal * obj.radius / Z
    h_px = 2.0 * camera.focal * (obj.height or obj.radius) / Z
    return RegionOfInterest(point=point, size=(w_px, h_px),
                            blur=obj.blur_on_mirror)


# --- timed pick-and-place action -------------------------------------------

# (timeline key, phase entered at that time)
_PHASE_NAMES = (
    ("onset", "idle"),
    ("gaze_pick", "gaze_pick"),
    ("reach_start", "reach"),
    ("gaze_place", "gaze_place"),
    ("grasped", "grasp"),
    ("transport_start", "transport"),
    ("over_plate", "lower"),
    ("released", "release"),
    ("completed", "done"),
)


def _phase_at(t: float, timeline=TIMELINE) -> str:
    phase = "idle"
    for key, name in _PHASE_NAMES:
        if t >= timeline[key]:
            phase = name
    return phase


def _attention_at(t: float, pick: str, place: str, timeline=TIMELINE) -> str:
    if t < timeline["gaze_pick"]:
        return "person"
    if t < timeline["gaze_place"]:
        return pick
    if t < timeline["released"]:
        return place
    return "person"


@dataclass
class ArmAction:
    """Phase machine for one pick-and-place execution."""

    phase: str = "idle"
    held_object: str | None = None
    stop_time: float | None = None
    place_down_until: float | None = None
    emitted: set = field(default_factory=set)


def step_action(action: ArmAction, plan: tuple[str, str], t: float,
                stop_requested: float | None = None, timeline=TIMELINE):
    """Advance the action to sim-time ``t``.

    ``stop_requested`` carries the sim-time of a stop command arriving this
    tick (None otherwise); the stop takes effect at that time, not at the
    tick boundary, so recorded stop times are exact. Returns
    ``(action, attention_entity_id, events)`` where each event is a
    ``(name, scheduled_time)`` pair.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    action = ArmAction(phase=action.phase, held_object=action.held_object,
                       stop_time=action.stop_time,
                       place_down_until=action.place_down_until,
                       emitted=set(action.emitted))
    pick, place = plan
    events: list[tuple[str, float]] = []

    if action.stop_time is None:
        horizon = t if stop_requested is None else min(t, float(stop_requested))
        for name, ts in timeline.items():
            if ts <= horizon and name not in action.emitted:
                action.emitted.add(name)
                events.append((name, ts))
        if stop_requested is not None:
            s = float(stop_requested)
            action.stop_time = s
            events.append(("stopped", s))
            holding = ("grasped" in action.emitted
                       and "released" not in action.emitted)
            if holding:
                action.place_down_until = s + PLACE_DOWN_DURATION

    if action.stop_time is not None:
        if action.place_down_until is not None and t < action.place_down_until:
            action.phase = "placing_down"
            action.held_object = pick
            attention = pick
        else:
            if (action.place_down_until is not None
                    and "placed_down" not in action.emitted):
                action.emitted.add("placed_down")
                events.append(("placed_down", action.place_down_until))
            action.phase = "halted"
            action.held_object = None
            attention = "person"
        return action, attention, events

    action.phase = _phase_at(t, timeline)
    holding = "grasped" in action.emitted and "released" not in action.emitted
    action.held_object = pick if holding else None
    return action, _attention_at(t, pick, place, timeline), events


def _carry_profile(home: np.ndarray, place_xy: np.ndarray, table: float,
                   t: float, timeline=TIMELINE) -> np.ndarray:
    """Where the picked object sits at schedule time ``t`` (no stop)."""
    grasp = timeline["grasped"]
    move = timeline["transport_start"]
    over = timeline["over_plate"]
    drop = timeline["released"]
    lifted = table + LIFT_HEIGHT
    if t < grasp:
        return home.copy()
    if t >= drop:
        return np.array([place_xy[0], place_xy[1], table])
    pos = home.copy()
    if t < grasp + _LIFT_TIME:
        pos[2] = table + LIFT_HEIGHT * (t - grasp) / _LIFT_TIME
        return pos
    pos[2] = lifted
    if t < move:
        return pos
    if t < over:
        alpha = (t - move) / (over - move)
        pos[0] = home[0] + alpha * (place_xy[0] - home[0])
        pos[1] = home[1] + alpha * (place_xy[1] - home[1])
        return pos
    pos[0], pos[1] = place_xy[0], place_xy[1]
    pos[2] = lifted + (table - lifted) * (t - over) / (drop - over)
    return pos


def held_object_position(scene: Scene, plan: tuple[str, str], t: float,
                         action: ArmAction, timeline=TIMELINE) -> np.ndarray:
    """Current position of the planned pick object, honoring any stop: after
    a stop nothing moves except the place-down descent at frozen (x, y)."""
    pick, place = plan
    home = scene.by_id[pick].home_position
    place_xy = scene.by_id[place].home_position[:2]
    table = scene.table_height

    if action.stop_time is None:
        return _carry_profile(home, place_xy, table, t, timeline)

    s = action.stop_time
    frozen = _carry_profile(home, place_xy, table, s, timeline)
    if action.place_down_until is None:
        return frozen
    if t >= action.place_down_until:
        return np.array([frozen[0], frozen[1], table])
    frac = max(0.0, (t - s) / PLACE_DOWN_DURATION)
    z = frozen[2] + (table - frozen[2]) * frac
    return np.array([frozen[0], frozen[1], z])
