"""Deterministic simulation core behind the realtime gateway.

One :class:`SimEngine` owns all simulation state and advances it tick by
tick; clients interact only through queued commands (applied at the start
of a tick) and the immutable snapshot dict each tick returns. Given the
same config and the same command schedule the snapshot stream is
bit-identical — no wall-clock value ever enters the state.

Per tick, in order: apply due commands, advance the pick-and-place action,
resolve the attention target, run the gaze controller (or an active
nod/shake gesture) and integrate, refresh the synthetic camera view and
the mirrored pupil patch (mirror condition only), step the expression
machine, render the eye screen, and emit a snapshot. Module errors along
the way surface as snapshot warnings; the loop itself never dies.
"""

from __future__ import annotations

import base64
import dataclasses
import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from . import scene as scene_mod
from .config import SimConfig, default_config
from .errors import BehindCamera, GazeSimError
from .eyes import MODES, ExpressionState, EyeFrame, render_eyes, step_expression
from .kinematics import (GestureSpec, JointVector, apply_gesture, ik_step,
                         integrate, screen_pupil_position)
from .mirror import (CameraFrame, RegionOfInterest, compute_crop, extract_flip)
from .scenario import (PlannedAction, TrialMetrics, TrialSpec, classify,
                       load_scenario, parse_instruction)
from .scene import (Scene, default_scene, held_object_position, project,
                    render_camera, roi_for, step_action)

__all__ = ["SimEngine", "COMMAND_VARIANTS"]

COMMAND_VARIANTS = frozenset({
    "set_target", "request", "stop", "gesture", "set_mirror",
    "load_scenario", "set_expression",
})

# extra seconds a finished action stays open to absorb late stop commands
POST_COMPLETION_GRACE = 2.0

# minimum blur applied to privacy-flagged mirror regions, pixels
PRIVACY_BLUR_RADIUS = 4.0


@dataclass
class _Queued:
    data: dict
    at: float | None


@dataclass
class _Trial:
    spec: TrialSpec
    plan: PlannedAction
    t0: float
    action: scene_mod.ArmAction = field(default_factory=scene_mod.ArmAction)
    events: list = field(default_factory=list)
    stop_rel: float | None = None
    stop_sent: bool = False
    finished: bool = False


def _png_b64(rgba: np.ndarray) -> str:
    ok, buf = cv2.imencode(".png", rgba[..., [2, 1, 0, 3]])
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return base64.b64encode(buf.tobytes()).decode("ascii")


class SimEngine:
    """Single-writer simulation state machine.

    Thread contract: :meth:`enqueue` and :meth:`tick` must be called from
    one thread (or one event loop); snapshots are plain dicts safe to share.
    """

    def __init__(self, config: SimConfig | None = None,
                 scene: Scene | None = None):
        self.config = config or default_config()
        self.scene = scene or default_scene()
        self.camera = self.config.camera
        self.q = JointVector()
        self.expr = ExpressionState()
        self.tick_index = 0
        self.mirror_enabled = False
        self.condition = "eyes_only"
        self.trial_logs: list[TrialMetrics] = []
        self.last_frame: EyeFrame | None = None
        self.last_camera_frame: CameraFrame | None = None

        self._queue: list[_Queued] = []
        self._trial: _Trial | None = None
        self._pending_script: list[TrialSpec] = []
        self._manual_target = None          # ("entity", id) | ("point", xyz)
        self._last_attention = "person"
        self._gesture = None                # (GestureSpec, start_t, base)
        self._cam_cache_key = None

    # ---- command intake ---------------------------------------------------

    def enqueue(self, command: dict) -> None:
        """Queue a command for the next tick (or for its ``at`` sim-time).

        Structural problems (not exactly one known variant, non-dict
        payload, unknown fields) raise ValueError so the transport can send
        an error reply; content problems (unknown entity, bad keyword)
        surface later as snapshot warnings.
        """
        if not isinstance(command, dict):
            raise ValueError("command must be a JSON object")
        variants = sorted(set(command) & COMMAND_VARIANTS)
        if len(variants) != 1:
            raise ValueError("exactly one command variant required, got "
                             f"{variants or sorted(set(command))}")
        unknown = set(command) - COMMAND_VARIANTS - {"at", "v"}
        if unknown:
            raise ValueError(f"unknown command field(s): {sorted(unknown)}")
        name = variants[0]
        if not isinstance(command[name], dict):
            raise ValueError(f"{name} payload must be an object")
        at = command.get("at")
        if at is not None and not isinstance(at, (int, float)):
            raise ValueError("'at' must be a sim-time in seconds")
        self._queue.append(_Queued(data={name: dict(command[name])},
                                   at=None if at is None else float(at)))

    # ---- per-command handlers --------------------------------------------

    def _apply(self, data: dict, t: float, warnings: list, expr_events: list):
        name, payload = next(iter(data.items()))
        handler = getattr(self, f"_cmd_{name}")
        try:
            handler(payload, t, warnings, expr_events)
        except GazeSimError as exc:
            warnings.append(f"{name}: {exc}")
        except (KeyError, TypeError, ValueError) as exc:
            warnings.append(f"{name}: bad payload ({exc})")

    def _cmd_set_target(self, payload, t, warnings, expr_events):
        if "entity_id" in payload:
            entity = str(payload["entity_id"])
            if entity not in self.scene.by_id:
                warnings.append(f"set_target: no entity {entity!r}")
                return
            self._manual_target = ("entity", entity)
        else:
            point = (float(payload["x"]), float(payload["y"]),
                     float(payload["z"]))
            self._manual_target = ("point", point)

    def _cmd_request(self, payload, t, warnings, expr_events):
        if self._trial is not None and not self._trial.finished:
            if self._trial.action.phase in ("done", "halted"):
                self._finalize_trial()
            else:
                warnings.append("request: an action is already running")
                return
        text = str(payload["text"])
        try:
            instr = parse_instruction(text)
        except GazeSimError:
            try:
                instr = parse_instruction(text, strict=False)
            except GazeSimError as exc:
                warnings.append(f"request: {exc}")
                return

        spec = TrialSpec(instruction=instr)
        for i, pending in enumerate(self._pending_script):
            p = pending.instruction
            if (p.object_phrase == instr.object_phrase
                    and p.plate_phrase == instr.plate_phrase):
                spec = self._pending_script.pop(i)
                break

        stop_rel = payload.get("stop_at")
        # a fresh table for every trial
        for obj in self.scene.objects:
            obj.position = obj.home_position.copy()
        self._trial = _Trial(
            spec=spec, plan=spec.plan(), t0=t,
            stop_rel=None if stop_rel is None else float(stop_rel))

    def _cmd_stop(self, payload, t, warnings, expr_events):
        keyword = str(payload.get("keyword", "stop")).strip().lower()
        if keyword not in self.config.stop_keywords:
            warnings.append(f"stop: {keyword!r} is not a stop keyword")
            return
        trial = self._trial
        if trial is None or trial.finished:
            warnings.append("stop: no action running")
            return
        if trial.stop_rel is not None:
            warnings.append("stop: already stopping")
            return
        trial.stop_rel = max(0.0, t - trial.t0)

    def _cmd_gesture(self, payload, t, warnings, expr_events):
        spec = GestureSpec(kind=str(payload["kind"]))
        base = self.q.as_array()[spec.dof_index]
        self._gesture = (spec, t, float(base))

    def _cmd_set_mirror(self, payload, t, warnings, expr_events):
        on = bool(payload["on"])
        self.mirror_enabled = on
        base = "mirror" if on else "neutral"
        if self.expr.mode in ("mirror", "neutral"):
            self.expr = dataclasses.replace(self.expr, mode=base)

    def _cmd_load_scenario(self, payload, t, warnings, expr_events):
        source = payload.get("inline", payload.get("path"))
        if source is None:
            warnings.append("load_scenario: need 'path' or 'inline'")
            return
        try:
            script, scn = load_scenario(source)
        except (OSError, GazeSimError, ValueError, KeyError) as exc:
            warnings.append(f"load_scenario: {exc}")
            return
        if self._trial is not None and not self._trial.finished:
            warnings.append("load_scenario: active trial discarded")
        self._trial = None
        self.scene = scn
        self._pending_script = list(script.trials)
        self.condition = script.condition
        self.trial_logs = []
        self._manual_target = None
        self._cam_cache_key = None
        self._cmd_set_mirror({"on": script.condition == "mirror_eyes"},
                             t, warnings, expr_events)

    def _cmd_set_expression(self, payload, t, warnings, expr_events):
        mode = str(payload["mode"])
        if mode not in MODES:
            warnings.append(f"set_expression: unknown mode {mode!r}")
            return
        self.expr = dataclasses.replace(self.expr, mode=mode)

    # ---- trial bookkeeping ------------------------------------------------

    def _finalize_trial(self):
        trial = self._trial
        if trial is None or trial.finished:
            return
        trial.finished = True
        stop_time = trial.stop_rel if trial.stop_sent else None
        completed = self.config.timeline["completed"]
        self.trial_logs.append(TrialMetrics(
            instruction=trial.spec.instruction.raw,
            condition=self.condition,
            error_class=trial.plan.error_class,
            plan=(trial.plan.pick_id, trial.plan.place_id),
            events=list(trial.events),
            stop_time=stop_time,
            classification=classify(trial.plan.error_class, stop_time,
                                    completed=completed)))

    # ---- tick pipeline ----------------------------------------------------

    def tick(self) -> dict:
        """Advance one tick and return the snapshot for it."""
        cfg = self.config
        t = self.tick_index * cfg.dt
        warnings: list[str] = []
        expr_events: list = []
        tick_events: list = []

        # 1. commands whose time has come, in arrival order
        due = [qc for qc in self._queue
               if qc.at is None or qc.at <= t + 1e-9]
        if due:
            self._queue = [qc for qc in self._queue if qc not in due]
            for qc in due:
                self._apply(qc.data, t if qc.at is None else qc.at,
                            warnings, expr_events)

        # 2. pick-and-place action
        trial = self._trial
        attention = None
        if trial is not None and not trial.finished:
            t_rel = t - trial.t0
            stop_req = None
            if (trial.stop_rel is not None and not trial.stop_sent
                    and t_rel >= trial.stop_rel - 1e-9):
                stop_req = trial.stop_rel
                trial.stop_sent = True
            prev_phase = trial.action.phase
            plan_ids = (trial.plan.pick_id, trial.plan.place_id)
            action, attention, events = step_action(
                trial.action, plan_ids, t_rel, stop_requested=stop_req,
                timeline=cfg.timeline)
            trial.action = action
            trial.events.extend(events)
            tick_events = events
            for evname, _ in events:
                if evname == "stopped":
                    expr_events.append("processing_on")
                elif evname == "completed":
                    expr_events.append("success")
            if action.phase == "halted" and prev_phase != "halted":
                expr_events.append("processing_off")

            if trial.plan.pick_id in self.scene.by_id:
                self.scene.by_id[trial.plan.pick_id].position = \
                    held_object_position(self.scene, plan_ids, t_rel, action,
                                         timeline=cfg.timeline)
            done_long_enough = (
                action.phase == "done"
                and t_rel >= cfg.timeline["completed"] + POST_COMPLETION_GRACE
                and trial.stop_rel is None)
            if action.phase == "halted" or done_long_enough:
                self._finalize_trial()
                attention = None

        # 3. attention target
        if attention is None:
            if self._manual_target is not None:
                kind, value = self._manual_target
                attention = value if kind == "entity" else None
                target_point = (np.array(value) if kind == "point"
                                else None)
            else:
                attention = "person"
                target_point = None
        else:
            target_point = None
        if attention is not None:
            obj = self.scene.by_id.get(attention)
            if obj is None:
                warnings.append(f"attention entity {attention!r} missing")
                attention, target_point = None, np.array([1.5, 0.0, 0.3])
            else:
                target_point = obj.position
            if attention is not None and attention != self._last_attention:
                expr_events.append(("registration", attention))
        self._last_attention = attention

        # 4. gaze control
        try:
            if self._gesture is not None:
                gspec, g0, gbase = self._gesture
                tg = t - g0
                if tg > gspec.duration:
                    self._gesture = None
            if self._gesture is not None:
                qdot = apply_gesture(self.q, cfg.geometry, tuple(target_point),
                                     gspec, tg, cfg.ik, base_angle=gbase)
            else:
                qdot = ik_step(self.q, cfg.geometry, tuple(target_point),
                               cfg.ik)
        except GazeSimError as exc:
            warnings.append(f"gaze: {exc}")
            qdot = np.zeros(6)
        self.q = integrate(self.q, qdot, cfg.dt, cfg.geometry)
        try:
            pupils = screen_pupil_position(self.q, cfg.geometry)
        except GazeSimError as exc:
            warnings.append(f"gaze: {exc}")
            pupils = np.full((2, 2), np.nan)

        # 5. mirror pipeline
        overlay = None
        filters = cfg.filters
        if self.mirror_enabled:
            overlay, filters = self._mirror_patch(attention, target_point,
                                                  warnings)

        # 6. expression machine
        self.expr = step_expression(self.expr, cfg.dt, expr_events)

        # 7. eye screen
        expr = self.expr
        if overlay is None and "mirror" in (expr.current_mode("right"),
                                            expr.current_mode("left")):
            expr = dataclasses.replace(expr, mode="neutral",
                                       right_mode=None, left_mode=None)
        frame = render_eyes(pupils, expr, cfg.geometry,
                            mirror_imgs=None if overlay is None
                            else (overlay, overlay),
                            filters=filters)
        self.last_frame = frame

        snapshot = self._snapshot(t, frame, attention, target_point, overlay,
                                  tick_events, warnings)
        self.tick_index += 1
        return snapshot

    # ---- helpers ----------------------------------------------------------

    def _camera_frame(self) -> CameraFrame:
        key = tuple((obj.id, float(obj.position[0]), float(obj.position[1]),
                     float(obj.position[2])) for obj in self.scene.objects)
        if key != self._cam_cache_key or self.last_camera_frame is None:
            self.last_camera_frame = render_camera(self.scene, self.camera)
            self._cam_cache_key = key
        return self.last_camera_frame

    def _mirror_patch(self, attention, target_point, warnings):
        """Crop, mirror, and privacy-filter the attended region; returns
        (patch or None, effective filters)."""
        filters = self.config.filters
        try:
            if attention is not None:
                roi = roi_for(self.scene, self.camera, attention)
            else:
                roi = self._point_roi(target_point)
            frame = self._camera_frame()
            pupil_px = self.config.geometry.pupil_radius * \
                self.config.geometry.pixels_per_meter
            side = int(2 * math.ceil(pupil_px) + 2)
            h, w = frame.pixels.shape[:2]
            crop = compute_crop((w, h), roi, (side, side))
            patch = extract_flip(frame, crop)
            if roi.blur:
                filters = dataclasses.replace(
                    filters,
                    blur_radius=max(filters.blur_radius, PRIVACY_BLUR_RADIUS))
            return patch, filters
        except GazeSimError as exc:
            warnings.append(f"mirror: {exc}")
            return None, filters

    def _point_roi(self, point) -> RegionOfInterest:
        cam = self.camera
        bx, by, bz = cam.basis()
        rel = np.asarray(point, dtype=float) - np.asarray(cam.position)
        depth = float(rel @ bz)
        if depth <= scene_mod.MIN_DEPTH:
            raise BehindCamera("target point is behind the camera")
        u, v = project(cam, point)
        extent = 2.0 * cam.focal * 0.05 / depth
        return RegionOfInterest(point=(u, v), size=(extent, extent))

    def _snapshot(self, t, frame: EyeFrame, attention, target_point, overlay,
                  events, warnings) -> dict:
        action = self._trial.action if self._trial is not None \
            else scene_mod.ArmAction()
        expr = self.expr
        overlays = None
        if overlay is not None:
            png = _png_b64(overlay)
            overlays = {"right": png, "left": png}
        return {
            "v": 1,
            "tick": self.tick_index,
            "sim_time": t,
            "q": [float(x) for x in self.q.as_array()],
            "pupil_screen": [[float(c) for c in eye]
                             for eye in frame.pupil_centers_px],
            "expression": {
                "mode": expr.mode,
                "effective": [expr.current_mode("right"),
                              expr.current_mode("left")],
                "listening": expr.listening,
                "processing": expr.processing,
                "smiling": expr.smile_remaining > 0.0,
                "flash_time": expr.flash_time,
            },
            "action": {"phase": action.phase,
                       "held_object": action.held_object},
            "scene": {obj.id: [float(v) for v in obj.position]
                      for obj in self.scene.objects},
            "attention": ({"entity": attention} if attention is not None
                          else {"point": [float(v) for v in target_point]}),
            "mirror": self.mirror_enabled,
            "condition": self.condition,
            "overlays": overlays,
            "events": [[name, ts] for name, ts in events],
            "warnings": warnings,
            "trials": [
                {"instruction": log.instruction,
                 "condition": log.condition,
                 "error_class": log.error_class,
                 "plan": list(log.plan),
                 "stop_time": log.stop_time,
                 "classification": log.classification}
                for log in self.trial_logs
            ],
        }
