"""Scene, synthetic camera, and timed-action tests.

Event-time exactness matters here: the timed action stamps events with their
scheduled times, so logs must be bit-identical across tick rates and runs.
"""

from __future__ import annotations

import numpy as np
import pytest

from gazesim import BehindCamera, UnknownEntity
from gazesim.scene import (
    PLACE_DOWN_DURATION,
    TIMELINE,
    ArmAction,
    Scene,
    SceneObject,
    SyntheticCamera,
    default_camera,
    default_scene,
    held_object_position,
    project,
    render_camera,
    roi_for,
    step_action,
)


def axis_camera():
    """Camera at the origin looking along +x, so camera coordinates are easy
    to write down: X right (world -y), Y down (world -z), Z forward (+x)."""
    return SyntheticCamera(position=(0.0, 0.0, 0.0), view=(1.0, 0.0, 0.0))


class TestProjection:
    def test_optical_axis_hits_principal_point(self):
        cam = axis_camera()
        for depth in (0.5, 1.0, 3.0):
            assert project(cam, (depth, 0.0, 0.0)) == pytest.approx((960.0, 540.0))

    def test_formula_example(self):
        cam = axis_camera()
        # camera-frame (0.5, 0, 2) is world (2, -0.5, 0) for this pose
        assert project(cam, (2.0, -0.5, 0.0)) == pytest.approx((1160.0, 540.0))

    def test_doubling_depth_halves_offset(self):
        cam = axis_camera()
        near = project(cam, (1.0, -0.2, 0.1))
        far = project(cam, (2.0, -0.4, 0.2))
        assert far[0] - 960 == pytest.approx(near[0] - 960)
        mid = project(cam, (2.0, -0.2, 0.1))
        assert mid[0] - 960 == pytest.approx((near[0] - 960) / 2)

    def test_behind_camera_raises(self):
        cam = axis_camera()
        with pytest.raises(BehindCamera):
            project(cam, (-1.0, 0.0, 0.0))
        with pytest.raises(BehindCamera):
            project(cam, (0.05, 0.0, 0.0))

    def test_default_layout_fully_visible(self):
        scene = default_scene()
        cam = default_camera()
        for obj in scene.objects:
            x, y = project(cam, obj.position)
            assert 0 <= x < cam.resolution[0]
            assert 0 <= y < cam.resolution[1]


class TestRender:
    def test_empty_scene_uniform(self):
        cam = default_camera()
        frame = render_camera(Scene(objects=[]), cam)
        assert frame.width == 1920 and frame.height == 1080
        flat = frame.pixels[..., :3].reshape(-1, 3)
        assert (flat == flat[0]).all()

    def test_single_bottle_single_component(self):
        from scipy import ndimage

        scene = default_scene()
        bottle = scene.by_id["red_bottle"]
        frame = render_camera(Scene(objects=[bottle]), cam := default_camera())
        bg = frame.pixels[0, 0, :3]
        fg = np.any(frame.pixels[..., :3] != bg, axis=2)
        labeled, count = ndimage.label(fg)
        assert count == 1
        assert (frame.pixels[fg][:, :3] == np.array(bottle.color)).all()

    def test_moving_object_moves_centroid(self):
        scene = default_scene()
        cam = default_camera()
        bottle = scene.by_id["red_bottle"]

        def centroid(position):
            obj = SceneObject(id="b", label="red bottle", color=bottle.color,
                              shape="cylinder", position=np.array(position),
                              graspable=True, radius=bottle.radius)
            frame = render_camera(Scene(objects=[obj]), cam)
            bg = frame.pixels[0, 0, :3]
            ys, xs = np.nonzero(np.any(frame.pixels[..., :3] != bg, axis=2))
            return np.array([xs.mean() + 0.5, ys.mean() + 0.5])

        p0 = np.array([0.45, 0.10, -0.25])
        p1 = p0 + np.array([0.05, 0.08, 0.0])
        shift = centroid(p1) - centroid(p0)
        expected = np.array(project(cam, p1)) - np.array(project(cam, p0))
        assert shift == pytest.approx(expected, abs=2.0)

    def test_determinism(self):
        scene = default_scene()
        cam = default_camera()
        a = render_camera(scene, cam, frame_id=5)
        b = render_camera(scene, cam, frame_id=5)
        np.testing.assert_array_equal(a.pixels, b.pixels)
        assert a.frame_id == 5


class TestRoi:
    def test_on_axis_plate_roi(self):
        depth = 2.0 ** 0.5
        radius = 100.0 * depth / 800.0
        plate = SceneObject(id="p", label="red plate", color=(200, 40, 40),
                            shape="plate", position=np.array([1.0, 0.0, 0.2]),
                            graspable=False, radius=radius,
                            inner_radius=radius * 0.7)
        cam = default_camera()  # at (0,0,1.2) looking (1,0,-1)/sqrt(2)
        roi = roi_for(Scene(objects=[plate]), cam, "p")
        assert roi.point == pytest.approx((960.0, 540.0))
        assert roi.size == pytest.approx((200.0, 200.0), abs=0.5)
        assert not roi.blur

    def test_deeper_object_smaller_roi(self):
        cam = axis_camera()

        def size_at(x):
            obj = SceneObject(id="o", label="red bottle", color=(178, 34, 34),
                              shape="cylinder", position=np.array([x, 0.0, 0.0]),
                              graspable=True, radius=0.05)
            return roi_for(Scene(objects=[obj]), cam, "o").size[0]

        assert size_at(2.0) < size_at(1.0)

    def test_person_roi_blurred(self):
        scene = default_scene()
        roi = roi_for(scene, default_camera(), "person")
        assert roi.blur
        # taller than wide: the standing person's ellipse dominates vertically
        assert roi.size[1] > roi.size[0]

    def test_unknown_entity(self):
        with pytest.raises(UnknownEntity):
            roi_for(default_scene(), default_camera(), "ghost")


def run_action(plan, stop_at=None, dt=0.02, t_end=22.0):
    """Drive step_action over a tick grid, injecting the stop at the first
    tick whose time reaches it. Returns (action, events, phases, attention)."""
    action = ArmAction()
    events = []
    phases = []
    attentions = []
    stop_sent = False
    t = 0.0
    k = 0
    while t <= t_end:
        stop = None
        if stop_at is not None and not stop_sent and t >= stop_at:
            stop = stop_at
            stop_sent = True
        action, attn, evs = step_action(action, plan, t, stop_requested=stop)
        events.extend(evs)
        phases.append((t, action.phase))
        attentions.append((t, attn))
        k += 1
        t = k * dt
    return action, events, phases, attentions


PLAN = ("red_bottle", "red_plate")


class TestActionTimeline:
    def test_uninterrupted_run_emits_canonical_events(self):
        action, events, phases, _ = run_action(PLAN)
        names = [n for n, _ in events]
        assert names == ["onset", "gaze_pick", "reach_start", "gaze_place",
                         "grasped", "transport_start", "over_plate",
                         "released", "completed"]
        times = dict(events)
        for name, t in TIMELINE.items():
            assert times[name] == t  # bit-exact scheduled stamps
        assert action.phase == "done"

    def test_event_times_independent_of_tick_rate(self):
        _, ev_a, _, _ = run_action(PLAN, dt=0.02)
        _, ev_b, _, _ = run_action(PLAN, dt=0.031)
        assert ev_a == ev_b

    def test_attention_precedes_motion(self):
        _, events, _, _ = run_action(PLAN)
        t = dict(events)
        assert t["gaze_pick"] < t["reach_start"]
        assert t["gaze_place"] < t["transport_start"]

    def test_attention_sequence(self):
        _, _, _, attentions = run_action(PLAN)

        def att_at(t):
            return [a for tt, a in attentions if tt <= t + 1e-9][-1]

        assert att_at(0.0) == "person"
        assert att_at(1.0) == "red_bottle"
        assert att_at(5.0) == "red_plate"
        assert attentions[-1][1] == "person"

    def test_held_object_window(self):
        action = ArmAction()
        for k in range(1100):
            t = k * 0.02
            action, _, _ = step_action(action, PLAN, t)
            holding = action.held_object is not None
            assert holding == (5.0 <= t < 16.0), f"t={t}"

    def test_completed_object_lands_on_plate(self):
        scene = default_scene()
        action, *_ = run_action(PLAN)
        pos = held_object_position(scene, PLAN, 21.0, action)
        plate = scene.by_id["red_plate"].position
        assert pos[0] == plate[0] and pos[1] == plate[1]
        assert pos[2] == scene.table_height


class TestInterruption:
    def test_early_stop_halts_within_tick(self):
        action, events, phases, _ = run_action(PLAN, stop_at=1.0)
        names = [n for n, _ in events]
        assert names == ["onset", "gaze_pick", "stopped"]
        assert dict(events)["stopped"] == 1.0
        after = [p for t, p in phases if t >= 1.02]
        assert set(after) == {"halted"}

    def test_stop_during_transport_places_down(self):
        stop = 10.3
        action, events, phases, _ = run_action(PLAN, stop_at=stop)
        times = dict(events)
        assert times["stopped"] == stop
        assert times["placed_down"] == stop + PLACE_DOWN_DURATION  # exact
        assert "over_plate" not in times and "released" not in times
        in_between = [p for t, p in phases if stop < t < stop + PLACE_DOWN_DURATION]
        assert set(in_between) == {"placing_down"}
        assert [p for t, p in phases if t > stop + PLACE_DOWN_DURATION][-1] == "halted"

    def test_place_down_freezes_xy_and_drops_z(self):
        scene = default_scene()
        stop = 10.3
        action, *_ = run_action(PLAN, stop_at=stop)
        final = held_object_position(scene, PLAN, 30.0, action)
        # xy frozen at the transport profile evaluated at the stop time
        fresh = ArmAction()
        for k in range(int(stop / 0.02) + 1):
            fresh, _, _ = step_action(fresh, PLAN, k * 0.02)
        at_stop = held_object_position(scene, PLAN, stop, fresh)
        assert final[0] == at_stop[0] and final[1] == at_stop[1]
        assert final[2] == scene.table_height
        # partway down: strictly between lifted and table height
        mid = held_object_position(scene, PLAN, stop + 0.75, action)
        assert scene.table_height < mid[2] < at_stop[2]

    def test_stop_when_not_holding_never_places_down(self):
        for stop in (0.3, 3.0, 16.0, 18.5):
            _, events, _, _ = run_action(PLAN, stop_at=stop)
            assert "placed_down" not in dict(events), f"stop={stop}"

    def test_stop_at_grasp_boundary_places_down(self):
        _, events, _, _ = run_action(PLAN, stop_at=5.0)
        times = dict(events)
        assert times["grasped"] == 5.0
        assert times["placed_down"] == 6.5

    def test_no_canonical_events_after_stop(self):
        _, events, _, _ = run_action(PLAN, stop_at=7.77)
        times = dict(events)
        assert "transport_start" not in times
        assert times["stopped"] == 7.77

    def test_stopped_attention_returns_to_person(self):
        _, _, _, attentions = run_action(PLAN, stop_at=1.0)
        assert attentions[-1][1] == "person"

    def test_object_untouched_by_early_stop(self):
        scene = default_scene()
        action, *_ = run_action(PLAN, stop_at=1.0)
        pos = held_object_position(scene, PLAN, 30.0, action)
        np.testing.assert_array_equal(pos, scene.by_id["red_bottle"].position)


class TestSceneValidation:
    def test_duplicate_labels_rejected(self):
        a = SceneObject(id="a", label="red plate", color=(1, 2, 3), shape="plate",
                        position=np.zeros(3), graspable=False, radius=0.1,
                        inner_radius=0.05)
        b = SceneObject(id="b", label="red plate", color=(1, 2, 3), shape="plate",
                        position=np.ones(3), graspable=False, radius=0.1,
                        inner_radius=0.05)
        with pytest.raises(ValueError):
            Scene(objects=[a, b])

    def test_graspable_plate_rejected(self):
        p = SceneObject(id="p", label="red plate", color=(1, 2, 3), shape="plate",
                        position=np.zeros(3), graspable=True, radius=0.1,
                        inner_radius=0.05)
        with pytest.raises(ValueError):
            Scene(objects=[p])

    def test_default_scene_contract(self):
        scene = default_scene()
        assert set(scene.by_id) == {"red_bottle", "spray_can", "red_plate",
                                    "white_plate", "person"}
        assert scene.by_id["person"].blur_on_mirror
        assert not scene.by_id["red_plate"].graspable
        assert scene.by_id["red_bottle"].graspable
