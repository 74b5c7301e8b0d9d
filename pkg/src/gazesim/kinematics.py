"""Differential-IK gaze control for a pan/tilt neck carrying two virtual eyes.

Conventions
-----------
The world frame sits at the pan joint base: x forward, y left, z up.  The pan
joint rotates about world z (positive turns the head left), the tilt joint
rotates about the pan frame's y axis (positive pitches the gaze up).  The head
frame ``H`` is the frame after both rotations; the eye screen lies in the plane
``{x = screen_distance}`` of ``H`` and the two eyeball centers sit behind it at
``(screen_distance - eye_depth, -/+ eye_half_spacing, 0)`` (right eye at
negative y).

Each eye has two DoF (yaw about head z, pitch up).  A unit gaze direction in
the head frame is ``g(yaw, pitch) = (cos(pitch)cos(yaw), cos(pitch)sin(yaw),
sin(pitch))``.

The controller treats "both gaze rays pass through the attention target" as a
four-row kinematic constraint.  Each tick it solves a damped, joint-weighted
least-squares problem for joint velocities and adds a nullspace term that
slowly re-centers the eyes, which makes the head re-orient to face the target
while the gaze stays locked on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTarget, GazeOffScreenPlane, SingularSystem

_DEGENERATE_DISTANCE = 1e-6
_MIN_FORWARD_GAZE = 0.01
_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class HeadGeometry:
    """Physical layout of the screen head; lengths in meters, angles in radians."""

    screen_distance: float = 0.10
    eye_depth: float = 0.03
    eye_half_spacing: float = 0.05
    screen_width: float = 0.24
    screen_height: float = 0.07
    pixels_per_meter: float = 1000.0
    iris_radius: float = 0.014
    pupil_radius: float = 0.0123
    pan_limit: float = 1.57
    tilt_limit: float = 0.6

    def __post_init__(self) -> None:
        if self.screen_distance <= 0 or self.eye_depth <= 0:
            raise ValueError("screen_distance and eye_depth must be positive")
        if self.eye_depth >= self.screen_distance:
            raise ValueError("eyeball centers must sit in front of the neck axis")
        if self.screen_width <= 0 or self.screen_height <= 0:
            raise ValueError("screen dimensions must be positive")
        if self.pupil_radius > self.iris_radius:
            raise ValueError("pupil must fit inside the iris")
        if self.iris_radius * 2 > self.screen_height:
            raise ValueError("iris must fit inside the screen")
        if self.pan_limit <= 0 or self.tilt_limit <= 0:
            raise ValueError("joint limits must be positive")

    @property
    def eye_forward(self) -> float:
        """Forward offset of both eyeball centers in the head frame."""
        return self.screen_distance - self.eye_depth

    def eye_centers_head(self) -> np.ndarray:
        """(2, 3) eyeball centers in the head frame, right eye first."""
        x = self.eye_forward
        b = self.eye_half_spacing
        return np.array([[x, -b, 0.0], [x, b, 0.0]])


@dataclass(frozen=True)
class JointVector:
    """The six controlled angles, radians: neck pan/tilt plus per-eye yaw/pitch."""

    pan: float = 0.0
    tilt: float = 0.0
    right_yaw: float = 0.0
    right_pitch: float = 0.0
    left_yaw: float = 0.0
    left_pitch: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError("joint angles must be finite")

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.pan, self.tilt, self.right_yaw, self.right_pitch,
                self.left_yaw, self.left_pitch)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    @classmethod
    def from_array(cls, values: np.ndarray) -> "JointVector":
        p, t, ry, rp, ly, lp = (float(v) for v in values)
        return cls(p, t, ry, rp, ly, lp)


@dataclass(frozen=True)
class IKParams:
    """Gains and weights for the per-tick velocity solve.

    ``joint_weights`` is the diagonal of the joint-space metric (small neck
    weights make the eyes absorb fast motion); ``null_gate`` masks which DoFs
    the nullspace re-centering term may move.
    """

    joint_weights: tuple[float, ...] = (0.05, 0.05, 1.0, 1.0, 1.0, 1.0)
    null_gate: tuple[float, ...] = (0.0, 0.0, 1.0, 1.0, 1.0, 1.0)
    task_gain: float = 6.0
    rest_gain: float = 8.0
    damping: float = 1e-3
    dt: float = 0.02
    tol: float = 1e-4
    max_ticks: int = 600

    def __post_init__(self) -> None:
        if len(self.joint_weights) != 6 or len(self.null_gate) != 6:
            raise ValueError("joint_weights and null_gate must have 6 entries")
        if any(w < 0 for w in self.joint_weights) or any(g < 0 for g in self.null_gate):
            raise ValueError("weights must be non-negative")
        if self.dt <= 0 or self.task_gain <= 0:
            raise ValueError("dt and task_gain must be positive")


@dataclass(frozen=True)
class AttentionTarget:
    """A world-frame point the eyes should converge on."""

    position: tuple[float, float, float]
    label: str | None = None


@dataclass(frozen=True)
class GestureSpec:
    """A sinusoidal head gesture overlaid on target tracking.

    ``kind`` is ``"nod"`` (tilt DoF) or ``"shake"`` (pan DoF).  The driven DoF
    follows ``base + amplitude * sin(2*pi*frequency*t)`` for ``duration``
    seconds via an extra constraint row with proportional gain
    ``tracking_gain``.
    """

    kind: str = "nod"
    amplitude: float = 0.15
    frequency: float = 1.2
    duration: float = 1.7
    tracking_gain: float = 25.0

    def __post_init__(self) -> None:
        if self.kind not in ("nod", "shake"):
            raise ValueError(f"unknown gesture kind {self.kind!r}")

    @property
    def dof_index(self) -> int:
        """Index into the joint vector of the driven DoF (0=pan, 1=tilt)."""
        return 0 if self.kind == "shake" else 1

    def reference_angle(self, t: float, base: float) -> float:
        return base + self.amplitude * math.sin(2.0 * math.pi * self.frequency * t)


@dataclass(frozen=True)
class GazeSolution:
    """Result of iterating the velocity controller on a static target."""

    q: JointVector
    gaze_dirs: np.ndarray        # (2, 3) unit gaze directions, world frame
    pupil_screen: np.ndarray     # (2, 2) pupil centers on the screen, meters
    converged: bool
    residual: float              # worst point-to-ray distance, meters
    ticks: int = 0


def _position_of(target) -> tuple[float, float, float]:
    if isinstance(target, AttentionTarget):
        x, y, z = target.position
    else:
        x, y, z = target
    return float(x), float(y), float(z)


def head_rotation(pan: float, tilt: float) -> np.ndarray:
    """Rotation matrix mapping head-frame vectors into the world frame."""
    cp, sp = math.cos(pan), math.sin(pan)
    ct, st = math.cos(tilt), math.sin(tilt)
    # Rz(pan) @ Ry(-tilt)
    return np.array([
        [cp * ct, -sp, -cp * st],
        [sp * ct, cp, -sp * st],
        [st, 0.0, ct],
    ])


def eye_gaze_head(yaw: float, pitch: float) -> np.ndarray:
    """Unit gaze direction in the head frame for one eye."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return np.array([cp * cy, cp * sy, sp])


def forward_kinematics(q: JointVector, geom: HeadGeometry) -> tuple[np.ndarray, np.ndarray]:
    """World-frame eyeball centers and unit gaze directions.

    Returns:
        ``(centers, dirs)``, both ``(2, 3)`` with the right eye in row 0.
    """
    rot = head_rotation(q.pan, q.tilt)
    centers = geom.eye_centers_head() @ rot.T
    dirs = np.vstack([
        eye_gaze_head(q.right_yaw, q.right_pitch),
        eye_gaze_head(q.left_yaw, q.left_pitch),
    ]) @ rot.T
    return centers, dirs


def _target_in_head(pan: float, tilt: float, tx: float, ty: float, tz: float):
    """Target coordinates in the head frame plus intermediates for derivatives."""
    cp, sp = math.cos(pan), math.sin(pan)
    ct, st = math.cos(tilt), math.sin(tilt)
    # Rz(-pan) @ t
    ax = cp * tx + sp * ty
    ay = -sp * tx + cp * ty
    az = tz
    # Ry(tilt) @ a
    hx = ct * ax + st * az
    hy = ay
    hz = -st * ax + ct * az
    # d(head target)/d(pan) = Ry(tilt) @ (ay, -ax, 0)
    dpx = ct * ay
    dpy = -ax
    dpz = -st * ay
    # d(head target)/d(tilt) = (hz, 0, -hx)
    return (hx, hy, hz), (dpx, dpy, dpz), (hz, 0.0, -hx)


def _eye_rows(u, du_pan, du_tilt):
    """Desired yaw/pitch for one eye and their pan/tilt derivatives."""
    ux, uy, uz = u
    r2 = ux * ux + uy * uy
    n2 = r2 + uz * uz
    if n2 < _DEGENERATE_DISTANCE ** 2:
        raise DegenerateTarget("attention target coincides with an eyeball center")
    yaw = math.atan2(uy, ux)
    rho = math.sqrt(r2)
    pitch = math.atan2(uz, rho)
    dyaw = ((ux * du_pan[1] - uy * du_pan[0]) / r2,
            (ux * du_tilt[1] - uy * du_tilt[0]) / r2)
    radial_pan = ux * du_pan[0] + uy * du_pan[1]
    radial_tilt = ux * du_tilt[0] + uy * du_tilt[1]
    dpitch = ((r2 * du_pan[2] - uz * radial_pan) / (rho * n2),
              (r2 * du_tilt[2] - uz * radial_tilt) / (rho * n2))
    return yaw, pitch, dyaw, dpitch


def _angles_only(qa: np.ndarray, geom: HeadGeometry, pos) -> tuple[float, float, float, float]:
    """Desired (right_yaw, right_pitch, left_yaw, left_pitch) at joint state qa."""
    (hx, hy, hz), _, _ = _target_in_head(qa[0], qa[1], *pos)
    fx = geom.eye_forward
    b = geom.eye_half_spacing
    out = []
    for cy in (-b, b):
        ux, uy, uz = hx - fx, hy - cy, hz
        r2 = ux * ux + uy * uy
        if r2 + uz * uz < _DEGENERATE_DISTANCE ** 2:
            raise DegenerateTarget("attention target coincides with an eyeball center")
        out.append(math.atan2(uy, ux))
        out.append(math.atan2(uz, math.sqrt(r2)))
    return tuple(out)


def desired_eye_angles(q: JointVector, geom: HeadGeometry, target) -> np.ndarray:
    """Per-eye (yaw, pitch) that would put each gaze ray through the target.

    Returns:
        ``(2, 2)`` array ``[[right_yaw, right_pitch], [left_yaw, left_pitch]]``.

    Raises:
        DegenerateTarget: target within 1e-6 m of an eyeball center.
    """
    ry, rp, ly, lp = _angles_only(q.as_array(), geom, _position_of(target))
    return np.array([[ry, rp], [ly, lp]])


def constraint_error(q: JointVector, geom: HeadGeometry, target) -> np.ndarray:
    """Desired-minus-actual eye angles, stacked ``(right_yaw, right_pitch, left_yaw, left_pitch)``.

    Zero exactly when both gaze rays pass through the target.
    """
    qa = q.as_array()
    ry, rp, ly, lp = _angles_only(qa, geom, _position_of(target))
    return np.array([ry - qa[2], rp - qa[3], ly - qa[4], lp - qa[5]])


def _error_and_jacobian(qa: np.ndarray, geom: HeadGeometry, pos):
    """Constraint error and its closed-form joint derivative (4x6)."""
    th, dp, dt_ = _target_in_head(qa[0], qa[1], *pos)
    fx = geom.eye_forward
    b = geom.eye_half_spacing
    jac = np.zeros((4, 6))
    err = np.empty(4)
    for i, cy in enumerate((-b, b)):
        u = (th[0] - fx, th[1] - cy, th[2])
        yaw, pitch, dyaw, dpitch = _eye_rows(u, dp, dt_)
        r = 2 * i
        err[r] = yaw - qa[2 + r]
        err[r + 1] = pitch - qa[3 + r]
        jac[r, 0], jac[r, 1] = dyaw
        jac[r + 1, 0], jac[r + 1, 1] = dpitch
        jac[r, 2 + r] = -1.0
        jac[r + 1, 3 + r] = -1.0
    return err, jac


def jacobian(q: JointVector, geom: HeadGeometry, target, step: float = 1e-6) -> np.ndarray:
    """Derivative of the constraint error w.r.t. the joints, by central differences.

    This is the reference evaluation; :func:`jacobian_analytic` is the
    closed-form equivalent used inside the solver loop for speed.
    """
    qa = q.as_array()
    pos = _position_of(target)
    out = np.empty((4, 6))
    for j in range(6):
        hi = qa.copy()
        lo = qa.copy()
        hi[j] += step
        lo[j] -= step
        ehi = np.array(_angles_only(hi, geom, pos)) - np.array([hi[2], hi[3], hi[4], hi[5]])
        elo = np.array(_angles_only(lo, geom, pos)) - np.array([lo[2], lo[3], lo[4], lo[5]])
        out[:, j] = (ehi - elo) / (2.0 * step)
    return out


def jacobian_analytic(q: JointVector, geom: HeadGeometry, target) -> np.ndarray:
    """Closed-form constraint Jacobian; matches :func:`jacobian` to ~1e-9."""
    _, jac = _error_and_jacobian(q.as_array(), geom, _position_of(target))
    return jac


def weighted_dls_solve(task_jacobian: np.ndarray, joint_weights: np.ndarray,
                       damping: float, task_velocity: np.ndarray,
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Damped weighted least-squares velocity solve.

    Solves ``J qdot = v`` for the minimum ``W^-1``-norm velocity:
    ``qdot = W J^T (J W J^T + damping^2 I)^-1 v``.  Also returns the
    weight-consistent nullspace projector ``N = I - W J^T (J W J^T)^-1 J``.
    The projector is built from the undamped normal matrix so that nullspace
    motion is exactly task-neutral (``J N = 0``); if that matrix is singular
    the damped one is used instead.

    Raises:
        SingularSystem: condition number of the damped normal matrix
            exceeds 1e12.
    """
    J = np.asarray(task_jacobian, dtype=float)
    w = np.asarray(joint_weights, dtype=float)
    JW = J * w
    M0 = JW @ J.T
    m = M0.shape[0]
    lam2 = damping * damping
    Md = M0.copy()
    Md[np.arange(m), np.arange(m)] += lam2
    _check_condition(Md, lam2)
    x = np.linalg.solve(Md, task_velocity)
    qdot = JW.T @ x
    projector = np.eye(J.shape[1]) - JW.T @ _solve_preferring_undamped(M0, Md, J)
    return qdot, projector


def _solve_preferring_undamped(M0: np.ndarray, Md: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(M0, rhs)
        if np.all(np.isfinite(x)):
            return x
    except np.linalg.LinAlgError:
        pass
    return np.linalg.solve(Md, rhs)


def _qdot(qa: np.ndarray, geom: HeadGeometry, pos, params: IKParams,
          gesture_row=None) -> np.ndarray:
    """One velocity solve on raw arrays; shared by ik_step and solve_gaze."""
    err, jac = _error_and_jacobian(qa, geom, pos)
    w = np.asarray(params.joint_weights)
    lam2 = params.damping * params.damping
    task = -jac          # derivative of the actual-minus-desired misalignment
    JW = task * w
    if gesture_row is not None:
        row, row_velocity = gesture_row
        task = np.vstack([task, row])
        JW = np.vstack([JW, row * w])
        M = JW @ task.T
        M[np.arange(5), np.arange(5)] += lam2
        _check_condition(M, lam2)
        v = np.append(params.task_gain * err, row_velocity)
        return JW.T @ np.linalg.solve(M, v)
    M0 = JW @ task.T
    Md = M0.copy()
    Md[np.arange(4), np.arange(4)] += lam2
    _check_condition(Md, lam2)
    rest = np.asarray(params.null_gate) * np.array(
        [0.0, 0.0, -params.rest_gain * qa[2], -params.rest_gain * qa[3],
         -params.rest_gain * qa[4], -params.rest_gain * qa[5]])
    x0 = np.linalg.solve(Md, params.task_gain * err)
    x1 = _solve_preferring_undamped(M0, Md, task @ rest)
    return JW.T @ (x0 - x1) + rest


def _check_condition(M: np.ndarray, lam2: float) -> None:
    crude = float(np.abs(M).sum())
    if lam2 <= 0.0 or crude / lam2 > _MAX_CONDITION:
        cond = np.linalg.cond(M)
        if not math.isfinite(cond) or cond > _MAX_CONDITION:
            raise SingularSystem(f"constraint system condition {cond:.3e} exceeds {_MAX_CONDITION:.0e}")


def ik_step(q: JointVector, geom: HeadGeometry, target, params: IKParams,
            gesture_row: tuple[np.ndarray, float] | None = None) -> np.ndarray:
    """Joint velocities for one control tick.

    The constraint error is fed back through the damped weighted solve of
    :func:`weighted_dls_solve`; without a gesture row, a nullspace term pulls
    the eye DoFs toward zero (gated by ``params.null_gate``), which makes the
    head slowly re-orient to face the target without disturbing the gaze.

    Args:
        gesture_row: optional ``(selector_row, row_velocity)`` augmentation
            that pins one DoF's velocity (used for nod/shake gestures); the
            nullspace term is suppressed while it is active.

    Returns:
        ``(6,)`` joint velocity, radians/second.
    """
    return _qdot(q.as_array(), geom, _position_of(target), params, gesture_row)


def integrate(q: JointVector, qdot: np.ndarray, dt: float, geom: HeadGeometry) -> JointVector:
    """Euler step; neck angles clamp to their limits, eye angles stay free.

    Eye angles are clamped only at the rendering layer so the controller's
    state remains smooth.
    """
    qa = q.as_array() + dt * np.asarray(qdot)
    qa[0] = min(max(qa[0], -geom.pan_limit), geom.pan_limit)
    qa[1] = min(max(qa[1], -geom.tilt_limit), geom.tilt_limit)
    return JointVector.from_array(qa)


def point_ray_distance(point, origin, direction) -> float:
    """Distance from a point to a forward ray (unit direction assumed)."""
    px, py, pz = (float(v) for v in point)
    ox, oy, oz = (float(v) for v in origin)
    dx, dy, dz = (float(v) for v in direction)
    rx, ry, rz = px - ox, py - oy, pz - oz
    s = rx * dx + ry * dy + rz * dz
    if s <= 0.0:
        return math.sqrt(rx * rx + ry * ry + rz * rz)
    ex, ey, ez = rx - s * dx, ry - s * dy, rz - s * dz
    return math.sqrt(ex * ex + ey * ey + ez * ez)


def gaze_residual(q: JointVector, geom: HeadGeometry, target) -> float:
    """Worst-eye distance from the target to the gaze rays, meters."""
    pos = _position_of(target)
    centers, dirs = forward_kinematics(q, geom)
    return max(point_ray_distance(pos, centers[0], dirs[0]),
               point_ray_distance(pos, centers[1], dirs[1]))


def _residual_arrays(qa: np.ndarray, geom: HeadGeometry, pos) -> float:
    pan, tilt = qa[0], qa[1]
    cp, sp = math.cos(pan), math.sin(pan)
    ct, st = math.cos(tilt), math.sin(tilt)
    fx = geom.eye_forward
    b = geom.eye_half_spacing
    worst = 0.0
    for cy, yaw, pitch in ((-b, qa[2], qa[3]), (b, qa[4], qa[5])):
        # eye center: Rz(pan) @ Ry(-tilt) @ (fx, cy, 0)
        ax, ay, az = ct * fx, cy, st * fx
        ox, oy, oz = cp * ax - sp * ay, sp * ax + cp * ay, az
        cyw, syw = math.cos(yaw), math.sin(yaw)
        cpt, spt = math.cos(pitch), math.sin(pitch)
        gx, gy, gz = cpt * cyw, cpt * syw, spt
        bx, by, bz = ct * gx - st * gz, gy, st * gx + ct * gz
        dx, dy, dz = cp * bx - sp * by, sp * bx + cp * by, bz
        rx, ry, rz = pos[0] - ox, pos[1] - oy, pos[2] - oz
        s = rx * dx + ry * dy + rz * dz
        if s <= 0.0:
            d = math.sqrt(rx * rx + ry * ry + rz * rz)
        else:
            ex, ey, ez = rx - s * dx, ry - s * dy, rz - s * dz
            d = math.sqrt(ex * ex + ey * ey + ez * ez)
        if d > worst:
            worst = d
    return worst


def solve_gaze(q0: JointVector, geom: HeadGeometry, target, params: IKParams | None = None,
               ) -> GazeSolution:
    """Iterate the velocity controller on a static target until the gaze locks.

    Convergence means both gaze rays pass within ``params.tol`` meters of the
    target (measured geometrically, not via the internal error vector).  If
    the target is never reached within ``params.max_ticks`` the best state
    seen is returned with ``converged=False`` and an honest residual.
    """
    params = params or IKParams()
    pos = _position_of(target)
    qa = q0.as_array()
    best_r = _residual_arrays(qa, geom, pos)
    best_q = qa.copy()
    ticks = 0
    if best_r > params.tol:
        for k in range(1, params.max_ticks + 1):
            qa = qa + params.dt * _qdot(qa, geom, pos, params)
            qa[0] = min(max(qa[0], -geom.pan_limit), geom.pan_limit)
            qa[1] = min(max(qa[1], -geom.tilt_limit), geom.tilt_limit)
            r = _residual_arrays(qa, geom, pos)
            if r < best_r:
                best_r = r
                best_q = qa.copy()
            if r <= params.tol:
                ticks = k
                break
        else:
            ticks = params.max_ticks
    q = JointVector.from_array(best_q)
    _, dirs = forward_kinematics(q, geom)
    try:
        pupils = screen_pupil_position(q, geom)
    except GazeOffScreenPlane:
        pupils = np.full((2, 2), math.nan)
    return GazeSolution(q=q, gaze_dirs=dirs, pupil_screen=pupils,
                        converged=best_r <= params.tol, residual=best_r, ticks=ticks)


def screen_pupil_position(q: JointVector, geom: HeadGeometry) -> np.ndarray:
    """Where each gaze ray pierces the screen plane, screen coordinates in meters.

    Screen coordinates: origin at the screen center, u toward the head's left
    (+y), v up (+z).  Values are unclamped; use
    :func:`clamp_pupil_to_screen` before rendering.

    Returns:
        ``(2, 2)`` array of (u, v) per eye, right eye first.

    Raises:
        GazeOffScreenPlane: an eye's forward gaze component is <= 0.01.
    """
    out = np.empty((2, 2))
    for i, (cy, yaw, pitch) in enumerate(((-geom.eye_half_spacing, q.right_yaw, q.right_pitch),
                                          (geom.eye_half_spacing, q.left_yaw, q.left_pitch))):
        g = eye_gaze_head(yaw, pitch)
        if g[0] <= _MIN_FORWARD_GAZE:
            raise GazeOffScreenPlane(f"eye {i} gaze points away from the screen plane")
        t = geom.eye_depth / g[0]
        out[i, 0] = cy + t * g[1]
        out[i, 1] = t * g[2]
    return out


def clamp_pupil_to_screen(pupils: np.ndarray, geom: HeadGeometry) -> np.ndarray:
    """Clamp pupil centers so the whole iris disc stays on the screen.

    Purely a rendering guard; the kinematic state is never altered.
    """
    u_max = geom.screen_width / 2.0 - geom.iris_radius
    v_max = geom.screen_height / 2.0 - geom.iris_radius
    out = np.array(pupils, dtype=float)
    out[:, 0] = np.clip(out[:, 0], -u_max, u_max)
    out[:, 1] = np.clip(out[:, 1], -v_max, v_max)
    return out


def apply_gesture(q: JointVector, geom: HeadGeometry, target, gesture: GestureSpec,
                  t: float, params: IKParams, base_angle: float | None = None) -> np.ndarray:
    """Joint velocities for one tick of a nod/shake gesture with gaze held on target.

    The gesture adds a fifth constraint row that drives the chosen neck DoF
    toward the sinusoidal reference; the remaining DoFs (notably the eyes)
    counter-rotate so the gaze stays on the target.  The nullspace
    re-centering term is suppressed for the whole gesture.

    Args:
        t: seconds since gesture onset, within ``[0, gesture.duration]``.
        base_angle: DoF angle captured at gesture onset; defaults to the
            current angle (correct only at ``t = 0``).
    """
    dof = gesture.dof_index
    current = q.as_tuple()[dof]
    base = current if base_angle is None else base_angle
    ref = gesture.reference_angle(t, base)
    row = np.zeros(6)
    row[dof] = 1.0
    velocity = gesture.tracking_gain * (ref - current)
    return ik_step(q, geom, target, params, gesture_row=(row, velocity))
