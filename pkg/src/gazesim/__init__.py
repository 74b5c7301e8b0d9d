"""Desk-scale simulator for gaze-based robot spatial referencing."""

from .errors import (
    BehindCamera,
    DegenerateTarget,
    EmptyInput,
    GazeOffScreenPlane,
    GazeSimError,
    MissingMirrorInput,
    SingularSystem,
    UnknownEntity,
    UnknownInstruction,
)
from .kinematics import (
    AttentionTarget,
    GazeSolution,
    GestureSpec,
    HeadGeometry,
    IKParams,
    JointVector,
    apply_gesture,
    constraint_error,
    desired_eye_angles,
    forward_kinematics,
    gaze_residual,
    ik_step,
    integrate,
    jacobian,
    screen_pupil_position,
    solve_gaze,
)
from .mirror import (
    CameraFrame,
    CropSpec,
    OverlayFilters,
    RegionOfInterest,
    composite,
    compute_crop,
    compute_scale,
    extract_flip,
    flash_envelope,
)
from .eyes import ExpressionState, EyeFrame, render_eyes, step_expression
from .scene import Scene, SceneObject, SyntheticCamera, default_camera, default_scene
from .scenario import (
    Instruction,
    PlannedAction,
    ScenarioScript,
    TrialMetrics,
    TrialSpec,
    compute_metrics,
    inject_error,
    load_scenario,
    make_block,
    parse_instruction,
    run_block,
)
from .config import SimConfig, default_config, load_config
from .engine import SimEngine

__version__ = "0.1.0"
