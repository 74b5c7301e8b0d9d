"""Study protocol runner: instruction parsing, deliberate misinterpretation,
seeded trial blocks, interruption capture, and stop-time metrics.

The robot misunderstands three trigger phrases on purpose — "purple can",
"ketchup bottle", and "white plate" — producing early (wrong object, step 1)
or late (wrong destination, step 2) action errors. Everything else resolves
literally. A standard block holds three trials, one per outcome class, in
seeded-random order.

Summary statistics use the population (not sample) standard deviation; the
CSV column is still named ``sd_s``.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, field

from .errors import EmptyInput, UnknownInstruction
from .scene import Scene, SceneObject, TIMELINE, ArmAction, default_scene, step_action

__all__ = [
    "Instruction",
    "PlannedAction",
    "TrialSpec",
    "ScenarioScript",
    "TrialMetrics",
    "MetricsRow",
    "MetricsSummary",
    "parse_instruction",
    "inject_error",
    "classify",
    "make_block",
    "run_block",
    "compute_metrics",
    "metrics_csv",
    "ecdf_csv",
    "load_scenario",
]

OBJECT_PHRASES = ("red bottle", "purple can", "spray can", "ketchup bottle")
PLATE_PHRASES = ("red plate", "white plate")

# the six instruction forms the study allowed, as (object, plate) pairs
_ALLOWED_PAIRS = frozenset({
    ("red bottle", "red plate"),
    ("purple can", "red plate"),
    ("spray can", "white plate"),
    ("spray can", "red plate"),
    ("ketchup bottle", "red plate"),
    ("red bottle", "white plate"),
})

# trigger phrase -> what the robot actually does with it
_OBJECT_RESOLUTION = {
    "red bottle": ("red_bottle", False),
    "spray can": ("spray_can", False),
    "purple can": ("red_bottle", True),     # wrong object on purpose
    "ketchup bottle": ("spray_can", True),  # wrong object on purpose
}
_PLATE_RESOLUTION = {
    "red plate": ("red_plate", False),
    "white plate": ("red_plate", True),     # wrong destination on purpose
}

CONDITIONS = ("eyes_only", "mirror_eyes")
ERROR_CLASSES = ("none", "step1", "step2")


@dataclass(frozen=True)
class Instruction:
    raw: str
    object_phrase: str
    plate_phrase: str


@dataclass(frozen=True)
class PlannedAction:
    """What the robot will actually do, after deliberate misinterpretation."""

    pick_id: str
    place_id: str
    error_class: str

    def __post_init__(self):
        if self.error_class not in ERROR_CLASSES:
            raise ValueError(f"unknown error class {self.error_class!r}")


@dataclass
class TrialSpec:
    instruction: Instruction
    override: PlannedAction | None = None

    def plan(self) -> PlannedAction:
        return self.override if self.override is not None \
            else inject_error(self.instruction)


@dataclass
class ScenarioScript:
    condition: str
    trials: list[TrialSpec]
    seed: int

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")


@dataclass
class TrialMetrics:
    """Everything recorded about one executed trial."""

    instruction: str
    condition: str
    error_class: str
    plan: tuple[str, str]
    events: list[tuple[str, float]]
    stop_time: float | None
    classification: str


def parse_instruction(text: str, strict: bool = True) -> Instruction:
    """Extract the object and plate phrases from an instruction.

    Strict mode accepts exactly the six study forms ("Put the <object> onto
    the <plate>"), case-insensitively with trailing punctuation tolerated.
    Lenient mode searches for any known object and plate phrase anywhere in
    free-form text.
    """
    normalized = text.strip().lower().rstrip(".!?").strip()
    if strict:
        for obj, plate in _ALLOWED_PAIRS:
            if normalized == f"put the {obj} onto the {plate}":
                return Instruction(raw=text, object_phrase=obj, plate_phrase=plate)
        raise UnknownInstruction(f"not one of the six study instructions: {text!r}")

    found_obj = None
    best = len(normalized) + 1
    for phrase in OBJECT_PHRASES:
        idx = normalized.find(phrase)
        if idx >= 0 and idx < best:
            best, found_obj = idx, phrase
    found_plate = next((p for p in PLATE_PHRASES if p in normalized), None)
    if found_obj is None or found_plate is None:
        raise UnknownInstruction(
            f"could not find an object and plate phrase in {text!r}")
    return Instruction(raw=text, object_phrase=found_obj,
                       plate_phrase=found_plate)


def inject_error(instr: Instruction) -> PlannedAction:
    """Resolve an instruction to a plan, misinterpreting the trigger phrases
    on purpose. A wrong object dominates the classification when a wrong
    destination is also present (the earlier error is what the observer can
    catch first)."""
    pick_id, obj_err = _OBJECT_RESOLUTION[instr.object_phrase]
    place_id, plate_err = _PLATE_RESOLUTION[instr.plate_phrase]
    if obj_err:
        error = "step1"
    elif plate_err:
        error = "step2"
    else:
        error = "none"
    return PlannedAction(pick_id=pick_id, place_id=place_id, error_class=error)


def classify(error_class: str, stop_time: float | None,
             completed: float | None = None) -> str:
    """Outcome class of a trial: did the user stop it, and should they have.

    ``completed`` is the schedule time after which a stop can no longer
    interrupt the error (defaults to the standard schedule's completion).
    """
    if completed is None:
        completed = TIMELINE["completed"]
    if error_class == "none":
        return "correct_uninterrupted" if stop_time is None else "false_stop"
    if stop_time is not None and stop_time < completed:
        return "error_interrupted"
    return "error_missed"


_CORRECT_ROWS = ("Put the red bottle onto the red plate",
                 "Put the spray can onto the red plate")
_STEP1_ROWS = ("Put the purple can onto the red plate",
               "Put the ketchup bottle onto the red plate")
_STEP2_ROWS = ("Put the spray can onto the white plate",
               "Put the red bottle onto the white plate")


def make_block(condition: str, seed: int) -> ScenarioScript:
    """Standard three-trial block: one correct, one early-error, one
    late-error instruction, in seeded-random order."""
    rng = random.Random(seed)
    texts = [rng.choice(_CORRECT_ROWS), rng.choice(_STEP1_ROWS),
             rng.choice(_STEP2_ROWS)]
    rng.shuffle(texts)
    trials = [TrialSpec(instruction=parse_instruction(t)) for t in texts]
    return ScenarioScript(condition=condition, trials=trials, seed=seed)


def run_block(script: ScenarioScript, stops, dt: float = 0.02,
              on_tick=None) -> list[TrialMetrics]:
    """Execute every trial of a block and record events and classification.

    ``stops`` gives one optional stop time (seconds since trial onset) per
    trial. The stop is injected at the first tick that reaches it but takes
    effect — and is recorded — at its exact requested time. ``on_tick``,
    when given, is called as ``on_tick(trial_index, t, action, attention)``
    after every tick (the gateway uses this to drive rendering).
    """
    stops = list(stops) + [None] * (len(script.trials) - len(stops))
    logs: list[TrialMetrics] = []
    for index, trial in enumerate(script.trials):
        plan_spec = trial.plan()
        plan = (plan_spec.pick_id, plan_spec.place_id)
        stop_at = stops[index]
        t_end = 22.0 if stop_at is None else max(22.0, stop_at + 3.0)
        action = ArmAction()
        events: list[tuple[str, float]] = []
        stop_sent = False
        k = 0
        t = 0.0
        while t <= t_end:
            stop = None
            if stop_at is not None and not stop_sent and t >= stop_at:
                stop = stop_at
                stop_sent = True
            action, attention, evs = step_action(action, plan, t,
                                                 stop_requested=stop)
            events.extend(evs)
            if on_tick is not None:
                on_tick(index, t, action, attention)
            k += 1
            t = k * dt
        stop_time = stop_at if stop_sent else None
        logs.append(TrialMetrics(
            instruction=trial.instruction.raw,
            condition=script.condition,
            error_class=plan_spec.error_class,
            plan=plan,
            events=events,
            stop_time=stop_time,
            classification=classify(plan_spec.error_class, stop_time)))
    return logs


@dataclass(frozen=True)
class MetricsRow:
    error_step: str
    condition: str
    n: int
    mean: float
    sd: float
    min: float
    max: float


@dataclass
class MetricsSummary:
    rows: list[MetricsRow]
    ecdf: dict[tuple[str, str], list[tuple[float, float]]]


def compute_metrics(logs) -> MetricsSummary:
    """Stop-time statistics per (error step, condition): count, mean,
    population SD, extrema, and the cumulative distribution of stop times
    as sorted (t, fraction stopped by t) pairs."""
    logs = list(logs)
    if not logs:
        raise EmptyInput("no trial logs to summarize")
    groups: dict[tuple[str, str], list[float]] = {}
    for log in logs:
        if log.stop_time is None:
            continue
        groups.setdefault((log.error_class, log.condition), []).append(
            log.stop_time)

    rows = []
    ecdf: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for (err, cond) in sorted(groups):
        xs = groups[(err, cond)]
        rows.append(MetricsRow(
            error_step=err, condition=cond, n=len(xs),
            mean=statistics.fmean(xs), sd=statistics.pstdev(xs),
            min=min(xs), max=max(xs)))
        ordered = sorted(xs)
        points = []
        seen = 0
        for i, x in enumerate(ordered):
            seen = i + 1
            if i + 1 == len(ordered) or ordered[i + 1] != x:
                points.append((x, seen / len(ordered)))
        ecdf[(cond, err)] = points
    return MetricsSummary(rows=rows, ecdf=ecdf)


def metrics_csv(summary: MetricsSummary) -> str:
    lines = ["error_step,condition,n,mean_s,sd_s,min_s,max_s"]
    for r in summary.rows:
        lines.append(f"{r.error_step},{r.condition},{r.n},"
                     f"{r.mean:.6f},{r.sd:.6f},{r.min:.6f},{r.max:.6f}")
    return "\n".join(lines) + "\n"


def ecdf_csv(summary: MetricsSummary) -> str:
    lines = ["condition,error_step,t_s,F"]
    for (cond, err) in sorted(summary.ecdf):
        for t, f in summary.ecdf[(cond, err)]:
            lines.append(f"{cond},{err},{t:.6f},{f:.6f}")
    return "\n".join(lines) + "\n"


def load_scenario(source) -> tuple[ScenarioScript, Scene]:
    """Load a scenario file (path) or inline dict: condition, seed, trials
    (instruction text plus optional plan override), and an optional scene
    layout replacing the default."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)

    trials = []
    for entry in data.get("trials", []):
        instr = parse_instruction(entry["instruction"])
        override = None
        if "override" in entry:
            ov = entry["override"]
            override = PlannedAction(pick_id=ov["pick_id"],
                                     place_id=ov["place_id"],
                                     error_class=ov["error_class"])
        trials.append(TrialSpec(instruction=instr, override=override))
    script = ScenarioScript(condition=data["condition"], trials=trials,
                            seed=int(data.get("seed", 0)))

    if "scene" in data:
        spec = data["scene"]
        objects = []
        for obj in spec.get("objects", []):
            objects.append(SceneObject(
                id=obj["id"], label=obj["label"],
                color=tuple(obj["color"]), shape=obj["shape"],
                position=obj["position"], graspable=bool(obj["graspable"]),
                radius=float(obj.get("radius", 0.05)),
                inner_radius=obj.get("inner_radius"),
                height=obj.get("height"),
                blur_on_mirror=bool(obj.get("blur_on_mirror", False))))
        scene = Scene(objects=objects,
                      table_height=float(spec.get("table_height", -0.25)))
    else:
        scene = default_scene()
    return script, scene
