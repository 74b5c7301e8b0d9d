"""Command line: serve the gateway, run scripted batches, check configs.

``gazesim serve --config cfg.json --port 8000`` — realtime service.
``gazesim run --scenario block.json --stops 4.66,,14.58 --out results/``
— headless batch: writes ``events.jsonl``, ``metrics.csv``, ``ecdf.csv``
and, with ``--record``, per-tick PNG frames of the eye screen.
``gazesim check --config cfg.json`` — validate a config and exit.

Exit codes: 0 success, 2 bad flags or invalid config/scenario.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .config import load_config
from .engine import POST_COMPLETION_GRACE, SimEngine
from .errors import EmptyInput, GazeSimError
from .eyes import frame_to_png_bytes
from .scenario import compute_metrics, ecdf_csv, load_scenario, metrics_csv

__all__ = ["main", "build_schedule"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazesim",
        description="Gaze-referencing robot head simulator")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("serve", help="run the realtime gateway")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--scenarios", help="directory of scenario JSON files")

    p = sub.add_parser("run", help="execute a scenario headlessly")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--stops", default="",
                   help="comma-separated stop times (s since trial onset), "
                        "one slot per trial; leave a slot empty for no stop")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--record", action="store_true",
                   help="dump a PNG of the eye screen every tick")
    p.add_argument("--config", help="JSON config file")

    p = sub.add_parser("check", help="validate a config file")
    p.add_argument("--config", help="JSON config file (defaults otherwise)")
    return parser


def _parse_stops(text: str, n_trials: int) -> list:
    stops: list = []
    if text.strip():
        for token in text.split(","):
            token = token.strip()
            stops.append(None if token in ("", "none", "-")
                         else float(token))
    if len(stops) > n_trials:
        raise ValueError(f"{len(stops)} stop times for {n_trials} trial(s)")
    stops.extend([None] * (n_trials - len(stops)))
    return stops


def build_schedule(script, stops, spacing: float) -> list[dict]:
    """The command list a batch run issues: one request per trial, spaced
    far enough apart for the previous action to finish, each carrying its
    scripted stop. A live client sending this same list reproduces the
    batch event logs exactly."""
    commands = []
    for i, (trial, stop) in enumerate(zip(script.trials, stops)):
        payload = {"text": trial.instruction.raw}
        if stop is not None:
            payload["stop_at"] = stop
        commands.append({"v": 1, "request": payload, "at": i * spacing})
    return commands


def _cmd_run(args, cfg) -> int:
    script, _scene = load_scenario(args.scenario)
    if not script.trials:
        print("gazesim run: scenario has no trials", file=sys.stderr)
        return 2
    stops = _parse_stops(args.stops, len(script.trials))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frames_dir = out / "frames"
    if args.record:
        frames_dir.mkdir(exist_ok=True)

    engine = SimEngine(cfg)
    engine.enqueue({"load_scenario": {"path": args.scenario}})
    spacing = cfg.timeline["completed"] + POST_COMPLETION_GRACE + 3.0
    for command in build_schedule(script, stops, spacing):
        engine.enqueue(command)

    n = len(script.trials)
    max_ticks = int(math.ceil((n * spacing + 2.0) / cfg.dt))
    for _ in range(max_ticks):
        engine.tick()
        if args.record and engine.last_frame is not None:
            path = frames_dir / f"tick_{engine.tick_index - 1:06d}.png"
            path.write_bytes(frame_to_png_bytes(engine.last_frame))
        if len(engine.trial_logs) == n:
            break

    logs = engine.trial_logs
    with open(out / "events.jsonl", "w", encoding="utf-8") as fh:
        for i, log in enumerate(logs):
            fh.write(json.dumps({
                "trial": i,
                "instruction": log.instruction,
                "condition": log.condition,
                "error_class": log.error_class,
                "plan": list(log.plan),
                "stop_time": log.stop_time,
                "classification": log.classification,
                "events": [[name, t] for name, t in log.events],
            }) + "\n")
    try:
        summary = compute_metrics(logs)
        (out / "metrics.csv").write_text(metrics_csv(summary))
        (out / "ecdf.csv").write_text(ecdf_csv(summary))
    except EmptyInput:
        (out / "metrics.csv").write_text(
            "error_step,condition,n,mean_s,sd_s,min_s,max_s\n")
        (out / "ecdf.csv").write_text("condition,error_step,t_s,F\n")

    for i, log in enumerate(logs):
        stop = "-" if log.stop_time is None else f"{log.stop_time:g}"
        print(f"trial {i}: {log.error_class:5s} stop={stop:6s} "
              f"{log.classification}")
    print(f"wrote {len(logs)} trial log(s) to {out}")
    return 0


def _cmd_check(args, cfg) -> int:
    print(f"config OK: tick_rate={cfg.tick_rate:g} Hz, "
          f"dt={cfg.dt:g} s, stop keywords "
          f"{sorted(cfg.stop_keywords)}")
    return 0


def _cmd_serve(args, cfg) -> int:
    from .server import serve

    serve(cfg, host=args.host, port=args.port, scenario_dir=args.scenarios)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"gazesim: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        if args.subcommand == "run":
            return _cmd_run(args, cfg)
        if args.subcommand == "check":
            return _cmd_check(args, cfg)
        return _cmd_serve(args, cfg)
    except (OSError, GazeSimError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"gazesim {args.subcommand}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
