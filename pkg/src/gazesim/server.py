"""Realtime service: one simulation, many clients.

A single background task owns the engine and advances it at the configured
tick rate, pacing by the event-loop clock; every tick's snapshot is pushed
as one JSON text message to every connected WebSocket client. Clients send
command objects on the same socket; a malformed command earns an error
reply on that session only and never touches the loop. Sim-time is
authoritative — wall time only decides when ticks fire, never what they
compute.

Endpoints: ``/ws`` (snapshot stream + commands), ``GET /config``,
``GET /scenarios``, ``GET /scenarios/{name}``, ``GET /metrics.csv``,
``GET /ecdf.csv``.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .config import SimConfig, config_to_dict, default_config
from .engine import SimEngine
from .errors import EmptyInput
from .scenario import compute_metrics, ecdf_csv, make_block, metrics_csv

__all__ = ["create_app", "serve"]

_QUEUE_LIMIT = 256  # per-client backlog before old snapshots are dropped

_BUILTIN_SCENARIOS = ("block-eyes-only", "block-mirror-eyes")


def _builtin_scenario(name: str, seed: int = 0) -> dict | None:
    condition = {"block-eyes-only": "eyes_only",
                 "block-mirror-eyes": "mirror_eyes"}.get(name)
    if condition is None:
        return None
    block = make_block(condition, seed=seed)
    return {
        "condition": block.condition,
        "seed": block.seed,
        "trials": [{"instruction": t.instruction.raw} for t in block.trials],
    }


def create_app(config: SimConfig | None = None,
               scenario_dir: str | Path | None = None) -> FastAPI:
    """Build the ASGI app. The tick loop starts with the app's lifespan."""
    config = config or default_config()
    engine = SimEngine(config)
    clients: set[asyncio.Queue] = set()

    async def _tick_loop():
        loop = asyncio.get_running_loop()
        dt = config.dt
        next_t = loop.time()
        while True:
            snapshot = engine.tick()
            text = json.dumps(snapshot, separators=(",", ":"))
            for q in list(clients):
                if q.full():
                    with contextlib.suppress(asyncio.QueueEmpty):
                        q.get_nowait()
                q.put_nowait(text)
            next_t += dt
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # fell behind; resynchronize instead of spiraling
                next_t = loop.time()
                await asyncio.sleep(0)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(_tick_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(title="gazesim gateway", lifespan=lifespan)
    app.state.engine = engine
    app.state.config = config

    async def _pump(socket: WebSocket, queue: asyncio.Queue):
        while True:
            await socket.send_text(await queue.get())

    @app.websocket("/ws")
    async def ws_endpoint(socket: WebSocket):
        await socket.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=_QUEUE_LIMIT)
        clients.add(queue)
        sender = asyncio.create_task(_pump(socket, queue))
        try:
            while True:
                text = await socket.receive_text()
                try:
                    engine.enqueue(json.loads(text))
                except (json.JSONDecodeError, ValueError) as exc:
                    reply = json.dumps({"v": 1, "error": str(exc)})
                    queue.put_nowait(reply)
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(queue)
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender

    @app.get("/config")
    async def get_config():
        return JSONResponse(config_to_dict(config))

    @app.get("/scenarios")
    async def list_scenarios():
        entries = [{"name": n, "source": "builtin"}
                   for n in _BUILTIN_SCENARIOS]
        if scenario_dir is not None:
            for path in sorted(Path(scenario_dir).glob("*.json")):
                entries.append({"name": path.stem, "source": str(path)})
        return JSONResponse({"scenarios": entries})

    @app.get("/scenarios/{name}")
    async def get_scenario(name: str):
        builtin = _builtin_scenario(name)
        if builtin is not None:
            return JSONResponse(builtin)
        if scenario_dir is not None:
            path = Path(scenario_dir) / f"{name}.json"
            if path.is_file():
                return JSONResponse(json.loads(path.read_text()))
        return JSONResponse({"error": f"no scenario {name!r}"},
                            status_code=404)

    @app.get("/metrics.csv")
    async def get_metrics():
        try:
            body = metrics_csv(compute_metrics(engine.trial_logs))
        except EmptyInput:
            body = "error_step,condition,n,mean_s,sd_s,min_s,max_s\n"
        return PlainTextResponse(body, media_type="text/csv")

    @app.get("/ecdf.csv")
    async def get_ecdf():
        try:
            body = ecdf_csv(compute_metrics(engine.trial_logs))
        except EmptyInput:
            body = "condition,error_step,t_s,F\n"
        return PlainTextResponse(body, media_type="text/csv")

    return app


def serve(config: SimConfig | None = None, host: str = "127.0.0.1",
          port: int = 8000, scenario_dir=None) -> None:
    """Blocking entry point: run the gateway under uvicorn."""
    import uvicorn

    app = create_app(config, scenario_dir=scenario_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
