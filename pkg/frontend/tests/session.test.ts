// Scripted end-to-end session against a live gateway: steer the target by
// the drag mapping, issue the misheard-plate request, press STOP while the
// arm hovers over the plate, and check the metrics row records the pressed
// time. Then flip the display condition both ways and confirm the head
// panel switches between plain and mirrored pupils.
//
// Run with NODE_OPTIONS=--experimental-websocket (the npm test script does).

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  buildConditionToggle, buildRequest, buildStop, parseMetricsCsv,
} from "../src/controls.js";
import { paintHead } from "../src/headview.js";
import { ViewModel } from "../src/model.js";
import { Command, Incoming, isSnapshot, Snapshot } from "../src/protocol.js";
import { dragToTarget, worldToCanvas } from "../src/tablemap.js";
import { SCENE_H, SCENE_W } from "../src/sceneview.js";
import { asCtx, FakeCtx } from "./helpers.js";

const PORT = 8620 + (process.pid % 200);
const BASE = `http://127.0.0.1:${PORT}`;

// The action timeline is config data; a compressed one keeps this realtime
// session short while preserving every phase and the stop semantics.
const TIMELINE = {
  onset: 0.0, gaze_pick: 0.1, reach_start: 0.4, gaze_place: 0.7,
  grasped: 1.0, transport_start: 2.0, over_plate: 2.9, released: 3.4,
  completed: 4.2,
};

let server: ChildProcess;
let workdir: string;

beforeAll(async () => {
  if (typeof WebSocket === "undefined") {
    throw new Error("node must run with --experimental-websocket");
  }
  workdir = mkdtempSync(join(tmpdir(), "gazesim-ui-"));
  const cfg = join(workdir, "cfg.json");
  writeFileSync(cfg, JSON.stringify({ timeline: TIMELINE }));
  server = spawn("python3",
                 ["-m", "gazesim.cli", "serve", "--port", String(PORT),
                  "--config", cfg],
                 { stdio: ["ignore", "ignore", "pipe"] });
  let stderr = "";
  server.stderr!.on("data", (chunk) => { stderr += chunk; });
  const deadline = Date.now() + 20000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/config`);
      if (res.ok) break;
    } catch { /* not up yet */ }
    if (Date.now() > deadline) {
      throw new Error(`gateway never came up\n${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
}, 30000);

afterAll(() => {
  server?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

class SessionClient {
  model = new ViewModel();
  seenEvents: [string, number][] = [];
  private queue: Snapshot[] = [];
  private wake: (() => void) | null = null;

  constructor(private ws: WebSocket) {
    ws.addEventListener("message", (ev) => {
      const msg = JSON.parse(String((ev as MessageEvent).data)) as Incoming;
      if (!isSnapshot(msg)) {
        this.model.noteError(msg.error);
        return;
      }
      this.model.applySnapshot(msg, Date.now());
      this.seenEvents.push(...msg.events);
      this.queue.push(msg);
      this.wake?.();
    });
  }

  send(command: Command): void {
    this.ws.send(JSON.stringify(command));
    this.model.noteSent(command, Date.now());
  }

  async until(
    pred: (s: Snapshot) => boolean, timeoutMs: number, label: string,
  ): Promise<Snapshot> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      while (this.queue.length) {
        const snap = this.queue.shift()!;
        if (pred(snap)) return snap;
      }
      if (Date.now() > deadline) throw new Error(`timed out: ${label}`);
      await new Promise<void>((resolve) => {
        this.wake = resolve;
        setTimeout(resolve, 100);
      });
    }
  }
}

function mirrorSnapshot(s: Snapshot): boolean {
  return s.mirror && s.overlays !== null &&
    s.expression.effective[0] === "mirror";
}

describe("scripted live session", () => {
  it("drag, misheard request, STOP over the plate, condition toggle",
     async () => {
    const ws = new WebSocket(`ws://127.0.0.1:${PORT}/ws`);
    const client = new SessionClient(ws);
    await client.until((s) => s.v === 1, 10000, "first snapshot");

    // 1. drag on the scene canvas near the white plate -> one set_target
    const size = { width: SCENE_W, height: SCENE_H };
    const [px, py] = worldToCanvas(size, 0.55, -0.25);
    const target = dragToTarget(size, px, py);
    client.send({
      set_target: { x: target[0], y: target[1], z: target[2] },
    });
    const confirmed = await client.until(
      (s) => !!s.attention.point &&
        Math.abs(s.attention.point[0] - target[0]) < 1e-9 &&
        Math.abs(s.attention.point[1] - target[1]) < 1e-9,
      5000, "target confirmed in attention");
    expect(confirmed.attention.point![2]).toBeCloseTo(target[2], 12);

    // 2. the step-2 misheard request, via the real request builder
    client.send(buildRequest("Put the spray can onto the white plate"));
    const onsetSnap = await client.until(
      (s) => s.events.some(([name]) => name === "onset"),
      5000, "trial onset");
    const trialStart = onsetSnap.sim_time;

    // 3. press STOP while the arm hovers over the plate
    await client.until((s) => s.action.phase === "lower", 15000,
                       "arm over the plate");
    const stopCmd = buildStop(client.model);
    const pressedAt = stopCmd.at as number;
    expect(pressedAt).toBeGreaterThanOrEqual(trialStart + TIMELINE.over_plate);
    client.send(stopCmd);
    const expectedStop = pressedAt - trialStart;

    // 4. the trial finalizes with the pressed-time stop
    const done = await client.until((s) => s.trials.length >= 1, 15000,
                                    "finalized trial");
    const row = done.trials[0];
    expect(row.error_class).toBe("step2");
    expect(row.plan).toEqual(["spray_can", "red_plate"]);
    expect(row.classification).toBe("error_interrupted");
    expect(row.stop_time).toBe(expectedStop);
    expect(client.seenEvents).toContainEqual(["stopped", expectedStop]);
    expect(client.seenEvents).toContainEqual(
      ["placed_down", expectedStop + 1.5]);

    // ... and the metrics endpoint shows the same row
    const csv = await fetch(`${BASE}/metrics.csv`).then((r) => r.text());
    const rows = parseMetricsCsv(csv);
    const step2 = rows.find((r) => r.error_step === "step2");
    expect(step2).toBeDefined();
    expect(step2!.n).toBe(1);
    expect(step2!.mean_s).toBeCloseTo(expectedStop, 5);

    // 5. condition toggle: plain pupils -> mirrored pupils
    client.send(buildConditionToggle(true));
    const mirrored = await client.until(mirrorSnapshot, 5000,
                                        "mirrored snapshot");
    const png = Buffer.from(mirrored.overlays!.right, "base64");
    expect([...png.subarray(0, 4)]).toEqual([0x89, 0x50, 0x4e, 0x47]);

    const img = { width: 26, height: 26 } as unknown as CanvasImageSource;
    const onCtx = new FakeCtx();
    paintHead(asCtx(onCtx), mirrored, { right: img, left: img });
    expect(onCtx.count("drawImage")).toBe(2);
    expect(onCtx.fillsWith("rgb(8,8,8)")).toHaveLength(0);

    // ... and back to plain
    client.send(buildConditionToggle(false));
    const plain = await client.until(
      (s) => !s.mirror && s.overlays === null &&
        s.expression.effective[0] !== "mirror",
      5000, "plain snapshot");
    const offCtx = new FakeCtx();
    paintHead(asCtx(offCtx), plain, { right: null, left: null });
    expect(offCtx.count("drawImage")).toBe(0);
    expect(offCtx.fillsWith("rgb(8,8,8)")).toHaveLength(2);

    ws.close();
  }, 90000);
});
