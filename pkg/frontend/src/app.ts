// Page wiring: one websocket, render on every snapshot, one command per
// user action. All simulation truth lives server-side; this file only
// decodes snapshots, paints, and forwards clicks.

import {
  buildConditionToggle, buildRequest, buildStop, conditionLabel,
  INSTRUCTIONS, paintEcdf, parseEcdfCsv, parseMetricsCsv, trialSummaryLine,
} from "./controls.js";
import { headCanvasSize, paintHead } from "./headview.js";
import { ViewModel } from "./model.js";
import { Command, Incoming, isSnapshot } from "./protocol.js";
import {
  bindScenePointer, paintScene, SCENE_H, SCENE_W,
} from "./sceneview.js";

const model = new ViewModel();

const banner = document.getElementById("banner")!;
const conditionEl = document.getElementById("condition-label")!;
const headCanvas = document.getElementById("head-canvas") as HTMLCanvasElement;
const sceneCanvas = document.getElementById("scene-canvas") as HTMLCanvasElement;
const ecdfCanvas = document.getElementById("ecdf-canvas") as HTMLCanvasElement;
const scenarioSelect = document.getElementById("scenario-select") as HTMLSelectElement;
const requestsEl = document.getElementById("requests")!;
const stopBtn = document.getElementById("stop-btn")!;
const mirrorToggle = document.getElementById("mirror-toggle") as HTMLInputElement;
const trialsEl = document.getElementById("trials")!;
const metricsEl = document.getElementById("metrics")!;
const warningsEl = document.getElementById("warnings")!;
const phaseEl = document.getElementById("phase")!;
const clockEl = document.getElementById("clock")!;

const [headW, headH] = headCanvasSize();
headCanvas.width = headW;
headCanvas.height = headH;
sceneCanvas.width = SCENE_W;
sceneCanvas.height = SCENE_H;
const headCtx = headCanvas.getContext("2d")!;
const sceneCtx = sceneCanvas.getContext("2d")!;
const ecdfCtx = ecdfCanvas.getContext("2d")!;

let ws: WebSocket | null = null;
let preview: [number, number] | null = null;
let trialsSeen = 0;

// decoded pupil overlays, keyed by the exact base64 payload
let overlayKey = "";
let overlayImage: HTMLImageElement | null = null;

function send(command: Command): void {
  if (ws && ws.readyState === WebSocket.OPEN) {
    ws.send(JSON.stringify(command));
    model.noteSent(command, Date.now());
  }
}

function decodeOverlays(b64: string | undefined): void {
  if (!b64 || b64 === overlayKey) return;
  overlayKey = b64;
  const img = new Image();
  img.onload = () => { overlayImage = img; };
  img.src = `data:image/png;base64,${b64}`;
}

function render(): void {
  const snap = model.snapshot;
  if (!snap) return;
  decodeOverlays(snap.overlays?.right);
  const image = snap.overlays ? overlayImage : null;
  paintHead(headCtx, snap, { right: image, left: image });
  paintScene(sceneCtx, { width: SCENE_W, height: SCENE_H }, snap, preview);

  conditionEl.textContent = conditionLabel(snap.mirror);
  mirrorToggle.checked = snap.mirror;
  phaseEl.textContent = snap.action.phase +
    (snap.action.held_object ? ` (holding ${snap.action.held_object})` : "");
  clockEl.textContent = `${snap.sim_time.toFixed(2)} s`;

  if (snap.warnings.length || model.protocolErrors.length) {
    warningsEl.textContent =
      [...model.protocolErrors.slice(-3), ...snap.warnings].join(" · ");
  }

  if (snap.trials.length !== trialsSeen) {
    trialsSeen = snap.trials.length;
    trialsEl.innerHTML = "";
    snap.trials.forEach((row, i) => {
      const li = document.createElement("li");
      li.textContent = `#${i + 1} ${row.instruction} — ${trialSummaryLine(row)}`;
      trialsEl.appendChild(li);
    });
    void refreshMetrics();
  }
}

async function refreshMetrics(): Promise<void> {
  const [metricsText, ecdfText] = await Promise.all([
    fetch("/metrics.csv").then((r) => r.text()),
    fetch("/ecdf.csv").then((r) => r.text()),
  ]);
  const rows = parseMetricsCsv(metricsText);
  metricsEl.innerHTML =
    "<tr><th>step</th><th>cond</th><th>n</th><th>mean</th><th>sd</th></tr>" +
    rows.map((r) =>
      `<tr><td>${r.error_step}</td><td>${r.condition}</td><td>${r.n}</td>` +
      `<td>${r.mean_s.toFixed(2)}</td><td>${r.sd_s.toFixed(2)}</td></tr>`,
    ).join("");
  paintEcdf(ecdfCtx, ecdfCanvas.width, ecdfCanvas.height,
            parseEcdfCsv(ecdfText));
}

function connect(): void {
  ws = new WebSocket(`ws://${location.host}/ws`);
  ws.onmessage = (ev) => {
    const msg = JSON.parse(ev.data) as Incoming;
    if (isSnapshot(msg)) {
      model.applySnapshot(msg, Date.now());
      render();
    } else {
      model.noteError(msg.error);
    }
  };
  ws.onclose = () => {
    model.disconnected();
    setTimeout(connect, 1000);
  };
}

async function loadScenarioList(): Promise<void> {
  const body = await fetch("/scenarios").then((r) => r.json());
  for (const entry of body.scenarios) {
    const opt = document.createElement("option");
    opt.value = entry.name;
    opt.textContent = entry.name;
    scenarioSelect.appendChild(opt);
  }
}

scenarioSelect.addEventListener("change", async () => {
  const name = scenarioSelect.value;
  if (!name) return;
  const scenario = await fetch(`/scenarios/${name}`).then((r) => r.json());
  model.selectedScenario = name;
  send({ load_scenario: { inline: scenario } });
});

for (const text of INSTRUCTIONS) {
  const btn = document.createElement("button");
  btn.textContent = text;
  btn.addEventListener("click", () => send(buildRequest(text)));
  requestsEl.appendChild(btn);
}

stopBtn.addEventListener("click", () => send(buildStop(model)));

mirrorToggle.addEventListener("change", () => {
  send(buildConditionToggle(mirrorToggle.checked));
  conditionEl.textContent = conditionLabel(mirrorToggle.checked);
});

bindScenePointer(
  sceneCanvas, { width: SCENE_W, height: SCENE_H },
  (target) => send({ set_target: { x: target[0], y: target[1], z: target[2] } }),
  (p) => { preview = p; render(); },
);

setInterval(() => {
  banner.classList.toggle("visible", model.isStale(Date.now()));
}, 250);

connect();
void loadScenarioList();
