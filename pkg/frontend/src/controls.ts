// Trial controls: the six task sentences as request buttons, the STOP
// control, the display-condition toggle, and the metrics panel fed from the
// gateway's CSV endpoints.

import { ViewModel } from "./model.js";
import {
  Command, TrialRow, requestInstruction, setMirror, stopAction,
} from "./protocol.js";

export const INSTRUCTIONS = [
  "Put the red bottle onto the red plate",
  "Put the purple can onto the red plate",
  "Put the spray can onto the white plate",
  "Put the spray can onto the red plate",
  "Put the ketchup bottle onto the red plate",
  "Put the red bottle onto the white plate",
];

export const CONDITION_LABELS: Record<string, string> = {
  eyes_only: "Eyes Only",
  mirror_eyes: "Mirror Eyes",
};

export function buildRequest(text: string): Command {
  return requestInstruction(text);
}

// STOP is stamped with the sim-time of the snapshot on screen when pressed.
export function buildStop(model: ViewModel): Command {
  return stopAction(model.simTime());
}

export function buildConditionToggle(mirrorOn: boolean): Command {
  return setMirror(mirrorOn);
}

export function conditionLabel(mirrorOn: boolean): string {
  return CONDITION_LABELS[mirrorOn ? "mirror_eyes" : "eyes_only"];
}

// ---- metrics ------------------------------------------------------------

export interface MetricsRow {
  error_step: string;
  condition: string;
  n: number;
  mean_s: number;
  sd_s: number;
  min_s: number;
  max_s: number;
}

export function parseMetricsCsv(text: string): MetricsRow[] {
  const lines = text.trim().split("\n");
  if (lines.length < 2) return [];
  return lines.slice(1).map((line) => {
    const [error_step, condition, n, mean_s, sd_s, min_s, max_s] =
      line.split(",");
    return {
      error_step, condition, n: Number(n), mean_s: Number(mean_s),
      sd_s: Number(sd_s), min_s: Number(min_s), max_s: Number(max_s),
    };
  });
}

export interface EcdfSeries {
  condition: string;
  error_step: string;
  points: [number, number][]; // (t_s, F)
}

export function parseEcdfCsv(text: string): EcdfSeries[] {
  const lines = text.trim().split("\n");
  const series = new Map<string, EcdfSeries>();
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const [condition, error_step, t, f] = line.split(",");
    const key = `${condition}/${error_step}`;
    if (!series.has(key)) series.set(key, { condition, error_step, points: [] });
    series.get(key)!.points.push([Number(t), Number(f)]);
  }
  return [...series.values()];
}

export function trialSummaryLine(row: TrialRow): string {
  const stop = row.stop_time === null ? "—" : `${row.stop_time.toFixed(2)} s`;
  return `${row.error_class} · stop ${stop} · ${row.classification}`;
}

const SERIES_COLORS = ["rgb(90,210,255)", "rgb(255,170,60)",
                      "rgb(150,230,120)", "rgb(240,110,160)"];

// Small step-plot of the stop-time ECDFs, one polyline per
// (condition, error step) series.
export function paintEcdf(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  series: EcdfSeries[],
): void {
  ctx.save();
  ctx.fillStyle = "rgb(24,26,30)";
  ctx.fillRect(0, 0, width, height);
  const tMax = Math.max(1, ...series.flatMap((s) => s.points.map((p) => p[0])));
  series.forEach((s, idx) => {
    ctx.strokeStyle = SERIES_COLORS[idx % SERIES_COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let lastY = height - 4;
    ctx.moveTo(2, lastY);
    for (const [t, f] of s.points) {
      const x = 2 + (t / tMax) * (width - 6);
      const y = height - 4 - f * (height - 10);
      ctx.lineTo(x, lastY); // horizontal run, then the jump
      ctx.lineTo(x, y);
      lastY = y;
    }
    ctx.lineTo(width - 2, lastY);
    ctx.stroke();
  });
  ctx.restore();
}
