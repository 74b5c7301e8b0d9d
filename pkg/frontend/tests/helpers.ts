// Shared test scaffolding: a canvas-2d stand-in that records draw calls,
// and a snapshot factory with sane defaults.

import { Snapshot } from "../src/protocol.js";

export interface Op {
  op: string;
  args: unknown[];
  fillStyle: string;
  strokeStyle: string;
}

export class FakeCtx {
  ops: Op[] = [];
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 0;
  font = "";

  private record(op: string, args: unknown[]): void {
    this.ops.push({
      op, args, fillStyle: String(this.fillStyle),
      strokeStyle: String(this.strokeStyle),
    });
  }

  save(): void { this.record("save", []); }
  restore(): void { this.record("restore", []); }
  beginPath(): void { this.record("beginPath", []); }
  rect(...a: number[]): void { this.record("rect", a); }
  fillRect(...a: number[]): void { this.record("fillRect", a); }
  arc(...a: number[]): void { this.record("arc", a); }
  clip(): void { this.record("clip", []); }
  fill(): void { this.record("fill", []); }
  stroke(): void { this.record("stroke", []); }
  moveTo(...a: number[]): void { this.record("moveTo", a); }
  lineTo(...a: number[]): void { this.record("lineTo", a); }
  setLineDash(): void { this.record("setLineDash", []); }
  fillText(...a: unknown[]): void { this.record("fillText", a); }
  drawImage(...a: unknown[]): void { this.record("drawImage", a); }

  count(op: string): number {
    return this.ops.filter((o) => o.op === op).length;
  }

  fillsWith(style: string): Op[] {
    return this.ops.filter((o) => o.op === "fill" && o.fillStyle === style);
  }
}

export function asCtx(fake: FakeCtx): CanvasRenderingContext2D {
  return fake as unknown as CanvasRenderingContext2D;
}

export function makeSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    v: 1,
    tick: 100,
    sim_time: 2.0,
    q: [0, 0, 0, 0, 0, 0],
    pupil_screen: [[60, 35], [180, 35]],
    expression: {
      mode: "neutral",
      effective: ["neutral", "neutral"],
      listening: false,
      processing: false,
      smiling: false,
      flash_time: null,
    },
    action: { phase: "idle", held_object: null },
    scene: {
      red_bottle: [0.45, 0.1, -0.25],
      spray_can: [0.45, -0.1, -0.25],
      red_plate: [0.55, 0.25, -0.25],
      white_plate: [0.55, -0.25, -0.25],
      person: [1.5, 0, 0.3],
    },
    attention: { entity: "person" },
    mirror: false,
    condition: "eyes_only",
    overlays: null,
    events: [],
    warnings: [],
    trials: [],
    ...overrides,
  };
}
