// Gateway v1 JSON schema: one snapshot per tick on the websocket, one
// single-key command object per user action going the other way.

export interface ExpressionInfo {
  mode: string;
  effective: [string, string]; // [right, left]
  listening: boolean;
  processing: boolean;
  smiling: boolean;
  flash_time: number | null;
}

export interface Snapshot {
  v: 1;
  tick: number;
  sim_time: number;
  q: number[];
  pupil_screen: [number, number][]; // px in the 240x70 eye raster, [right, left]
  expression: ExpressionInfo;
  action: { phase: string; held_object: string | null };
  scene: Record<string, [number, number, number]>;
  attention: { entity?: string; point?: [number, number, number] };
  mirror: boolean;
  condition: string;
  overlays: { right: string; left: string } | null; // base64 PNG
  events: [string, number][];
  warnings: string[];
  trials: TrialRow[];
}

export interface TrialRow {
  instruction: string;
  condition: string;
  error_class: string;
  plan: [string, string];
  stop_time: number | null;
  classification: string;
}

export interface ErrorReply {
  v: 1;
  error: string;
}

export type Incoming = Snapshot | ErrorReply;

export function isSnapshot(msg: Incoming): msg is Snapshot {
  return !("error" in msg);
}

export type Command = Record<string, unknown>;

export function setTargetPoint(x: number, y: number, z: number): Command {
  return { set_target: { x, y, z } };
}

export function setTargetEntity(id: string): Command {
  return { set_target: { entity_id: id } };
}

export function requestInstruction(text: string): Command {
  return { request: { text } };
}

// The stop carries the sim-time the user pressed at, so the recorded
// stop_time is the pressed time, not the arrival tick.
export function stopAction(pressedSimTime: number): Command {
  return { stop: { keyword: "stop" }, at: pressedSimTime };
}

export function gesture(kind: "nod" | "shake"): Command {
  return { gesture: { kind } };
}

export function setMirror(on: boolean): Command {
  return { set_mirror: { on } };
}

export function setExpression(mode: string): Command {
  return { set_expression: { mode } };
}

export function loadScenarioInline(scenario: unknown): Command {
  return { load_scenario: { inline: scenario } };
}
