// Top-down table view: the scene drawn from the snapshot's entity
// positions, the robot's current attention, and the drag affordance that
// turns a pointer release into one set_target command.

import { Snapshot } from "./protocol.js";
import {
  CanvasSize, PX_PER_M, TABLE, dragToTarget, worldToCanvas,
} from "./tablemap.js";

export const SCENE_W = 420;
export const SCENE_H = 600;

// Presentation only — truth about positions always comes from the snapshot.
const STYLE: Record<string, { color: string; radius: number; plate?: boolean }> = {
  red_bottle: { color: "rgb(178,34,34)", radius: 0.035 },
  spray_can: { color: "rgb(128,60,160)", radius: 0.03 },
  red_plate: { color: "rgb(200,40,40)", radius: 0.11, plate: true },
  white_plate: { color: "rgb(235,235,235)", radius: 0.11, plate: true },
  person: { color: "rgb(215,180,140)", radius: 0.2 },
};
const FALLBACK = { color: "rgb(150,150,150)", radius: 0.05 };

export function paintScene(
  ctx: CanvasRenderingContext2D,
  size: CanvasSize,
  snap: Snapshot,
  preview: [number, number] | null, // canvas px while a drag is in flight
): void {
  ctx.save();
  ctx.fillStyle = "rgb(24,26,30)";
  ctx.fillRect(0, 0, size.width, size.height);

  // tabletop
  const [tx0, ty0] = worldToCanvas(size, TABLE.xMax, TABLE.yMax);
  const [tx1, ty1] = worldToCanvas(size, TABLE.xMin, TABLE.yMin);
  ctx.fillStyle = "rgb(110,105,98)";
  ctx.fillRect(tx0, ty0, tx1 - tx0, ty1 - ty0);

  // robot head at the origin, facing up the canvas
  const [rx, ry] = worldToCanvas(size, 0, 0);
  ctx.fillStyle = "rgb(70,120,180)";
  ctx.beginPath();
  ctx.arc(rx, ry, 14, 0, 2 * Math.PI);
  ctx.fill();

  const plates = Object.entries(snap.scene)
    .sort(([a], [b]) => Number(!!STYLE[b]?.plate) - Number(!!STYLE[a]?.plate));
  for (const [id, pos] of plates) {
    const style = STYLE[id] ?? FALLBACK;
    const [cx, cy] = worldToCanvas(size, pos[0], pos[1]);
    ctx.beginPath();
    ctx.arc(cx, cy, style.radius * PX_PER_M, 0, 2 * Math.PI);
    ctx.fillStyle = style.color;
    ctx.fill();
    if (style.plate) {
      ctx.beginPath();
      ctx.arc(cx, cy, 0.077 * PX_PER_M, 0, 2 * Math.PI);
      ctx.strokeStyle = "rgba(0,0,0,0.25)";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    if (id === snap.action.held_object) {
      ctx.beginPath();
      ctx.arc(cx, cy, style.radius * PX_PER_M + 5, 0, 2 * Math.PI);
      ctx.strokeStyle = "rgb(255,200,60)";
      ctx.lineWidth = 3;
      ctx.stroke();
    }
  }

  // where the robot is attending: ring an entity, crosshair a point.
  // The marker follows the snapshot, never the raw click.
  if (snap.attention.entity && snap.scene[snap.attention.entity]) {
    const pos = snap.scene[snap.attention.entity];
    const style = STYLE[snap.attention.entity] ?? FALLBACK;
    const [cx, cy] = worldToCanvas(size, pos[0], pos[1]);
    ctx.beginPath();
    ctx.arc(cx, cy, style.radius * PX_PER_M + 9, 0, 2 * Math.PI);
    ctx.strokeStyle = "rgb(90,210,255)";
    ctx.lineWidth = 2;
    ctx.setLineDash([6, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
  } else if (snap.attention.point) {
    const [cx, cy] = worldToCanvas(
      size, snap.attention.point[0], snap.attention.point[1]);
    ctx.strokeStyle = "rgb(90,210,255)";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(cx - 10, cy);
    ctx.lineTo(cx + 10, cy);
    ctx.moveTo(cx, cy - 10);
    ctx.lineTo(cx, cy + 10);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(cx, cy, 7, 0, 2 * Math.PI);
    ctx.stroke();
  }

  if (preview) {
    ctx.beginPath();
    ctx.arc(preview[0], preview[1], 8, 0, 2 * Math.PI);
    ctx.strokeStyle = "rgba(255,255,255,0.5)";
    ctx.lineWidth = 1;
    ctx.stroke();
  }

  ctx.fillStyle = "rgba(255,255,255,0.45)";
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillText("drag on the table to steer the robot's attention",
               10, size.height - 8);
  ctx.restore();
}

// One set_target per pointer-up; moves only update the preview marker.
export function bindScenePointer(
  canvas: HTMLCanvasElement,
  size: CanvasSize,
  onTarget: (target: [number, number, number]) => void,
  onPreview: (p: [number, number] | null) => void,
): void {
  let dragging = false;
  const local = (ev: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  };
  canvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    canvas.setPointerCapture(ev.pointerId);
    onPreview(local(ev));
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (dragging) onPreview(local(ev));
  });
  canvas.addEventListener("pointerup", (ev) => {
    if (!dragging) return;
    dragging = false;
    const [px, py] = local(ev);
    onPreview(null);
    onTarget(dragToTarget(size, px, py));
  });
}
