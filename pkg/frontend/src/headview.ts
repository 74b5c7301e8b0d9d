// Front view of the robot's screen face, drawn purely from the latest
// snapshot: screen rectangle, one iris/pupil disc pair per eye at the
// snapshot's pupil pixel positions, and the camera overlay painted inside
// the pupils when the eyes are mirrored.

import { Snapshot } from "./protocol.js";

export const SCREEN_W = 240; // eye raster px
export const SCREEN_H = 70;
export const SCALE = 3; // canvas px per raster px
export const IRIS_R = 14; // raster px
export const PUPIL_R = 12.3;

const SCREEN_BG = "rgb(12,12,16)";
const IRIS = "rgb(86,155,210)";
const PUPIL = "rgb(8,8,8)";
const LID = "rgb(120,120,126)";
const LISTENING = "rgb(64,200,96)";
const SMILE = "rgb(230,200,90)";

export interface OverlayImages {
  right: CanvasImageSource | null;
  left: CanvasImageSource | null;
}

export function headCanvasSize(): [number, number] {
  return [SCREEN_W * SCALE + 40, SCREEN_H * SCALE + 40];
}

export function paintHead(
  ctx: CanvasRenderingContext2D,
  snap: Snapshot,
  overlays: OverlayImages,
): void {
  const [w, h] = headCanvasSize();
  const ox = 20; // screen origin on the canvas
  const oy = 20;

  ctx.save();
  ctx.fillStyle = "rgb(40,40,46)"; // head plate behind the screen
  ctx.fillRect(0, 0, w, h);
  ctx.fillStyle = SCREEN_BG;
  ctx.fillRect(ox, oy, SCREEN_W * SCALE, SCREEN_H * SCALE);

  // everything eye-shaped stays inside the screen, even at clamp bounds
  ctx.beginPath();
  ctx.rect(ox, oy, SCREEN_W * SCALE, SCREEN_H * SCALE);
  ctx.clip();

  const sides: ("right" | "left")[] = ["right", "left"];
  for (let i = 0; i < 2; i++) {
    const mode = snap.expression.effective[i];
    const [px, py] = snap.pupil_screen[i];
    const cx = ox + px * SCALE;
    const cy = oy + py * SCALE;

    if (mode === "closed") {
      ctx.fillStyle = LID;
      ctx.fillRect(ox + (i === 0 ? 0 : (SCREEN_W / 2) * SCALE), oy,
                   (SCREEN_W / 2) * SCALE, SCREEN_H * SCALE);
      continue;
    }

    ctx.beginPath();
    ctx.arc(cx, cy, IRIS_R * SCALE, 0, 2 * Math.PI);
    ctx.fillStyle = mode === "listening" ? LISTENING : IRIS;
    ctx.fill();

    const pupilR = (mode === "small_pupil" ? 0.5 : 1) * PUPIL_R * SCALE;
    const image = overlays[sides[i]];
    if (mode === "mirror" && image) {
      // the mirrored camera patch fills the pupil disc
      ctx.save();
      ctx.beginPath();
      ctx.arc(cx, cy, pupilR, 0, 2 * Math.PI);
      ctx.clip();
      ctx.drawImage(image, cx - pupilR, cy - pupilR, 2 * pupilR, 2 * pupilR);
      ctx.restore();
    } else {
      ctx.beginPath();
      ctx.arc(cx, cy, pupilR, 0, 2 * Math.PI);
      ctx.fillStyle = PUPIL;
      ctx.fill();
    }

    if (snap.expression.flash_time !== null && snap.expression.flash_time < 0.4) {
      ctx.beginPath();
      ctx.arc(cx, cy, pupilR + 2, 0, 2 * Math.PI);
      ctx.strokeStyle = "rgba(255,255,255,0.8)";
      ctx.lineWidth = 3;
      ctx.stroke();
    }

    if (mode === "smile_positive") {
      ctx.beginPath();
      ctx.arc(cx, cy + 4 * SCALE, IRIS_R * SCALE, 0.15 * Math.PI,
              0.85 * Math.PI);
      ctx.strokeStyle = SMILE;
      ctx.lineWidth = 2 * SCALE;
      ctx.stroke();
    }

    if (mode === "loading") {
      const phase = (snap.sim_time % 1) * 2 * Math.PI; // one turn per second
      ctx.beginPath();
      ctx.arc(cx, cy, (IRIS_R + 3) * SCALE, phase, phase + 0.6 * Math.PI);
      ctx.strokeStyle = "rgb(200,200,210)";
      ctx.lineWidth = SCALE;
      ctx.stroke();
    }
  }

  if (snap.expression.listening) {
    ctx.fillStyle = LISTENING;
    for (let k = -1; k <= 1; k++) {
      ctx.beginPath();
      ctx.arc(ox + (SCREEN_W / 2 + k * 8) * SCALE,
              oy + (SCREEN_H - 6) * SCALE, SCALE * 2, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  ctx.restore();
}
