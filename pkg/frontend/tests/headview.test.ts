import { describe, expect, it } from "vitest";

import {
  IRIS_R, paintHead, PUPIL_R, SCALE, SCREEN_H, SCREEN_W,
} from "../src/headview.js";
import { asCtx, FakeCtx, makeSnapshot } from "./helpers.js";

const IMG = { width: 26, height: 26 } as unknown as CanvasImageSource;
const NO_IMAGES = { right: null, left: null };

describe("head panel painter", () => {
  it("draws solid pupils when the mirror is off", () => {
    const fake = new FakeCtx();
    paintHead(asCtx(fake), makeSnapshot(), NO_IMAGES);
    expect(fake.fillsWith("rgb(8,8,8)")).toHaveLength(2);
    expect(fake.count("drawImage")).toBe(0);
  });

  it("paints the camera image inside both pupils when mirrored", () => {
    const fake = new FakeCtx();
    const snap = makeSnapshot({
      mirror: true,
      overlays: { right: "x", left: "x" },
      expression: {
        mode: "mirror", effective: ["mirror", "mirror"], listening: false,
        processing: false, smiling: false, flash_time: null,
      },
    });
    paintHead(asCtx(fake), snap, { right: IMG, left: IMG });
    expect(fake.count("drawImage")).toBe(2);
    expect(fake.fillsWith("rgb(8,8,8)")).toHaveLength(0);
  });

  it("falls back to solid pupils while the image is still decoding", () => {
    const fake = new FakeCtx();
    const snap = makeSnapshot({
      mirror: true,
      expression: {
        mode: "mirror", effective: ["mirror", "mirror"], listening: false,
        processing: false, smiling: false, flash_time: null,
      },
    });
    paintHead(asCtx(fake), snap, NO_IMAGES);
    expect(fake.count("drawImage")).toBe(0);
    expect(fake.fillsWith("rgb(8,8,8)")).toHaveLength(2);
  });

  it("clips all eye drawing to the screen rectangle", () => {
    const fake = new FakeCtx();
    // pupils at the clamp bounds of the eye raster
    paintHead(asCtx(fake),
              makeSnapshot({ pupil_screen: [[0, 0], [SCREEN_W, SCREEN_H]] }),
              NO_IMAGES);
    const rectIdx = fake.ops.findIndex(
      (o) => o.op === "rect" &&
        o.args[2] === SCREEN_W * SCALE && o.args[3] === SCREEN_H * SCALE);
    const clipIdx = fake.ops.findIndex((o, i) => o.op === "clip" && i > rectIdx);
    expect(rectIdx).toBeGreaterThanOrEqual(0);
    expect(clipIdx).toBeGreaterThan(rectIdx);
    // iris discs still drawn (clipped), not skipped
    const irises = fake.ops.filter(
      (o) => o.op === "arc" && o.args[2] === IRIS_R * SCALE);
    expect(irises.length).toBe(2);
  });

  it("halves the pupil for the small-pupil expression", () => {
    const fake = new FakeCtx();
    const snap = makeSnapshot({
      expression: {
        mode: "small_pupil", effective: ["small_pupil", "small_pupil"],
        listening: false, processing: false, smiling: false, flash_time: null,
      },
    });
    paintHead(asCtx(fake), snap, NO_IMAGES);
    const small = fake.ops.filter(
      (o) => o.op === "arc" && o.args[2] === 0.5 * PUPIL_R * SCALE);
    expect(small.length).toBe(2);
  });

  it("covers a closed eye with a lid instead of discs", () => {
    const fake = new FakeCtx();
    const snap = makeSnapshot({
      expression: {
        mode: "neutral", effective: ["closed", "neutral"], listening: false,
        processing: false, smiling: false, flash_time: null,
      },
    });
    paintHead(asCtx(fake), snap, NO_IMAGES);
    expect(fake.fillsWith("rgb(8,8,8)")).toHaveLength(1); // one open eye
    const lids = fake.ops.filter(
      (o) => o.op === "fillRect" && o.fillStyle === "rgb(120,120,126)");
    expect(lids.length).toBe(1);
  });
});
