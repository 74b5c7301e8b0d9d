import { describe, expect, it } from "vitest";

import {
  canvasToWorld, clampToTable, dragToTarget, MARGIN_PX, PX_PER_M, TABLE,
  worldToCanvas,
} from "../src/tablemap.js";

const SIZE = { width: 420, height: 600 };

describe("canvas/world affine map", () => {
  it("puts the canvas horizontal center on the table centerline", () => {
    const [, y] = canvasToWorld(SIZE, SIZE.width / 2, 300);
    expect(y).toBe(0);
  });

  it("matches the documented map at the canvas center", () => {
    const [x, y] = canvasToWorld(SIZE, 210, 300);
    expect(x).toBeCloseTo((600 - MARGIN_PX - 300) / PX_PER_M, 12);
    expect(y).toBe(0);
  });

  it("world +y lands left of center on the canvas", () => {
    const [cx] = worldToCanvas(SIZE, 0.5, 0.3);
    expect(cx).toBeLessThan(SIZE.width / 2);
  });

  it("round-trips world -> canvas -> world exactly", () => {
    for (const [x, y] of [[0.2, -0.5], [0.55, 0.25], [1.0, 0.5], [0.7, 0]]) {
      const [px, py] = worldToCanvas(SIZE, x, y);
      const [bx, by] = canvasToWorld(SIZE, px, py);
      expect(bx).toBeCloseTo(x, 12);
      expect(by).toBeCloseTo(y, 12);
    }
  });

  it("clamps out-of-table drags to the table bounds", () => {
    expect(clampToTable(5, -3)).toEqual([TABLE.xMax, TABLE.yMin]);
    expect(clampToTable(-1, 0.1)).toEqual([TABLE.xMin, 0.1]);
    expect(clampToTable(0.6, 0)).toEqual([0.6, 0]);
  });

  it("a released drag becomes one target on the tabletop plane", () => {
    const [px, py] = worldToCanvas(SIZE, 0.55, -0.25);
    const target = dragToTarget(SIZE, px, py);
    expect(target[0]).toBeCloseTo(0.55, 12);
    expect(target[1]).toBeCloseTo(-0.25, 12);
    expect(target[2]).toBe(TABLE.height);
  });

  it("drags above the table edge clamp onto it", () => {
    const [px, py] = worldToCanvas(SIZE, 1.6, 0); // up by the person
    const target = dragToTarget(SIZE, px, py);
    expect(target[0]).toBe(TABLE.xMax);
  });
});
