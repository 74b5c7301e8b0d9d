// Affine map between the top-down scene canvas and the world table plane.
//
// World: x forward from the robot (meters), y to the robot's left, z up.
// Canvas: the robot sits at the bottom edge looking up the screen, so world
// +x runs up-canvas and world +y runs to the viewer's left:
//
//   canvasX = width / 2 - y * PX_PER_M
//   canvasY = height - MARGIN_PX - (x - X_MIN) * PX_PER_M
//
// Drags are clamped to the table region before they become a target.

export const PX_PER_M = 320;
export const X_MIN = 0.0; // world x at the bottom margin
export const MARGIN_PX = 30;

export const TABLE = {
  xMin: 0.2,
  xMax: 1.0,
  yMin: -0.5,
  yMax: 0.5,
  height: -0.25, // tabletop z; drag targets land on this plane
};

export interface CanvasSize {
  width: number;
  height: number;
}

export function worldToCanvas(
  size: CanvasSize, x: number, y: number,
): [number, number] {
  return [
    size.width / 2 - y * PX_PER_M,
    size.height - MARGIN_PX - (x - X_MIN) * PX_PER_M,
  ];
}

export function canvasToWorld(
  size: CanvasSize, px: number, py: number,
): [number, number] {
  return [
    (size.height - MARGIN_PX - py) / PX_PER_M + X_MIN,
    (size.width / 2 - px) / PX_PER_M,
  ];
}

export function clampToTable(x: number, y: number): [number, number] {
  return [
    Math.min(Math.max(x, TABLE.xMin), TABLE.xMax),
    Math.min(Math.max(y, TABLE.yMin), TABLE.yMax),
  ];
}

// A released drag becomes exactly one target point on the tabletop.
export function dragToTarget(
  size: CanvasSize, px: number, py: number,
): [number, number, number] {
  const [x, y] = canvasToWorld(size, px, py);
  const [cx, cy] = clampToTable(x, y);
  return [cx, cy, TABLE.height];
}
