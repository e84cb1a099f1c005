/** Viewport transform: world (layout units) to screen pixels. Always invertible
 * because scale stays positive. */

export interface Transform {
  scale: number;
  tx: number;
  ty: number;
}

export const identity: Transform = { scale: 1, tx: 0, ty: 0 };

export function apply(t: Transform, x: number, y: number): [number, number] {
  return [x * t.scale + t.tx, y * t.scale + t.ty];
}

export function invert(t: Transform, sx: number, sy: number): [number, number] {
  return [(sx - t.tx) / t.scale, (sy - t.ty) / t.scale];
}

export function pan(t: Transform, dx: number, dy: number): Transform {
  return { scale: t.scale, tx: t.tx + dx, ty: t.ty + dy };
}

/** Zoom by a factor keeping the given screen point fixed. */
export function zoomAt(t: Transform, factor: number, sx: number, sy: number): Transform {
  const scale = clampScale(t.scale * factor);
  const applied = scale / t.scale;
  return {
    scale,
    tx: sx - (sx - t.tx) * applied,
    ty: sy - (sy - t.ty) * applied,
  };
}

/** Transform that centers a world point at the given screen size and scale. */
export function focusOn(
  x: number,
  y: number,
  width: number,
  height: number,
  scale: number,
): Transform {
  const s = clampScale(scale);
  return { scale: s, tx: width / 2 - x * s, ty: height / 2 - y * s };
}

/** Fit a world bounding box into the screen with a margin. */
export function fitBounds(
  minX: number,
  minY: number,
  maxX: number,
  maxY: number,
  width: number,
  height: number,
  margin = 40,
): Transform {
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const scale = clampScale(
    Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY),
  );
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return focusOn(cx, cy, width, height, scale);
}

function clampScale(scale: number): number {
  return Math.min(Math.max(scale, 1e-4), 1e4);
}
