/**
 * Lasso selection over slice thumbnails: a region is selected when its
 * thumbnail center falls inside the drawn polygon.
 */

export interface Point {
  x: number;
  y: number;
}

export interface ThumbCenter extends Point {
  region: number;
}

/** Ray-casting point-in-polygon; boundary points count as inside. */
export function pointInPolygon(p: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i];
    const b = polygon[j];
    if (onSegment(p, a, b)) return true;
    const crosses =
      a.y > p.y !== b.y > p.y && p.x < ((b.x - a.x) * (p.y - a.y)) / (b.y - a.y) + a.x;
    if (crosses) inside = !inside;
  }
  return inside;
}

function onSegment(p: Point, a: Point, b: Point): boolean {
  const cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (Math.abs(cross) > 1e-9) return false;
  return (
    Math.min(a.x, b.x) - 1e-9 <= p.x &&
    p.x <= Math.max(a.x, b.x) + 1e-9 &&
    Math.min(a.y, b.y) - 1e-9 <= p.y &&
    p.y <= Math.max(a.y, b.y) + 1e-9
  );
}

/** Region ids (ascending) whose thumbnail centers lie inside the polygon. */
export function lassoSelect(centers: ThumbCenter[], polygon: Point[]): number[] {
  return centers
    .filter((c) => pointInPolygon(c, polygon))
    .map((c) => c.region)
    .sort((a, b) => a - b);
}

/** Screen-space centers of the slice thumbnails under the current layout. */
export function thumbCenters(
  regions: number[][],
  cellSize: number,
  zoom: { k: number; x: number; y: number },
): ThumbCenter[] {
  const out: ThumbCenter[] = [];
  regions.forEach((row, v) => {
    row.forEach((region, h) => {
      out.push({
        region,
        x: zoom.x + (h + 0.5) * cellSize * zoom.k,
        y: zoom.y + (v + 0.5) * cellSize * zoom.k,
      });
    });
  });
  return out;
}
