/** Client-side overlay rendering from walk/spline JSON.
 *
 * Everything is drawn from the server's JSON geometry (not its bitmaps), so
 * toggling accept/reject re-renders instantly. The context parameter is the
 * small slice of CanvasRenderingContext2D we use, which also lets tests
 * substitute a recording stub.
 */

import { imageToCanvas, type ViewTransform } from "./geometry.js";
import type { ImagePoint, ResolvedSeed, SplineDoc, WalkDoc } from "./types.js";

export type Ctx2D = Pick<
  CanvasRenderingContext2D,
  | "save"
  | "restore"
  | "clearRect"
  | "beginPath"
  | "moveTo"
  | "lineTo"
  | "arc"
  | "rect"
  | "stroke"
  | "fill"
  | "setLineDash"
> & {
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  lineCap: CanvasLineCap;
  lineJoin: CanvasLineJoin;
};

function tracePolyline(ctx: Ctx2D, view: ViewTransform, points: [number, number][]): void {
  ctx.beginPath();
  points.forEach(([x, y], i) => {
    const c = imageToCanvas(view, { x, y });
    if (i === 0) ctx.moveTo(c.x, c.y);
    else ctx.lineTo(c.x, c.y);
  });
}

function rgb(color: [number, number, number]): string {
  const [r, g, b] = color.map((v) => Math.round(v));
  return `rgb(${r},${g},${b})`;
}

/** Translucent stroke of the spline at its estimated thickness. */
export function drawMaskTint(
  ctx: Ctx2D,
  view: ViewTransform,
  spline: SplineDoc,
  accepted: boolean,
): void {
  ctx.save();
  ctx.globalAlpha = accepted ? 0.45 : 0.12;
  ctx.strokeStyle = rgb(spline.color);
  ctx.lineWidth = Math.max(1, spline.thickness_px * view.zoom);
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  if (!accepted) ctx.setLineDash([6, 6]);
  tracePolyline(ctx, view, spline.points);
  ctx.stroke();
  ctx.restore();
}

/** Thin centerline along the spline discretization. */
export function drawSplineCurve(ctx: Ctx2D, view: ViewTransform, spline: SplineDoc): void {
  ctx.save();
  ctx.globalAlpha = 1;
  ctx.strokeStyle = "#ffffff";
  ctx.lineWidth = 1.5;
  ctx.setLineDash([]);
  tracePolyline(ctx, view, spline.points);
  ctx.stroke();
  ctx.restore();
}

/** Dots at the walk's superpixel centroids. */
export function drawWalkDots(ctx: Ctx2D, view: ViewTransform, walk: WalkDoc): void {
  ctx.save();
  ctx.fillStyle = "#ffffff";
  ctx.globalAlpha = 0.9;
  for (const [x, y] of walk.polyline) {
    const c = imageToCanvas(view, { x, y });
    ctx.beginPath();
    ctx.arc(c.x, c.y, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.restore();
}

/** Seed markers; resolved seeds also ring their containing superpixel's
 * centroid (from the graph JSON) so a click's snap target is visible. */
export function drawSeeds(
  ctx: Ctx2D,
  view: ViewTransform,
  seeds: ImagePoint[],
  resolved: ResolvedSeed[],
  vertexCentroid: (vertexId: number) => [number, number] | undefined,
): void {
  ctx.save();
  ctx.globalAlpha = 1;
  for (const seed of seeds) {
    const c = imageToCanvas(view, seed);
    ctx.fillStyle = "#ffd60a";
    ctx.beginPath();
    ctx.rect(c.x - 4, c.y - 4, 8, 8);
    ctx.fill();
  }
  ctx.strokeStyle = "#ffd60a";
  ctx.lineWidth = 1.5;
  for (const seed of resolved) {
    const centroid = vertexCentroid(seed.vertex_id);
    if (!centroid) continue;
    const c = imageToCanvas(view, { x: centroid[0], y: centroid[1] });
    ctx.beginPath();
    ctx.arc(c.x, c.y, 7, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.restore();
}
