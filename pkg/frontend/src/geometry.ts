/** Canvas <-> image coordinate mapping under zoom and pan.
 *
 * The image is drawn scaled by `zoom` with its origin at `panX`/`panY`
 * canvas pixels, so canvas = image * zoom + pan.
 */

import type { ImagePoint } from "./types.js";

export interface ViewTransform {
  zoom: number;
  panX: number;
  panY: number;
}

export function identityView(): ViewTransform {
  return { zoom: 1, panX: 0, panY: 0 };
}

export function canvasToImage(view: ViewTransform, cx: number, cy: number): ImagePoint {
  return {
    x: (cx - view.panX) / view.zoom,
    y: (cy - view.panY) / view.zoom,
  };
}

export function imageToCanvas(view: ViewTransform, p: ImagePoint): { x: number; y: number } {
  return {
    x: p.x * view.zoom + view.panX,
    y: p.y * view.zoom + view.panY,
  };
}

/** Zoom by `factor` keeping the canvas point (cx, cy) fixed. */
export function zoomAt(view: ViewTransform, cx: number, cy: number, factor: number): ViewTransform {
  const zoom = clamp(view.zoom * factor, 0.1, 40);
  const applied = zoom / view.zoom;
  return {
    zoom,
    panX: cx - (cx - view.panX) * applied,
    panY: cy - (cy - view.panY) * applied,
  };
}

export function panBy(view: ViewTransform, dx: number, dy: number): ViewTransform {
  return { zoom: view.zoom, panX: view.panX + dx, panY: view.panY + dy };
}

export function inBounds(p: ImagePoint, width: number, height: number): boolean {
  return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}
