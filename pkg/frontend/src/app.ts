/** DOM wiring for the annotator: upload, seed clicks, run, review, export.
 *
 * Coordinate handling, state transitions, and API calls live in their own
 * modules; this class connects them to the page. All canvas drawing is
 * skipped gracefully when no 2D context is available (headless tests).
 */

import { ApiClient, ApiError } from "./api.js";
import {
  canvasToImage,
  identityView,
  panBy,
  zoomAt,
  type ViewTransform,
} from "./geometry.js";
import { drawMaskTint, drawSeeds, drawSplineCurve, drawWalkDots, type Ctx2D } from "./overlay.js";
import { SessionState } from "./state.js";
import type { ExportResponse, GraphDoc } from "./types.js";

export interface AppElements {
  serverUrl: HTMLInputElement;
  fileInput: HTMLInputElement;
  canvas: HTMLCanvasElement;
  runButton: HTMLButtonElement;
  clearButton: HTMLButtonElement;
  exportButton: HTMLButtonElement;
  objectList: HTMLElement;
  status: HTMLElement;
}

function lookup(doc: Document): AppElements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    serverUrl: byId<HTMLInputElement>("server-url"),
    fileInput: byId<HTMLInputElement>("file-input"),
    canvas: byId<HTMLCanvasElement>("canvas"),
    runButton: byId<HTMLButtonElement>("run-btn"),
    clearButton: byId<HTMLButtonElement>("clear-btn"),
    exportButton: byId<HTMLButtonElement>("export-btn"),
    objectList: byId<HTMLElement>("objects"),
    status: byId<HTMLElement>("status"),
  };
}

export class AnnotatorApp {
  readonly state = new SessionState();
  view: ViewTransform = identityView();
  lastExport: ExportResponse | null = null;

  private api: ApiClient | null = null;
  private graph: GraphDoc | null = null;
  private backdrop: HTMLImageElement | null = null;
  private readonly ctx: Ctx2D | null;
  private readonly elements: AppElements;
  private readonly doc: Document;
  private panning = false;
  private panLast = { x: 0, y: 0 };

  constructor(doc: Document, elements?: Partial<AppElements>) {
    this.doc = doc;
    this.elements = { ...lookup(doc), ...elements };
    this.ctx = this.elements.canvas.getContext?.("2d") as Ctx2D | null;
    this.bind();
    this.refreshControls();
  }

  private bind(): void {
    const el = this.elements;
    el.fileInput.addEventListener("change", () => {
      const file = el.fileInput.files?.[0];
      if (file) void this.openImage(file);
    });
    el.canvas.addEventListener("click", (ev) => {
      if (!this.panning) void this.handleCanvasClick(ev.clientX, ev.clientY);
    });
    el.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const rect = el.canvas.getBoundingClientRect();
      const factor = ev.deltaY < 0 ? 1.25 : 0.8;
      this.view = zoomAt(
        this.view,
        ev.clientX - rect.left,
        ev.clientY - rect.top,
        factor,
      );
      this.render();
    });
    el.canvas.addEventListener("mousedown", (ev) => {
      if (ev.shiftKey || ev.button === 1) {
        this.panning = true;
        this.panLast = { x: ev.clientX, y: ev.clientY };
        ev.preventDefault();
      }
    });
    el.canvas.addEventListener("mousemove", (ev) => {
      if (this.panning) {
        this.view = panBy(this.view, ev.clientX - this.panLast.x, ev.clientY - this.panLast.y);
        this.panLast = { x: ev.clientX, y: ev.clientY };
        this.render();
      }
    });
    this.doc.addEventListener("mouseup", () => {
      this.panning = false;
    });
    el.runButton.addEventListener("click", () => void this.runWalks());
    el.clearButton.addEventListener("click", () => {
      this.state.clearSeeds();
      this.refreshControls();
      this.render();
    });
    el.exportButton.addEventListener("click", () => void this.exportAccepted());
  }

  async openImage(file: Blob): Promise<void> {
    this.api = new ApiClient(this.elements.serverUrl.value.replace(/\/$/, ""));
    this.setStatus("uploading image...");
    try {
      const bytes = await blobBytes(file);
      const session = await this.api.createSession(bytes);
      this.graph = session.graph;
      this.state.startSession(session.session_id, session.width, session.height);
      this.view = identityView();
      this.elements.canvas.width = session.width;
      this.elements.canvas.height = session.height;
      this.loadBackdrop(session.boundary_overlay_png);
      this.setStatus(this.state.message);
    } catch (err) {
      this.setStatus(`upload failed: ${describe(err)}`);
    }
    this.refreshControls();
    this.render();
  }

  /** Convert a click to image coordinates (zoom/pan aware) and place it. */
  async handleCanvasClick(clientX: number, clientY: number): Promise<void> {
    const rect = this.elements.canvas.getBoundingClientRect();
    const p = canvasToImage(this.view, clientX - rect.left, clientY - rect.top);
    if (this.state.placeSeed(p) && this.api && this.state.sessionId) {
      try {
        const response = await this.api.postSeeds(this.state.sessionId, this.state.seeds);
        this.state.resolvedSeeds = response.seeds;
      } catch (err) {
        this.state.seeds.pop();
        this.setStatus(`seed rejected: ${describe(err)}`);
        this.refreshControls();
        this.render();
        return;
      }
    }
    this.setStatus(this.state.message);
    this.refreshControls();
    this.render();
  }

  async runWalks(): Promise<void> {
    if (!this.state.canRun() || !this.api || !this.state.sessionId) return;
    this.state.beginRun();
    this.refreshControls();
    this.setStatus(this.state.message);
    try {
      const results = await this.api.run(this.state.sessionId);
      this.state.finishRun(results);
    } catch (err) {
      this.state.failRun(describe(err));
    }
    this.setStatus(this.state.message);
    this.refreshControls();
    this.rebuildObjectList();
    this.render();
  }

  toggleAccept(index: number): void {
    this.state.toggleAccept(index);
    this.rebuildObjectList();
    this.render();
  }

  async exportAccepted(): Promise<void> {
    if (!this.api || !this.state.sessionId || !this.state.results) return;
    const accepted = this.state.acceptedIndices();
    this.setStatus("exporting...");
    try {
      const written = await this.api.accept(this.state.sessionId, accepted);
      this.lastExport = await this.api.export(this.state.sessionId);
      this.setStatus(
        `exported ${written.written.length} file(s) to ${written.directory}`,
      );
    } catch (err) {
      this.setStatus(`export failed: ${describe(err)}`);
    }
  }

  private loadBackdrop(pngBase64: string): void {
    const img = this.doc.createElement("img") as HTMLImageElement;
    img.onload = () => {
      this.backdrop = img;
      this.render();
    };
    img.src = `data:image/png;base64,${pngBase64}`;
  }

  private refreshControls(): void {
    this.elements.runButton.disabled = !this.state.canRun();
    this.elements.exportButton.disabled =
      this.state.results === null || this.state.runInFlight;
    this.elements.clearButton.disabled = this.state.seeds.length === 0;
  }

  private rebuildObjectList(): void {
    const list = this.elements.objectList;
    list.textContent = "";
    const results = this.state.results;
    if (!results) return;
    results.splines.forEach((spline, i) => {
      const row = this.doc.createElement("label");
      row.className = "object-row";
      const box = this.doc.createElement("input");
      box.type = "checkbox";
      box.checked = this.state.accepted[i];
      box.dataset.objectIndex = String(i);
      box.addEventListener("change", () => this.toggleAccept(i));
      const swatch = this.doc.createElement("span");
      swatch.className = "swatch";
      const [r, g, b] = spline.color.map((v) => Math.round(v));
      swatch.setAttribute("style", `background: rgb(${r},${g},${b})`);
      const text = this.doc.createElement("span");
      const walk = results.walks[i];
      text.textContent = `object ${i}: seeds ${walk.seed_start}-${walk.seed_end}, `
        + `${walk.vertices.length} regions, width ${spline.thickness_px.toFixed(1)}px`;
      row.append(box, swatch, text);
      list.append(row);
    });
  }

  render(): void {
    const ctx = this.ctx;
    if (!ctx) return;
    const { canvas } = this.elements;
    ctx.save();
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (this.backdrop) {
      (ctx as unknown as CanvasRenderingContext2D).drawImage(
        this.backdrop,
        this.view.panX,
        this.view.panY,
        this.state.imageWidth * this.view.zoom,
        this.state.imageHeight * this.view.zoom,
      );
    }
    const results = this.state.results;
    if (results) {
      results.splines.forEach((spline, i) => {
        drawMaskTint(ctx, this.view, spline, this.state.accepted[i]);
      });
      results.splines.forEach((spline) => drawSplineCurve(ctx, this.view, spline));
      results.walks.forEach((walk) => drawWalkDots(ctx, this.view, walk));
    }
    drawSeeds(
      ctx,
      this.view,
      this.state.seeds,
      this.state.resolvedSeeds,
      (vertexId) => this.graph?.vertices[vertexId]?.centroid,
    );
    ctx.restore();
  }

  private setStatus(text: string): void {
    this.elements.status.textContent = text;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

/** Blob.arrayBuffer with a FileReader fallback for older DOM implementations. */
function blobBytes(blob: Blob): Promise<ArrayBuffer> {
  if (typeof blob.arrayBuffer === "function") {
    return blob.arrayBuffer();
  }
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as ArrayBuffer);
    reader.onerror = () => reject(reader.error);
    reader.readAsArrayBuffer(blob);
  });
}
