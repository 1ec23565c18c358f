/** Client-side session state.
 *
 * The UI never mutates segmentation data; this store holds the pending seed
 * clicks, the server's last run results, and per-object accept flags.
 */

import { inBounds } from "./geometry.js";
import type { ImagePoint, ResolvedSeed, RunResponse } from "./types.js";

export type Phase = "empty" | "ready" | "running" | "reviewed";

export class SessionState {
  sessionId: string | null = null;
  imageWidth = 0;
  imageHeight = 0;
  seeds: ImagePoint[] = [];
  resolvedSeeds: ResolvedSeed[] = [];
  results: RunResponse | null = null;
  accepted: boolean[] = [];
  runInFlight = false;
  message = "";

  get phase(): Phase {
    if (!this.sessionId) return "empty";
    if (this.runInFlight) return "running";
    return this.results ? "reviewed" : "ready";
  }

  startSession(sessionId: string, width: number, height: number): void {
    this.sessionId = sessionId;
    this.imageWidth = width;
    this.imageHeight = height;
    this.seeds = [];
    this.resolvedSeeds = [];
    this.results = null;
    this.accepted = [];
    this.runInFlight = false;
    this.message = "session ready: click the object endpoints";
  }

  /** Returns true when the click landed inside the image and was recorded. */
  placeSeed(p: ImagePoint): boolean {
    if (!this.sessionId) {
      this.message = "load an image first";
      return false;
    }
    if (!inBounds(p, this.imageWidth, this.imageHeight)) {
      this.message = `click (${p.x.toFixed(1)}, ${p.y.toFixed(1)}) is outside the image`;
      return false;
    }
    this.seeds.push(p);
    this.results = null;
    this.accepted = [];
    this.message = `${this.seeds.length} seed(s) placed`;
    return true;
  }

  clearSeeds(): void {
    this.seeds = [];
    this.resolvedSeeds = [];
    this.results = null;
    this.accepted = [];
    this.message = "seeds cleared";
  }

  canRun(): boolean {
    return this.sessionId !== null && this.seeds.length >= 2 && !this.runInFlight;
  }

  beginRun(): void {
    this.runInFlight = true;
    this.message = "running...";
  }

  finishRun(results: RunResponse): void {
    this.runInFlight = false;
    this.results = results;
    // every returned object starts accepted; the user rejects outliers
    this.accepted = results.splines.map(() => true);
    this.message = `${results.splines.length} object(s) found`;
  }

  failRun(error: string): void {
    this.runInFlight = false;
    this.message = `run failed: ${error}`;
  }

  toggleAccept(index: number): void {
    if (this.results && index >= 0 && index < this.accepted.length) {
      this.accepted[index] = !this.accepted[index];
    }
  }

  /** Indices of accepted objects; always a subset of the returned ones. */
  acceptedIndices(): number[] {
    const out: number[] = [];
    this.accepted.forEach((flag, i) => {
      if (flag) out.push(i);
    });
    return out;
  }
}
