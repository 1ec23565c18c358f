/** Payload types for the wirewalk HTTP API (see ../schema.json). */

export const SCHEMA_VERSION = 1;

export interface ImagePoint {
  x: number;
  y: number;
}

export interface GraphVertex {
  id: number;
  centroid: [number, number];
  area: number;
  histogram: number[];
}

export interface GraphDoc {
  version: number;
  order: number;
  bins_per_channel: number;
  vertices: GraphVertex[];
  edges: [number, number][];
  seed_flags: number[];
}

export interface SessionCreated {
  version: number;
  session_id: string;
  width: number;
  height: number;
  boundary_overlay_png: string;
  graph: GraphDoc;
}

export interface ResolvedSeed {
  x: number;
  y: number;
  vertex_id: number;
}

export interface SeedsResponse {
  version: number;
  seeds: ResolvedSeed[];
}

export interface WalkDoc {
  version: number;
  vertices: number[];
  polyline: [number, number][];
  seed_start: number;
  seed_end: number | null;
  status: string;
  log_curvature_score: number;
  mean_log_curvature: number;
  seed_appearance_score: number;
  selection_score: number;
}

export interface SplineDoc {
  version: number;
  degree: number;
  knots: number[];
  control_points: [number, number][];
  thickness_px: number;
  color: [number, number, number];
  points: [number, number][];
}

export interface RunDiagnostics {
  walks_started: number;
  walks_closed: number;
  walks_aborted: number;
  walks_max_steps: number;
  extension_steps: number;
  unpaired_seed_ids: number[];
}

export interface RunResponse {
  version: number;
  walks: WalkDoc[];
  splines: SplineDoc[];
  overlay_png: string;
  diagnostics: RunDiagnostics;
}

export interface AcceptResponse {
  version: number;
  directory: string;
  written: string[];
}

export interface ExportResponse {
  version: number;
  directory: string;
  files: Record<string, string>;
}
