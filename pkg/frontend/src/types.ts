/** Shared wire and state types for the viewer. */

export interface SceneMeta {
  kind: string;
  count: number;
  sh_degree?: number;
  voxel_size?: number;
  bounds: { min: number[]; max: number[] };
}

/** The display knobs the viewer exposes; a subset of the server config. */
export interface Knobs {
  n_chunk: number;
  plane_scale: number;
  interp: "nearest" | "bilinear";
  plane_precision: "u8" | "f32";
  views_x: number;
}

export type ViewMode = "sweep" | "baseline" | "split";

/** Orbit camera around a target point; angles in radians. */
export interface Orbit {
  azimuth: number;
  elevation: number;
  radius: number;
  target: [number, number, number];
}

export interface PoseSpec {
  position: number[];
  target: number[];
  up: number[];
}

export interface ServerStats {
  last_render_ms: number;
  cache_hit_rate: number;
  plane_memory_bytes: number;
  frames_rendered: number;
  config_version: number;
  pose_version: number;
}

export interface FrameResult {
  blobUrl: string;
  psnr: number | null;
  ssim: number | null;
  renderMs: number | null;
  cache: string | null;
}

export const KNOB_LIMITS = {
  n_chunk: { min: 1, max: 512 },
  plane_scale: { min: 0.5, max: 4 },
  views_x: { min: 1, max: 64 },
} as const;
