/** The viewer's state machine: a pure reducer plus effect descriptions.
 *
 * Every user input bumps a revision counter and yields a `sync` effect for
 * that revision; the scheduler runs at most one sync at a time (latest
 * wins).  A sync pushes the desired config/pose to the server, then
 * fetches the frame for the acknowledged revision.  The machine only
 * accepts results stamped with the current revision, so the displayed
 * frame can never belong to stale knob values: after any quiet period the
 * frame on screen matches the knobs on screen.
 */

import { applyDrag, applyZoom, defaultOrbit, poseFromOrbit } from "./orbit.js";
import type { FrameResult, Knobs, Orbit, SceneMeta, ServerStats, ViewMode } from "./types.js";

export interface ViewerState {
  connection: "idle" | "connecting" | "ready" | "failed";
  scene: SceneMeta | null;
  orbit: Orbit;
  viewIndex: number; // 1-based quilt view
  mode: ViewMode;
  /** optimistic knob values shown by the UI */
  knobs: Knobs;
  /** last server-confirmed knob values, for reverts */
  acknowledged: Knobs;
  /** bumped on every input that affects the rendered frame */
  revision: number;
  /** revision of the frame currently displayed (-1: none) */
  frameRevision: number;
  frame: FrameResult | null;
  banner: string | null;
  stats: ServerStats | null;
  syncing: boolean;
}

export type ViewerEvent =
  | { type: "connect" }
  | { type: "connected"; scene: SceneMeta }
  | { type: "connect-failed"; message: string }
  | { type: "orbit"; dAzimuth: number; dElevation: number }
  | { type: "zoom"; factor: number }
  | { type: "knob"; name: keyof Knobs; value: number | string }
  | { type: "scrub"; view: number }
  | { type: "mode"; mode: ViewMode }
  | { type: "sync-started"; revision: number }
  | { type: "sync-done"; revision: number; frame: FrameResult; effective: Partial<Knobs>; stats: ServerStats | null }
  | { type: "sync-rejected"; revision: number; message: string }
  | { type: "sync-failed"; revision: number; message: string };

export type Effect =
  | { kind: "load-scene" }
  | { kind: "sync"; revision: number };

export const DEFAULT_KNOBS: Knobs = {
  n_chunk: 32,
  plane_scale: 1.0,
  interp: "nearest",
  plane_precision: "u8",
  views_x: 9,
};

export function initialState(focal = 2.0): ViewerState {
  return {
    connection: "idle",
    scene: null,
    orbit: defaultOrbit(focal),
    viewIndex: Math.ceil(DEFAULT_KNOBS.views_x / 2),
    mode: "sweep",
    knobs: { ...DEFAULT_KNOBS },
    acknowledged: { ...DEFAULT_KNOBS },
    revision: 0,
    frameRevision: -1,
    frame: null,
    banner: null,
    stats: null,
    syncing: false,
  };
}

export function reduce(state: ViewerState, event: ViewerEvent): [ViewerState, Effect[]] {
  switch (event.type) {
    case "connect":
      return [{ ...state, connection: "connecting", banner: null }, [{ kind: "load-scene" }]];

    case "connected": {
      const next = { ...state, connection: "ready" as const, scene: event.scene, revision: state.revision + 1 };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "connect-failed":
      return [{ ...state, connection: "failed", banner: event.message }, []];

    case "orbit": {
      if (event.dAzimuth === 0 && event.dElevation === 0) {
        return [state, []]; // zero-delta drags must not hit the network
      }
      const next = {
        ...state,
        orbit: applyDrag(state.orbit, event.dAzimuth, event.dElevation),
        revision: state.revision + 1,
      };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "zoom": {
      if (event.factor === 1) {
        return [state, []];
      }
      const next = { ...state, orbit: applyZoom(state.orbit, event.factor), revision: state.revision + 1 };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "knob": {
      const knobs = { ...state.knobs, [event.name]: event.value } as Knobs;
      const viewIndex = Math.min(state.viewIndex, knobs.views_x);
      const next = { ...state, knobs, viewIndex, revision: state.revision + 1, banner: null };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "scrub": {
      // wrap disabled: clamp at the ends
      const view = Math.min(Math.max(Math.round(event.view), 1), state.knobs.views_x);
      if (view === state.viewIndex) {
        return [state, []];
      }
      const next = { ...state, viewIndex: view, revision: state.revision + 1 };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "mode": {
      if (event.mode === state.mode) {
        return [state, []];
      }
      const next = { ...state, mode: event.mode, revision: state.revision + 1 };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "sync-started":
      return [{ ...state, syncing: true }, []];

    case "sync-done": {
      if (event.revision !== state.revision) {
        return [{ ...state, syncing: false }, []]; // stale result: a newer input exists
      }
      const acknowledged = { ...state.knobs, ...event.effective };
      return [
        {
          ...state,
          syncing: false,
          knobs: acknowledged, // the server echo is authoritative
          acknowledged,
          frame: event.frame,
          frameRevision: event.revision,
          stats: event.stats ?? state.stats,
        },
        [],
      ];
    }

    case "sync-rejected": {
      if (event.revision !== state.revision) {
        return [{ ...state, syncing: false }, []];
      }
      // invalid knob value: revert to the acknowledged config and refetch
      const next = {
        ...state,
        syncing: false,
        knobs: { ...state.acknowledged },
        banner: event.message,
        revision: state.revision + 1,
      };
      return [next, [{ kind: "sync", revision: next.revision }]];
    }

    case "sync-failed":
      if (event.revision !== state.revision) {
        return [{ ...state, syncing: false }, []];
      }
      return [{ ...state, syncing: false, banner: event.message }, []];
  }
}

/** The invariant the model-based test checks after quiescence. */
export function isConsistent(state: ViewerState): boolean {
  if (state.connection !== "ready") {
    return state.frame === null || state.frameRevision <= state.revision;
  }
  return (
    state.frameRevision === state.revision &&
    state.frame !== null &&
    knobsEqual(state.knobs, state.acknowledged)
  );
}

export function knobsEqual(a: Knobs, b: Knobs): boolean {
  return (
    a.n_chunk === b.n_chunk &&
    a.plane_scale === b.plane_scale &&
    a.interp === b.interp &&
    a.plane_precision === b.plane_precision &&
    a.views_x === b.views_x
  );
}

/** Wire payload describing the full desired config for one revision. */
export function desiredConfig(state: ViewerState) {
  return {
    display: {
      n_chunk: state.knobs.n_chunk,
      plane_scale: state.knobs.plane_scale,
      interp: state.knobs.interp,
      plane_precision: state.knobs.plane_precision,
      views_x: state.knobs.views_x,
    },
    pose: poseFromOrbit(state.orbit),
  };
}
