/** Glue between the state machine, the request scheduler, and a transport.
 *
 * Sync cycles are coalesced: at most one in flight, at most one pending,
 * and a newer input replaces the pending one (latest wins).  Each cycle
 * posts the full desired config, then fetches the frame; results stamped
 * with an outdated revision are discarded by the reducer.
 */

import { desiredConfig, initialState, reduce, ViewerEvent, ViewerState } from "./state.js";
import type { Transport } from "./transport.js";

export class ViewerApp {
  state: ViewerState;
  private inFlight = false;
  private pending: number | null = null;
  /** outstanding async operations (scene load + sync cycles) */
  private ops = 0;
  private listeners: Array<(s: ViewerState) => void> = [];
  /** resolved when no operation is running or queued; tests await quiescence */
  private idleResolvers: Array<() => void> = [];

  constructor(private transport: Transport) {
    this.state = initialState();
  }

  onChange(fn: (s: ViewerState) => void): void {
    this.listeners.push(fn);
  }

  connect(): void {
    this.dispatch({ type: "connect" });
  }

  orbitInput(dAzimuth: number, dElevation: number): void {
    this.dispatch({ type: "orbit", dAzimuth, dElevation });
  }

  zoom(factor: number): void {
    this.dispatch({ type: "zoom", factor });
  }

  knobChange(name: keyof ViewerState["knobs"], value: number | string): void {
    this.dispatch({ type: "knob", name, value });
  }

  scrubView(view: number): void {
    this.dispatch({ type: "scrub", view });
  }

  setMode(mode: ViewerState["mode"]): void {
    this.dispatch({ type: "mode", mode });
  }

  /** Resolves once no request is in flight and nothing is queued. */
  whenIdle(): Promise<void> {
    if (this.ops === 0 && this.pending === null) {
      return Promise.resolve();
    }
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  dispatch(event: ViewerEvent): void {
    const [next, effects] = reduce(this.state, event);
    this.state = next;
    for (const fn of this.listeners) {
      fn(this.state);
    }
    for (const effect of effects) {
      if (effect.kind === "load-scene") {
        void this.loadScene();
      } else {
        this.requestSync(effect.revision);
      }
    }
  }

  private async loadScene(): Promise<void> {
    this.ops += 1;
    try {
      const scene = await this.transport.loadScene();
      this.dispatch({ type: "connected", scene });
    } catch (err) {
      this.dispatch({ type: "connect-failed", message: String(err) });
    } finally {
      this.ops -= 1;
      this.notifyIdle();
    }
  }

  private requestSync(revision: number): void {
    if (this.inFlight) {
      this.pending = revision; // replaces any older pending revision
      return;
    }
    void this.runSync(revision);
  }

  private async runSync(revision: number): Promise<void> {
    this.inFlight = true;
    this.ops += 1;
    this.dispatch({ type: "sync-started", revision });
    try {
      const reply = await this.transport.postConfig(desiredConfig(this.state));
      if (!reply.ok) {
        this.dispatch({
          type: reply.status === 422 ? "sync-rejected" : "sync-failed",
          revision,
          message: reply.message ?? `HTTP ${reply.status}`,
        });
        return;
      }
      // a newer input may have arrived while the config was in flight;
      // skip the frame fetch, the queued sync covers it
      if (revision === this.state.revision) {
        const frame = await this.transport.fetchFrame(this.state.viewIndex, this.state.mode);
        const stats = await this.transport.fetchStats();
        this.dispatch({
          type: "sync-done",
          revision,
          frame,
          effective: (reply.effective ?? {}) as Partial<ViewerState["knobs"]>,
          stats,
        });
      }
    } catch (err) {
      this.dispatch({ type: "sync-failed", revision, message: String(err) });
    } finally {
      this.inFlight = false;
      const queued = this.pending;
      this.pending = null;
      if (queued !== null) {
        this.requestSync(this.state.revision); // latest wins
      }
      this.ops -= 1;
      this.notifyIdle();
    }
  }

  private notifyIdle(): void {
    if (this.ops !== 0 || this.pending !== null) {
      return;
    }
    const resolvers = this.idleResolvers;
    this.idleResolvers = [];
    for (const resolve of resolvers) {
      resolve();
    }
  }
}
