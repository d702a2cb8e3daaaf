/** DOM wiring: sliders, scrubber, mode buttons, orbit drag, stats panel. */

import { ViewerApp } from "./app.js";
import { HttpTransport } from "./transport.js";
import type { ViewerState } from "./state.js";
import type { Knobs } from "./types.js";

const baseUrl = new URLSearchParams(location.search).get("server") ?? "";
const app = new ViewerApp(new HttpTransport(baseUrl));

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const frameImg = $<HTMLImageElement>("frame");
const banner = $<HTMLDivElement>("banner");
const sceneInfo = $<HTMLDivElement>("scene-info");
const statsPanel = $<HTMLDivElement>("stats");
const overlay = $<HTMLDivElement>("overlay");
const scrubber = $<HTMLInputElement>("view-scrubber");
const scrubLabel = $<HTMLSpanElement>("view-label");

const knobInputs: Record<string, HTMLInputElement | HTMLSelectElement> = {
  n_chunk: $<HTMLInputElement>("knob-n-chunk"),
  plane_scale: $<HTMLInputElement>("knob-plane-scale"),
  interp: $<HTMLSelectElement>("knob-interp"),
  plane_precision: $<HTMLSelectElement>("knob-precision"),
  views_x: $<HTMLInputElement>("knob-views"),
};

for (const [name, input] of Object.entries(knobInputs)) {
  input.addEventListener("change", () => {
    const raw = input.value;
    const value = name === "interp" || name === "plane_precision" ? raw : Number(raw);
    app.knobChange(name as keyof Knobs, value);
  });
}

scrubber.addEventListener("input", () => app.scrubView(Number(scrubber.value)));

for (const mode of ["sweep", "baseline", "split"] as const) {
  $<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", () => app.setMode(mode));
}

// orbit: drag on the frame, wheel to zoom
let dragging = false;
let lastX = 0;
let lastY = 0;
frameImg.addEventListener("pointerdown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
  frameImg.setPointerCapture(ev.pointerId);
});
frameImg.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const dx = ev.clientX - lastX;
  const dy = ev.clientY - lastY;
  lastX = ev.clientX;
  lastY = ev.clientY;
  app.orbitInput(dx * 0.008, dy * 0.008);
});
frameImg.addEventListener("pointerup", () => (dragging = false));
frameImg.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  app.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
});

let lastBlobUrl: string | null = null;

function render(state: ViewerState): void {
  banner.style.display = state.banner ? "block" : "none";
  banner.textContent = state.banner ?? "";

  if (state.scene) {
    const s = state.scene;
    sceneInfo.textContent =
      `${s.kind} scene, ${s.count} primitives` +
      (s.sh_degree !== undefined ? `, SH degree ${s.sh_degree}` : "");
  } else {
    sceneInfo.textContent = state.connection === "connecting" ? "connecting..." : "no scene";
  }

  for (const [name, input] of Object.entries(knobInputs)) {
    const value = String(state.knobs[name as keyof Knobs]);
    if (document.activeElement !== input && input.value !== value) {
      input.value = value;
    }
  }
  scrubber.max = String(state.knobs.views_x);
  if (document.activeElement !== scrubber) {
    scrubber.value = String(state.viewIndex);
  }
  scrubLabel.textContent = `view ${state.viewIndex} / ${state.knobs.views_x}`;

  for (const mode of ["sweep", "baseline", "split"] as const) {
    $<HTMLButtonElement>(`mode-${mode}`).classList.toggle("active", state.mode === mode);
  }

  if (state.frame && state.frame.blobUrl !== lastBlobUrl) {
    if (lastBlobUrl) URL.revokeObjectURL(lastBlobUrl);
    lastBlobUrl = state.frame.blobUrl;
    frameImg.src = state.frame.blobUrl;
  }

  const parts: string[] = [];
  if (state.frame?.psnr != null) parts.push(`PSNR ${state.frame.psnr.toFixed(2)} dB`);
  if (state.frame?.ssim != null) parts.push(`SSIM ${state.frame.ssim.toFixed(4)}`);
  if (state.frame?.renderMs != null) parts.push(`${state.frame.renderMs.toFixed(0)} ms`);
  if (state.frame?.cache) parts.push(state.frame.cache);
  overlay.textContent = parts.join("  |  ");
  overlay.style.display = parts.length && state.mode === "split" ? "block" : parts.length ? "block" : "none";

  if (state.stats) {
    const st = state.stats;
    statsPanel.textContent =
      `render ${st.last_render_ms.toFixed(1)} ms | cache ${(st.cache_hit_rate * 100).toFixed(0)}% | ` +
      `planes ${(st.plane_memory_bytes / 1e6).toFixed(1)} MB | frames ${st.frames_rendered}`;
  }
}

app.onChange(render);
render(app.state);
app.connect();
