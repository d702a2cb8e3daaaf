/** HTTP access to the render service, behind an interface so tests can
 * substitute a model server. */

import type { FrameResult, SceneMeta, ServerStats, ViewMode } from "./types.js";

export interface ConfigReply {
  ok: boolean;
  status: number;
  effective?: Record<string, unknown>;
  message?: string;
}

export interface Transport {
  loadScene(): Promise<SceneMeta>;
  postConfig(body: unknown): Promise<ConfigReply>;
  fetchFrame(view: number, mode: ViewMode): Promise<FrameResult>;
  fetchStats(): Promise<ServerStats | null>;
}

export class HttpTransport implements Transport {
  constructor(private baseUrl: string) {}

  async loadScene(): Promise<SceneMeta> {
    const resp = await fetch(`${this.baseUrl}/api/scene`);
    if (!resp.ok) {
      throw new Error(`scene request failed: HTTP ${resp.status}`);
    }
    return (await resp.json()) as SceneMeta;
  }

  async postConfig(body: unknown): Promise<ConfigReply> {
    const resp = await fetch(`${this.baseUrl}/api/config`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (resp.status === 422) {
      const detail = await resp.json().catch(() => null);
      return { ok: false, status: 422, message: formatDetail(detail) };
    }
    if (!resp.ok) {
      return { ok: false, status: resp.status, message: `HTTP ${resp.status}` };
    }
    const doc = (await resp.json()) as { display?: Record<string, unknown> };
    return { ok: true, status: resp.status, effective: doc.display };
  }

  async fetchFrame(view: number, mode: ViewMode): Promise<FrameResult> {
    const resp = await fetch(`${this.baseUrl}/api/frame?view=${view}&mode=${mode}`);
    if (!resp.ok) {
      throw new Error(`frame request failed: HTTP ${resp.status}`);
    }
    const blob = await resp.blob();
    return {
      blobUrl: URL.createObjectURL(blob),
      psnr: headerNumber(resp, "x-psnr"),
      ssim: headerNumber(resp, "x-ssim"),
      renderMs: headerNumber(resp, "x-render-ms"),
      cache: resp.headers.get("x-cache"),
    };
  }

  async fetchStats(): Promise<ServerStats | null> {
    try {
      const resp = await fetch(`${this.baseUrl}/api/stats`);
      return resp.ok ? ((await resp.json()) as ServerStats) : null;
    } catch {
      return null;
    }
  }
}

function headerNumber(resp: Response, name: string): number | null {
  const raw = resp.headers.get(name);
  return raw === null ? null : Number(raw);
}

function formatDetail(detail: unknown): string {
  const doc = detail as { detail?: unknown } | null;
  if (doc && Array.isArray(doc.detail)) {
    return doc.detail
      .map((item) => {
        const it = item as { loc?: unknown[]; msg?: string };
        return `${(it.loc ?? []).join(".")}: ${it.msg ?? "invalid"}`;
      })
      .join("; ");
  }
  if (doc && typeof doc.detail === "string") {
    return doc.detail;
  }
  return "invalid configuration";
}
