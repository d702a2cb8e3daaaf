"""Interactive HTTP render service: pose/knob updates and frame delivery.

Pull-based REST: the viewer POSTs config changes and GETs frames.  Renders
are serialized behind a lock; plane stacks and encoded frames are cached
by content keys, so a repeated request is a cache hit and any
geometry-affecting change naturally misses.  Frames are PNG (lossless) so
client-side quality readouts stay meaningful.
"""

from __future__ import annotations

import hashlib
import io
import json
import threading
import time
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel, Field

from .config import DisplayConfig
from .errors import ConfigurationError
from .geometry import CameraPose, quilt_view_params, reference_camera
from .metrics import psnr, ssim
from .pipeline import build_planes
from .raster import camera_for_view, render_perspective
from .scene import GaussianScene, Scene, VoxelScene
from .swizzle import swizzle_single_view

# config fields that do not change the plane stack (view layout, sampling)
_SWIZZLE_ONLY_FIELDS = ("views_x", "views_y", "interp")


class PosePatch(BaseModel):
    position: list[float] = Field(min_length=3, max_length=3)
    target: list[float] = Field(min_length=3, max_length=3)
    up: list[float] = Field(default=[0.0, 1.0, 0.0], min_length=3, max_length=3)


class DisplayPatch(BaseModel):
    """Partial display config; angles in degrees as in the config file."""

    d_focal: float | None = Field(default=None, gt=0)
    fov_x: float | None = Field(default=None, gt=0, lt=180)
    fov_y: float | None = Field(default=None, gt=0, lt=180)
    view_angle_x: float | None = Field(default=None, ge=0, lt=180)
    view_angle_y: float | None = Field(default=None, ge=0, lt=180)
    views_x: int | None = Field(default=None, ge=1, le=256)
    views_y: int | None = Field(default=None, ge=1, le=256)
    res_x: int | None = Field(default=None, ge=8, le=2048)
    res_y: int | None = Field(default=None, ge=8, le=2048)
    d_shift: float | None = Field(default=None, ge=0)
    n_chunk: int | None = Field(default=None, ge=1, le=1024)
    plane_scale: float | None = Field(default=None, gt=0, le=4)
    interp: Literal["nearest", "bilinear"] | None = None
    plane_precision: Literal["u8", "f32"] | None = None


class ConfigUpdate(BaseModel):
    display: DisplayPatch | None = None
    pose: PosePatch | None = None


class RenderSession:
    """One scene + one live (pose, config) with plane and frame caches."""

    def __init__(self, scene: Scene | None, cfg: DisplayConfig, pose: CameraPose | None = None):
        self.scene = scene
        self.cfg = cfg
        self.pose = pose or CameraPose.identity()
        self.lock = threading.Lock()
        self.config_version = 0
        self.pose_version = 0
        self.frame_counter = 0
        self.last_render_ms = 0.0
        self.plane_memory_bytes = 0
        self.cache_hits = 0
        self.cache_requests = 0
        self._plane_cache: dict[str, tuple] = {}
        self._frame_cache: dict[tuple, tuple[bytes, dict]] = {}

    # ------------------------------------------------------------- keys
    def plane_key(self) -> str:
        parts = {k: v for k, v in self.cfg.to_dict().items() if k not in _SWIZZLE_ONLY_FIELDS}
        payload = json.dumps(parts, sort_keys=True).encode()
        payload += self.pose.position.tobytes() + self.pose.orientation.tobytes()
        return hashlib.sha1(payload).hexdigest()[:16]

    def apply_update(self, update: ConfigUpdate) -> None:
        with self.lock:
            if update.display is not None:
                patch = {k: v for k, v in update.display.model_dump().items() if v is not None}
                if patch:
                    new_dict = self.cfg.to_dict()
                    new_dict.update(patch)
                    self.cfg = DisplayConfig.from_dict(new_dict)
                    self.config_version += 1
            if update.pose is not None:
                self.pose = CameraPose.look_at(update.pose.position, update.pose.target, update.pose.up)
                self.pose_version += 1

    # ---------------------------------------------------------- renders
    def _planes(self):
        key = self.plane_key()
        if key not in self._plane_cache:
            planes, _, stats = build_planes(self.scene, self.cfg, self.pose)
            ref = reference_camera(self.cfg, self.pose)
            # keep only the live stack and its frames; stale keys re-render
            self._plane_cache = {key: (planes, ref)}
            self._frame_cache = {k: v for k, v in self._frame_cache.items() if k[0] == key}
            self.plane_memory_bytes = stats.plane_memory_bytes
        return self._plane_cache[key]

    def view_indices(self, flat: int) -> tuple[int, int]:
        if not 1 <= flat <= self.cfg.n_views:
            raise HTTPException(status_code=400, detail=f"view must be in 1..{self.cfg.n_views}")
        return (flat - 1) % self.cfg.views_x + 1, (flat - 1) // self.cfg.views_x + 1

    def render_view(self, flat: int, mode: str) -> np.ndarray:
        j, i = self.view_indices(flat)
        if mode == "sweep":
            planes, ref = self._planes()
            color, trans = swizzle_single_view(planes, self.cfg, ref, j, i)
        else:
            camera = camera_for_view(self.cfg, self.pose, quilt_view_params(self.cfg, j, i))
            color, trans = render_perspective(self.scene, camera)
        return np.clip(color, 0.0, 1.0)

    def frame_png(self, flat: int, mode: str) -> tuple[bytes, dict, bool]:
        """Encoded frame plus response headers and cache-hit flag."""
        self.cache_requests += 1
        key = (self.plane_key(), self.cfg.views_x, self.cfg.views_y, self.cfg.interp, flat, mode)
        cached = self._frame_cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            png, headers = cached
            return png, headers, True
        with self.lock:
            self.view_indices(flat)  # validate before rendering
            t0 = time.perf_counter()
            headers = {}
            if mode == "split":
                sweep = self.render_view(flat, "sweep")
                base = self.render_view(flat, "baseline")
                img = np.concatenate([sweep, base], axis=1)
                headers["X-PSNR"] = f"{psnr(sweep, base):.4f}"
                headers["X-SSIM"] = f"{ssim(sweep, base):.6f}"
            else:
                img = self.render_view(flat, mode)
            png = _encode_png(img)
            self.last_render_ms = (time.perf_counter() - t0) * 1e3
            self.frame_counter += 1
            headers["X-Render-Ms"] = f"{self.last_render_ms:.2f}"
            self._frame_cache[key] = (png, headers)
            return png, headers, False

    def quilt_png(self) -> tuple[bytes, dict, bool]:
        self.cache_requests += 1
        key = (self.plane_key(), self.cfg.views_x, self.cfg.views_y, self.cfg.interp, 0, "quilt")
        cached = self._frame_cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            png, headers = cached
            return png, headers, True
        with self.lock:
            from .pipeline import render_sweep_quilt

            t0 = time.perf_counter()
            quilt, stats = render_sweep_quilt(self.scene, self.cfg, self.pose)
            png = _encode_png(quilt.to_mosaic().astype(np.float32) / 255.0)
            self.last_render_ms = (time.perf_counter() - t0) * 1e3
            self.plane_memory_bytes = stats.plane_memory_bytes
            self.frame_counter += 1
            headers = {
                "X-Render-Ms": f"{self.last_render_ms:.2f}",
                "X-Quilt-Meta": json.dumps(self.cfg.to_dict(), sort_keys=True),
            }
            self._frame_cache[key] = (png, headers)
            return png, headers, False

    def scene_meta(self) -> dict:
        scene = self.scene
        lo, hi = scene.bounds()
        meta = {
            "count": scene.count,
            "bounds": {"min": [float(v) for v in lo], "max": [float(v) for v in hi]},
        }
        if isinstance(scene, GaussianScene):
            meta["kind"] = "gaussian"
            meta["sh_degree"] = scene.sh_degree
        elif isinstance(scene, VoxelScene):
            meta["kind"] = "voxel"
            meta["voxel_size"] = float(scene.voxel_size)
        return meta

    def stats(self) -> dict:
        return {
            "last_render_ms": self.last_render_ms,
            "cache_hit_rate": (self.cache_hits / self.cache_requests) if self.cache_requests else 0.0,
            "plane_memory_bytes": self.plane_memory_bytes,
            "frames_rendered": self.frame_counter,
            "config_version": self.config_version,
            "pose_version": self.pose_version,
            "plane_cache_key": self.plane_key(),
            "frame_cache_size": len(self._frame_cache),
        }


def _encode_png(img: np.ndarray) -> bytes:
    u8 = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(u8).save(buf, format="PNG")
    return buf.getvalue()


def create_app(
    scene: Scene | None = None,
    cfg: DisplayConfig | None = None,
    pose: CameraPose | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the service app around one render session.

    ``static_dir`` optionally serves a built viewer bundle at ``/``.
    """
    session = RenderSession(scene, cfg or DisplayConfig(), pose)
    app = FastAPI(title="lfsweep render service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-PSNR", "X-SSIM", "X-Render-Ms", "X-Cache", "X-Quilt-Meta"],
    )
    app.state.session = session

    @app.get("/api/scene")
    def get_scene():
        if session.scene is None:
            raise HTTPException(status_code=404, detail="no scene loaded")
        return session.scene_meta()

    @app.post("/api/config")
    def post_config(update: ConfigUpdate):
        try:
            session.apply_update(update)
        except (ConfigurationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "display": session.cfg.to_dict(),
            "pose": {
                "position": session.pose.position.tolist(),
                "forward": session.pose.forward.tolist(),
            },
            "config_version": session.config_version,
            "pose_version": session.pose_version,
        }

    @app.get("/api/frame")
    def get_frame(
        view: int = Query(default=1),
        mode: Literal["sweep", "baseline", "split"] = Query(default="sweep"),
    ):
        if session.scene is None:
            raise HTTPException(status_code=404, detail="no scene loaded")
        png, headers, hit = session.frame_png(view, mode)
        headers = dict(headers)
        headers["X-Cache"] = "hit" if hit else "miss"
        return Response(content=png, media_type="image/png", headers=headers)

    @app.get("/api/quilt")
    def get_quilt():
        if session.scene is None:
            raise HTTPException(status_code=404, detail="no scene loaded")
        png, headers, hit = session.quilt_png()
        headers = dict(headers)
        headers["X-Cache"] = "hit" if hit else "miss"
        return Response(content=png, media_type="image/png", headers=headers)

    @app.get("/api/stats")
    def get_stats():
        return session.stats()

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="viewer")
    return app


def serve(
    scene: Scene,
    cfg: DisplayConfig,
    pose: CameraPose | None = None,
    host: str = "127.0.0.1",
    port: int = 8000,
    static_dir: str | None = None,
) -> None:
    import uvicorn

    app = create_app(scene, cfg, pose, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
