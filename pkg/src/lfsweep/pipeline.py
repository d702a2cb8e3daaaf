"""End-to-end render entry points shared by the CLI, service, and benchmarks."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chunking import ChunkPartition, build_partition
from .config import DisplayConfig
from .geometry import CameraPose, reference_camera
from .raster import (
    PlaneStack,
    camera_for_view,
    default_lowpass_sigma,
    lowpass_planes,
    rasterize_chunks,
    render_perspective,
)
from .scene import Scene, VoxelScene
from .swizzle import Quilt, swizzle_blend
from .geometry import quilt_view_params


@dataclass
class RenderStats:
    """Wall-clock stage timings (seconds) and plane memory accounting."""

    chunk_s: float = 0.0
    raster_s: float = 0.0
    swizzle_s: float = 0.0
    total_s: float = 0.0
    plane_memory_bytes: int = 0
    chunk_counts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "chunk_ms": self.chunk_s * 1e3,
            "raster_ms": self.raster_s * 1e3,
            "swizzle_ms": self.swizzle_s * 1e3,
            "total_ms": self.total_s * 1e3,
            "plane_memory_bytes": self.plane_memory_bytes,
        }


def build_planes(
    scene: Scene,
    cfg: DisplayConfig,
    base: CameraPose,
    *,
    adaptive_filter: bool = True,
    lowpass_sigma: float | None = None,
) -> tuple[PlaneStack, ChunkPartition, RenderStats]:
    """Cull, chunk, and rasterize the sweeping planes for one pose/config."""
    stats = RenderStats()
    ref = reference_camera(cfg, base)
    t0 = time.perf_counter()
    partition = build_partition(scene, ref, cfg.n_chunk, cfg)
    t1 = time.perf_counter()
    planes = rasterize_chunks(scene, ref, partition, cfg, adaptive=adaptive_filter)
    if lowpass_sigma is None and isinstance(scene, VoxelScene):
        lowpass_sigma = default_lowpass_sigma(cfg)
    if lowpass_sigma:
        planes = lowpass_planes(planes, lowpass_sigma)
    t2 = time.perf_counter()
    stats.chunk_s = t1 - t0
    stats.raster_s = t2 - t1
    stats.plane_memory_bytes = planes.memory_bytes()
    stats.chunk_counts = partition.counts().tolist()
    return planes, partition, stats


def render_sweep_quilt(
    scene: Scene,
    cfg: DisplayConfig,
    base: CameraPose | None = None,
    *,
    adaptive_filter: bool = True,
    lowpass_sigma: float | None = None,
    early_termination: bool = True,
) -> tuple[Quilt, RenderStats]:
    """Full plane-sweep pipeline: chunk, rasterize planes, swizzle blend."""
    base = base or CameraPose.identity()
    t0 = time.perf_counter()
    planes, _, stats = build_planes(
        scene, cfg, base, adaptive_filter=adaptive_filter, lowpass_sigma=lowpass_sigma
    )
    ref = reference_camera(cfg, base)
    t1 = time.perf_counter()
    quilt = swizzle_blend(planes, cfg, ref, early_termination=early_termination)
    t2 = time.perf_counter()
    stats.swizzle_s = t2 - t1
    stats.total_s = t2 - t0
    return quilt, stats


def render_baseline_quilt(
    scene: Scene, cfg: DisplayConfig, base: CameraPose | None = None
) -> tuple[Quilt, RenderStats]:
    """Oracle path: render every quilt view independently."""
    base = base or CameraPose.identity()
    stats = RenderStats()
    views = np.zeros((cfg.views_y, cfg.views_x, cfg.res_y, cfg.res_x, 3), np.float32)
    residual = np.ones((cfg.views_y, cfg.views_x, cfg.res_y, cfg.res_x), np.float32)
    t0 = time.perf_counter()
    for i in range(1, cfg.views_y + 1):
        for j in range(1, cfg.views_x + 1):
            camera = camera_for_view(cfg, base, quilt_view_params(cfg, j, i))
            color, trans = render_perspective(scene, camera)
            views[i - 1, j - 1] = color
            residual[i - 1, j - 1] = trans
    stats.total_s = time.perf_counter() - t0
    return Quilt(views=views, residual=residual, config=cfg), stats
