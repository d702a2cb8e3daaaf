"""Ablation sweeps and timing benchmarks over the render pipeline.

Reports quality (PSNR/SSIM vs the per-view baseline), wall-clock timing,
and plane memory for a grid of knob settings, mirroring the structure of
the usual quality/speed trade-off tables.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .config import DisplayConfig
from .geometry import CameraPose
from .metrics import compare_quilts
from .pipeline import render_baseline_quilt, render_sweep_quilt
from .scene import Scene

KNOB_FIELDS = ("n_chunk", "plane_scale", "interp", "plane_precision")
ROW_FIELDS = (
    "n_chunk", "plane_scale", "interp", "plane_precision", "adaptive_filter",
    "psnr", "ssim", "render_ms_quilt", "render_ms_baseline", "speedup",
    "peak_plane_memory_bytes", "failed", "error",
)


@dataclass
class AblationRow:
    n_chunk: int
    plane_scale: float
    interp: str
    plane_precision: str
    adaptive_filter: bool = True
    psnr: float | None = None
    ssim: float | None = None
    render_ms_quilt: float | None = None
    render_ms_baseline: float | None = None
    speedup: float | None = None
    peak_plane_memory_bytes: int | None = None
    failed: bool = False
    error: str = ""


@dataclass
class AblationReport:
    base_config: dict
    rows: list[AblationRow] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"base_config": self.base_config, "rows": [asdict(r) for r in self.rows]}, indent=2
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: asdict(row)[k] for k in ROW_FIELDS})
        return buf.getvalue()

    def save(self, stem) -> None:
        with open(f"{stem}.json", "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        with open(f"{stem}.csv", "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def run_ablation(
    scene: Scene,
    cfg: DisplayConfig,
    grid: dict | None = None,
    base: CameraPose | None = None,
    *,
    repeats: int = 1,
    include_filter_ablation: bool = False,
) -> AblationReport:
    """Render a knob grid and score each setting against the baseline.

    ``grid`` maps knob names (n_chunk, plane_scale, interp,
    plane_precision) to value lists; unset knobs stay at ``cfg``'s value.
    The baseline quilt is rendered once and reused.  Failures are recorded
    per row instead of aborting the sweep.
    """
    base = base or CameraPose.identity()
    grid = grid or {}
    unknown = set(grid) - set(KNOB_FIELDS)
    if unknown:
        raise ValueError(f"unknown ablation knobs: {sorted(unknown)}")
    values = [grid.get(k, [getattr(cfg, k)]) for k in KNOB_FIELDS]

    baseline, _ = render_baseline_quilt(scene, cfg, base)
    base_ms = _timed_median(lambda: render_baseline_quilt(scene, cfg, base), repeats)

    report = AblationReport(base_config=cfg.to_dict())
    combos = [(n, p, it, pr) for n in values[0] for p in values[1] for it in values[2] for pr in values[3]]
    for n_chunk, plane_scale, interp, precision in combos:
        for adaptive in (True, False) if include_filter_ablation else (True,):
            row = AblationRow(n_chunk, plane_scale, interp, precision, adaptive)
            try:
                sub = cfg.with_overrides(
                    n_chunk=n_chunk, plane_scale=plane_scale, interp=interp, plane_precision=precision
                )
                quilt, stats = render_sweep_quilt(scene, sub, base, adaptive_filter=adaptive)
                quilt_ms = _timed_median(
                    lambda: render_sweep_quilt(scene, sub, base, adaptive_filter=adaptive), repeats
                )
                scores = compare_quilts(quilt, baseline)
                row.psnr = scores["mean_psnr"]
                row.ssim = scores["mean_ssim"]
                row.render_ms_quilt = quilt_ms
                row.render_ms_baseline = base_ms
                row.speedup = base_ms / quilt_ms
                row.peak_plane_memory_bytes = stats.plane_memory_bytes
            except Exception as exc:  # noqa: BLE001 - row-level isolation
                row.failed = True
                row.error = f"{type(exc).__name__}: {exc}"
            report.rows.append(row)
    return report


def _timed_median(fn, repeats: int) -> float:
    times = []
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times) * 1e3)


@dataclass
class BenchmarkRow:
    views_x: int
    views_y: int
    n_chunk: int
    plane_scale: float
    baseline_ms: float
    quilt_ms: float
    speedup: float
    plane_memory_bytes: int

    def as_dict(self) -> dict:
        return asdict(self)


def benchmark(
    scene: Scene,
    cfg: DisplayConfig,
    repeats: int = 3,
    base: CameraPose | None = None,
) -> BenchmarkRow:
    """Median wall time of (a) per-view baseline and (b) plane-sweep quilt.

    One warmup render per path precedes timing, so JIT compilation and
    buffer allocation are excluded (scene loading never counts).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    base = base or CameraPose.identity()
    _, stats = render_sweep_quilt(scene, cfg, base)  # warmup
    render_baseline_quilt(scene, cfg, base)
    quilt_ms = _timed_median(lambda: render_sweep_quilt(scene, cfg, base), repeats)
    baseline_ms = _timed_median(lambda: render_baseline_quilt(scene, cfg, base), repeats)
    return BenchmarkRow(
        views_x=cfg.views_x,
        views_y=cfg.views_y,
        n_chunk=cfg.n_chunk,
        plane_scale=cfg.plane_scale,
        baseline_ms=baseline_ms,
        quilt_ms=quilt_ms,
        speedup=baseline_ms / quilt_ms,
        plane_memory_bytes=stats.plane_memory_bytes,
    )


def benchmark_views_sweep(
    scene: Scene,
    cfg: DisplayConfig,
    view_counts: list[int],
    repeats: int = 3,
    base: CameraPose | None = None,
) -> list[BenchmarkRow]:
    """Benchmark across quilt view counts (the render-time-vs-views curve)."""
    return [benchmark(scene, cfg.with_overrides(views_x=v), repeats, base) for v in view_counts]


def benchmark_rows_to_csv(rows: list[BenchmarkRow]) -> str:
    buf = io.StringIO()
    names = list(rows[0].as_dict()) if rows else []
    writer = csv.DictWriter(buf, fieldnames=names)
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())
    return buf.getvalue()
