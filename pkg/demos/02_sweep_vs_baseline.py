"""Render one quilt twice: shared-plane sweep vs per-view baseline.

Saves both quilts plus an amplified difference image, and prints the
per-view quality numbers.  Run:  python3 demos/02_sweep_vs_baseline.py
"""

from pathlib import Path

import numpy as np
from PIL import Image

import lfsweep as lf
from lfsweep.metrics import compare_quilts
from lfsweep.pipeline import render_baseline_quilt, render_sweep_quilt
from lfsweep.swizzle import quilt_filename

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = lf.generate_synthetic("depth-ramp")
cfg = lf.DisplayConfig()  # 9 views, 128p, 32 chunks, nearest, u8
print(f"scene: {scene.count} splats | quilt {cfg.views_x}x{cfg.views_y} at {cfg.res_x}p, "
      f"{cfg.n_chunk} planes")

sweep, stats = render_sweep_quilt(scene, cfg)
baseline, base_stats = render_baseline_quilt(scene, cfg)
print(f"sweep   : {stats.total_s * 1e3:6.1f} ms "
      f"(chunk {stats.chunk_s * 1e3:.1f}, planes {stats.raster_s * 1e3:.1f}, "
      f"blend {stats.swizzle_s * 1e3:.1f})")
print(f"baseline: {base_stats.total_s * 1e3:6.1f} ms for {cfg.n_views} views")
print(f"plane memory: {stats.plane_memory_bytes / 1e6:.1f} MB")

sweep.save(OUT / quilt_filename("sweep", cfg))
baseline.save(OUT / quilt_filename("baseline", cfg))

diff = np.abs(sweep.to_mosaic().astype(int) - baseline.to_mosaic().astype(int))
Image.fromarray(np.clip(diff * 8, 0, 255).astype(np.uint8)).save(OUT / "difference_x8.png")

result = compare_quilts(sweep, baseline)
for row in result["per_view"]:
    print(f"  view {row['view_col']}: psnr {row['psnr']:.2f} dB  ssim {row['ssim']:.4f}")
print(f"mean: psnr {result['mean_psnr']:.2f} dB  ssim {result['mean_ssim']:.4f}")
print(f"wrote quilts and difference_x8.png to {OUT}")
