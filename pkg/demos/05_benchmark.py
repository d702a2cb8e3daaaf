"""Render time versus view count: where the shared plane pass pays off.

The per-view baseline re-projects and re-sorts every splat for every view,
so it scales linearly with the view count; the sweep renders the planes
once and only re-blends per view.  Run:  python3 demos/05_benchmark.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import lfsweep as lf
from lfsweep.ablation import benchmark_rows_to_csv, benchmark_views_sweep

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = lf.generate_synthetic("depth-ramp", count=4000)
cfg = lf.DisplayConfig(n_chunk=32)
view_counts = [1, 5, 9, 17, 25, 45]

rows = benchmark_views_sweep(scene, cfg, view_counts, repeats=3)
print(benchmark_rows_to_csv(rows))
(OUT / "bench.csv").write_text(benchmark_rows_to_csv(rows))

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot([r.views_x for r in rows], [r.baseline_ms for r in rows], "o-", label="per-view baseline")
ax.plot([r.views_x for r in rows], [r.quilt_ms for r in rows], "s-", label="plane sweep")
for r in rows:
    if r.views_x >= 9:
        ax.annotate(f"{r.speedup:.1f}x", (r.views_x, r.quilt_ms), textcoords="offset points",
                    xytext=(0, -14), fontsize=8, ha="center")
ax.set_xlabel("quilt views")
ax.set_ylabel("render time (ms)")
ax.set_title(f"{scene.count} splats at {cfg.res_x}p, {cfg.n_chunk} planes")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "bench.png", dpi=120)
print(f"wrote {OUT / 'bench.png'} and bench.csv")
