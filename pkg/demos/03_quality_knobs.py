"""Quality/speed trade-offs of the main knobs: chunk count, plane scale,
interpolation, and plane precision.

Run:  python3 demos/03_quality_knobs.py        (about a minute)
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import lfsweep as lf
from lfsweep.ablation import run_ablation

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scene = lf.generate_synthetic("depth-ramp")
cfg = lf.DisplayConfig()

report = run_ablation(
    scene,
    cfg,
    grid={
        "n_chunk": [8, 16, 32, 64, 128],
        "plane_scale": [1.0, 2.0],
        "interp": ["nearest", "bilinear"],
    },
)
report.save(OUT / "knobs")
print(report.to_csv())

fig, (ax_q, ax_t) = plt.subplots(1, 2, figsize=(11, 4))
for ps in (1.0, 2.0):
    for interp, style in (("nearest", "-o"), ("bilinear", "--s")):
        rows = [r for r in report.rows if r.plane_scale == ps and r.interp == interp and not r.failed]
        rows.sort(key=lambda r: r.n_chunk)
        x = [r.n_chunk for r in rows]
        ax_q.plot(x, [r.psnr for r in rows], style, label=f"Ps={ps:g} {interp}")
        ax_t.plot(x, [r.render_ms_quilt for r in rows], style, label=f"Ps={ps:g} {interp}")
ax_t.axhline(report.rows[0].render_ms_baseline, color="k", ls=":", label="per-view baseline")
ax_q.set_xlabel("plane count")
ax_q.set_ylabel("PSNR vs baseline (dB)")
ax_q.set_xscale("log", base=2)
ax_q.legend(fontsize=8)
ax_t.set_xlabel("plane count")
ax_t.set_ylabel("quilt render time (ms)")
ax_t.set_xscale("log", base=2)
ax_t.legend(fontsize=8)
fig.suptitle("More planes and finer planes buy quality; both cost time and memory")
fig.tight_layout()
fig.savefig(OUT / "knobs.png", dpi=120)
print(f"wrote {OUT / 'knobs.png'} and knobs.csv/.json")
