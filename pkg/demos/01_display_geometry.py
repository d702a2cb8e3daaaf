"""Tour of the display geometry: visible volume, sweep camera, view fan.

Run from the repository root:  python3 demos/01_display_geometry.py
Writes figures to demos/out/.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import lfsweep as lf

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# A desk-scale display: focal plane 2 units ahead, 60 degree base fov,
# 35 degree horizontal viewing cone, 9 views.
cfg = lf.DisplayConfig()
base = lf.CameraPose.identity()
ref = lf.reference_camera(cfg, base)

print(f"focal distance      : {cfg.d_focal}")
print(f"forward distance    : {ref.d_forward:.4f}")
print(f"sweep camera fov    : {math.degrees(ref.fov_x_ref):.2f} deg (base {math.degrees(cfg.fov_x):.0f})")

# --- top-down sketch: focal window, viewing wedge, sweep frustum ----------
fig, ax = plt.subplots(figsize=(7, 6))
half_w = cfg.d_focal * math.tan(0.5 * cfg.fov_x)
z = np.linspace(cfg.d_focal, 3.2 * cfg.d_focal, 50)

# the wedge visible from the extreme viewing angles, through the window edges
wedge = half_w + (z - cfg.d_focal) * math.tan(0.5 * cfg.view_angle_x)
ax.fill_betweenx(z, -wedge, wedge, alpha=0.15, color="tab:blue", label="display-visible volume")
ax.plot([-half_w, half_w], [cfg.d_focal, cfg.d_focal], "k-", lw=3, label="focal plane (window)")

# sweep camera frustum: passes through the window edge and contains the wedge
zs = np.linspace(ref.d_forward, 3.2 * cfg.d_focal, 50)
frustum = (zs - ref.d_forward) * math.tan(0.5 * ref.fov_x_ref)
ax.plot(frustum, zs, "g--", label="sweep camera frustum")
ax.plot(-frustum, zs, "g--")
ax.plot(0, ref.d_forward, "g^", ms=10, label="sweep camera")

# the fan of quilt view cameras with their convergence on the window center
for j in range(1, cfg.views_x + 1):
    v = lf.quilt_view_params(cfg, j)
    ax.plot(v.offset_x, 0.0, "r.", ms=6)
    ax.plot([v.offset_x, 0.0], [0.0, cfg.d_focal], "r-", alpha=0.25, lw=0.8)
ax.plot([], [], "r.", label=f"{cfg.views_x} quilt cameras")

ax.set_xlabel("x (scene units)")
ax.set_ylabel("z (scene units)")
ax.legend(loc="upper right")
ax.set_title("Plane-sweep geometry, top view")
fig.tight_layout()
fig.savefig(OUT / "geometry_topdown.png", dpi=120)
print(f"wrote {OUT / 'geometry_topdown.png'}")

# --- the focal plane is the fixed point of the quilt-to-plane projection --
view = lf.quilt_view_params(cfg, 1)  # leftmost view
u = np.linspace(-1, 1, 9)
fig, ax = plt.subplots(figsize=(7, 4))
for d_k in (0.75 * cfg.d_focal, cfg.d_focal, 1.5 * cfg.d_focal, 2.5 * cfg.d_focal):
    u_prime = lf.project_quilt_to_plane(cfg, ref, view, u, d_k)
    label = "focal plane (identity)" if d_k == cfg.d_focal else f"d = {d_k:.1f}"
    ax.plot(u, u_prime, marker="o", ms=3, label=label)
ax.plot(u, u, "k:", lw=0.8)
ax.set_xlabel("quilt coordinate u (leftmost view)")
ax.set_ylabel("plane coordinate u'")
ax.legend()
ax.set_title("Affine quilt-to-plane maps; the window is the fixed point")
fig.tight_layout()
fig.savefig(OUT / "geometry_projection.png", dpi=120)
print(f"wrote {OUT / 'geometry_projection.png'}")
