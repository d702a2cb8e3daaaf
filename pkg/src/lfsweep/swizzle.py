"""Swizzle blending: composite the sweeping planes into the quilt views.

Every quilt pixel is projected onto each plane (an affine map per view and
plane), sampled with nearest or bilinear interpolation, and front-to-back
alpha blended.  Plane colors are premultiplied, so blending is
``C += T_acc * c_k; T_acc *= t_k`` with planes visited in ascending
distance.  Samples outside a plane's window read as fully transparent:
each plane is a finite window onto a disjoint depth slab, so clamping
would smear its borders across the quilt.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import _kernels
from .config import DisplayConfig
from .errors import ConfigurationError
from .geometry import QuiltViewParams, ReferenceCamera, projection_coeffs, quilt_view_params

QUILT_FORMAT = "lfsweep-quilt-v1"


@dataclass
class Quilt:
    """A grid of rendered views plus their residual transmittance.

    views     (views_y, views_x, res_y, res_x, 3) float32, premultiplied
    residual  (views_y, views_x, res_y, res_x) float32 leftover transmittance
    config    the DisplayConfig snapshot the quilt was rendered with
    """

    views: np.ndarray
    residual: np.ndarray
    config: DisplayConfig

    def view_image(self, j: int, i: int = 1, background=(0.0, 0.0, 0.0)) -> np.ndarray:
        """View (column j, row i) composited over ``background``, float32."""
        bg = np.asarray(background, np.float32)
        return self.views[i - 1, j - 1] + self.residual[i - 1, j - 1, :, :, None] * bg

    def to_mosaic(self, background=(0.0, 0.0, 0.0)) -> np.ndarray:
        """Single u8 image: views left-to-right, bottom-to-top, view 1 at
        the bottom-left (the common quilt layout)."""
        vy, vx, h, w, _ = self.views.shape
        out = np.empty((vy * h, vx * w, 3), np.uint8)
        for i in range(1, vy + 1):
            for j in range(1, vx + 1):
                img = np.clip(self.view_image(j, i, background), 0.0, 1.0)
                y0 = (vy - i) * h
                out[y0 : y0 + h, (j - 1) * w : j * w] = np.rint(img * 255.0).astype(np.uint8)
        return out

    def save(self, path, background=(0.0, 0.0, 0.0)) -> Path:
        """Write the quilt PNG plus a JSON sidecar with the display config."""
        path = Path(path)
        Image.fromarray(self.to_mosaic(background)).save(path)
        sidecar = path.with_suffix(".json")
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "format": QUILT_FORMAT,
                    "display_config": self.config.to_dict(),
                    "background": [float(c) for c in background],
                },
                fh,
                indent=2,
            )
        return sidecar


def quilt_filename(name: str, cfg: DisplayConfig) -> str:
    """Conventional quilt naming: ``name_qs{Vx}x{Vy}a{aspect}.png``."""
    aspect = cfg.res_x / cfg.res_y
    return f"{name}_qs{cfg.views_x}x{cfg.views_y}a{aspect:g}.png"


def load_quilt_mosaic(path) -> tuple[np.ndarray, DisplayConfig]:
    """Read a quilt PNG + sidecar back into per-view float images.

    Returns (views, config) with views shaped like :attr:`Quilt.views`
    (values in [0, 1], background already baked in).
    """
    path = Path(path)
    with open(path.with_suffix(".json"), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("format") != QUILT_FORMAT:
        raise ConfigurationError(f"{path}: unknown quilt sidecar format {meta.get('format')!r}")
    cfg = DisplayConfig.from_dict(meta["display_config"])
    mosaic = np.asarray(Image.open(path).convert("RGB"), np.float32) / 255.0
    vy, vx, h, w = cfg.views_y, cfg.views_x, cfg.res_y, cfg.res_x
    if mosaic.shape[:2] != (vy * h, vx * w):
        raise ConfigurationError(f"{path}: mosaic {mosaic.shape[:2]} does not match config grid")
    views = np.empty((vy, vx, h, w, 3), np.float32)
    for i in range(1, vy + 1):
        for j in range(1, vx + 1):
            y0 = (vy - i) * h
            views[i - 1, j - 1] = mosaic[y0 : y0 + h, (j - 1) * w : j * w]
    return views, cfg


# ------------------------------------------------------------ plane sampling


def _dequant_scale(planes) -> np.float32:
    return np.float32(1.0 / 255.0) if planes.precision == "u8" else np.float32(1.0)


def _t_full(planes):
    # stored value meaning "exactly transparent" (samples compose as t = 1)
    return np.uint8(255) if planes.precision == "u8" else np.float32(1.0)


def sample_plane(planes, k: int, coord, mode: str = "nearest") -> tuple[np.ndarray, np.ndarray]:
    """Sample plane ``k`` at signed normalized ``coord`` = (u, v).

    Out-of-window coordinates return (0, 1): transparent background, and a
    texel at full stored transmittance reads as exactly (0, 1), matching
    the blend kernels.  Accepts a single coordinate pair or arrays of
    shape (..., 2); returns (rgb, transmittance) as float32.
    """
    if not 0 <= k < planes.n_planes:
        raise IndexError(f"plane index {k} out of range 0..{planes.n_planes - 1}")
    if mode not in ("nearest", "bilinear"):
        raise ValueError(f"unknown interpolation mode {mode!r}")
    coord = np.asarray(coord, np.float64)
    squeeze = coord.ndim == 1
    uv = np.atleast_2d(coord)
    wp, hp = planes.grid
    scale = _dequant_scale(planes)
    t_full = _t_full(planes)
    cplane = planes.color[k]
    tplane = planes.trans[k]
    xp = (uv[..., 0] + 1.0) * wp / 2.0 - 0.5
    yp = (uv[..., 1] + 1.0) * hp / 2.0 - 0.5

    rgb = np.zeros(uv.shape[:-1] + (3,), np.float32)
    alpha = np.zeros(uv.shape[:-1], np.float32)
    if mode == "nearest":
        inside = (xp >= -0.5) & (xp <= wp - 0.5) & (yp >= -0.5) & (yp <= hp - 0.5)
        xi = np.clip(np.floor(xp + 0.5).astype(np.int64), 0, wp - 1)
        yi = np.clip(np.floor(yp + 0.5).astype(np.int64), 0, hp - 1)
        live = inside & (tplane[yi, xi] != t_full)
        rgb[live] = scale * cplane[yi[live], xi[live]].astype(np.float32)
        alpha[live] = np.float32(1.0) - scale * tplane[yi[live], xi[live]].astype(np.float32)
    else:
        x0 = np.floor(xp).astype(np.int64)
        y0 = np.floor(yp).astype(np.int64)
        fx = (xp - x0).astype(np.float32)
        fy = (yp - y0).astype(np.float32)
        for dy in range(2):
            for dx in range(2):
                xi, yi = x0 + dx, y0 + dy
                valid = (xi >= 0) & (xi < wp) & (yi >= 0) & (yi < hp)
                xi_c = np.clip(xi, 0, wp - 1)
                yi_c = np.clip(yi, 0, hp - 1)
                valid &= tplane[yi_c, xi_c] != t_full
                wgt = np.where(dy, fy, np.float32(1.0) - fy) * np.where(dx, fx, np.float32(1.0) - fx)
                wgt = np.where(valid, wgt, np.float32(0.0)).astype(np.float32)
                rgb += (wgt[..., None] * (scale * cplane[yi_c, xi_c].astype(np.float32)))
                alpha += wgt * (np.float32(1.0) - scale * tplane[yi_c, xi_c].astype(np.float32))
    trans = np.float32(1.0) - alpha
    if squeeze:
        return rgb[0], trans[0]
    return rgb, trans


def pixel_affine_coeffs(
    cfg: DisplayConfig,
    ref: ReferenceCamera,
    view: QuiltViewParams,
    distances: np.ndarray,
    plane_grid: tuple[int, int],
    axis: str,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-plane pixel-space affine maps ``xp = A[k] + B[k] * x``.

    Composes the signed-coordinate projection with the pixel-center
    mappings of the view grid and the plane grid.
    """
    wp, hp = plane_grid
    res = cfg.res_x if axis == "x" else cfg.res_y
    span = wp if axis == "x" else hp
    a_arr = np.empty(len(distances))
    b_arr = np.empty(len(distances))
    for k, d_k in enumerate(distances):
        a, b = projection_coeffs(cfg, ref, view, float(d_k), axis)
        b_arr[k] = b * span / res
        a_arr[k] = (a - b + 1.0) * span / 2.0 - 0.5 + 0.5 * b_arr[k]
    return a_arr, b_arr


def nearest_index_luts(
    planes, cfg: DisplayConfig, ref: ReferenceCamera, view: QuiltViewParams
) -> tuple[np.ndarray, np.ndarray]:
    """Precomputed nearest-texel index tables for one view.

    Returns (ix, iy) int32 arrays of shapes (n_planes, res_x) and
    (n_planes, res_y); -1 marks out-of-window pixels, empty planes, and
    texels outside a plane's content box — everything beyond the box is
    exactly transparent, so the blend skips it with identical output.
    """
    wp, hp = planes.grid
    d = np.asarray(planes.distances, np.float64)
    box = planes.content_box

    def axis_lut(axis, span, res, lo, hi):
        a_arr, b_arr = pixel_affine_coeffs(cfg, ref, view, d, planes.grid, axis)
        pix = np.arange(res, dtype=np.float64)
        pos = a_arr[:, None] + b_arr[:, None] * pix[None, :]
        idx = np.clip(np.floor(pos + 0.5), 0, span - 1).astype(np.int32)
        idx[(pos < -0.5) | (pos > span - 0.5)] = -1
        idx[(idx < lo[:, None]) | (idx > hi[:, None])] = -1
        idx[~planes.nonempty, :] = -1
        return idx

    return (
        axis_lut("x", wp, cfg.res_x, box[:, 0], box[:, 1]),
        axis_lut("y", hp, cfg.res_y, box[:, 2], box[:, 3]),
    )


def swizzle_single_view(
    planes,
    cfg: DisplayConfig,
    ref: ReferenceCamera,
    j: int,
    i: int = 1,
    *,
    interp: str | None = None,
    early_termination: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Blend the planes into quilt view (j, i).

    Returns premultiplied color (res_y, res_x, 3) and residual
    transmittance (res_y, res_x), float32.
    """
    mode = cfg.interp if interp is None else interp
    if mode not in ("nearest", "bilinear"):
        raise ValueError(f"unknown interpolation mode {mode!r}")
    d = np.asarray(planes.distances, np.float64)
    if np.any(np.diff(d) < 0):
        raise ConfigurationError("plane distances must be ascending for front-to-back blending")
    view = quilt_view_params(cfg, j, i)
    color = np.zeros((cfg.res_y, cfg.res_x, 3), np.float32)
    trans = np.ones((cfg.res_y, cfg.res_x), np.float32)
    scale = _dequant_scale(planes)
    t_full = _t_full(planes)
    if mode == "nearest":
        ix, iy = nearest_index_luts(planes, cfg, ref, view)
        _kernels.swizzle_view_nearest(
            planes.packed, scale, t_full, ix, iy, early_termination, color, trans
        )
    else:
        ax, bx = pixel_affine_coeffs(cfg, ref, view, d, planes.grid, "x")
        ay, by = pixel_affine_coeffs(cfg, ref, view, d, planes.grid, "y")
        _kernels.swizzle_view_bilinear(
            planes.packed, scale, t_full, planes.nonempty, ax, bx, ay, by, early_termination, color, trans
        )
    return color, trans


def swizzle_blend(
    planes,
    cfg: DisplayConfig,
    ref: ReferenceCamera,
    *,
    interp: str | None = None,
    early_termination: bool = True,
) -> Quilt:
    """Blend the plane stack into the full quilt (all views)."""
    views = np.zeros((cfg.views_y, cfg.views_x, cfg.res_y, cfg.res_x, 3), np.float32)
    residual = np.ones((cfg.views_y, cfg.views_x, cfg.res_y, cfg.res_x), np.float32)
    for i in range(1, cfg.views_y + 1):
        for j in range(1, cfg.views_x + 1):
            color, trans = swizzle_single_view(
                planes, cfg, ref, j, i, interp=interp, early_termination=early_termination
            )
            views[i - 1, j - 1] = color
            residual[i - 1, j - 1] = trans
    return Quilt(views=views, residual=residual, config=cfg)


def blend_order_check(planes) -> np.ndarray:
    """Residual transmittance of the raw stack: per-pixel product of all t_k.

    No projection involved; exposes the telescoping structure of the blend
    for testing (the residual is order-independent).
    """
    scale = float(_dequant_scale(planes))
    residual = np.ones(planes.trans.shape[1:], np.float64)
    for k in range(planes.n_planes):
        residual *= planes.trans[k].astype(np.float64) * scale
    return residual.astype(np.float32)
