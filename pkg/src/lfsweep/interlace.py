"""Lenticular interlacing: map quilt views onto display panel subpixels.

A slanted lenticular sheet assigns each panel subpixel to one viewing
direction.  The mapping is a phase model: the horizontal position of a
subpixel (in pixels, with its channel offset and the slant contribution of
its row) is converted to a fractional position under its lenticule, and
that phase selects the view.  The model is parameterized like common
vendor calibration files (pitch / slant / center / invert / subpixel
order), so device profiles can be loaded from JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class CalibrationProfile:
    """Lenticular lens parameters of one physical display.

    panel_w/h      panel resolution in pixels
    pitch          lenticules across the panel width
    slant          tangent of the lens slant angle (x drift per row)
    center         phase offset in [0, 1)
    subpixel_order "RGB" or "BGR" physical channel layout
    invert         reverse the view ordering
    total_views    number of views the display multiplexes
    """

    panel_w: int
    panel_h: int
    pitch: float
    slant: float
    center: float
    subpixel_order: str = "RGB"
    invert: bool = False
    total_views: int = 45

    def __post_init__(self):
        if self.panel_w < 1 or self.panel_h < 1:
            raise ConfigurationError("panel dimensions must be >= 1")
        if not self.pitch > 0:
            raise ConfigurationError(f"pitch must be > 0, got {self.pitch}")
        if not 0.0 <= self.center < 1.0:
            raise ConfigurationError(f"center must be in [0, 1), got {self.center}")
        if self.subpixel_order not in ("RGB", "BGR"):
            raise ConfigurationError(f"subpixel_order must be RGB or BGR, got {self.subpixel_order!r}")
        if self.total_views < 1:
            raise ConfigurationError("total_views must be >= 1")


def subpixel_phase(cal: CalibrationProfile, x, y, channel) -> np.ndarray:
    """Lenticule phase in [0, 1) of subpixel (x, y, channel).

    Vectorized over any broadcastable inputs.  The channel sits a third of
    a pixel from its neighbors; the slant shifts the effective x position
    linearly with the row index.
    """
    x = np.asarray(x, np.float64)
    y = np.asarray(y, np.float64)
    channel = np.asarray(channel, np.float64)
    if cal.subpixel_order == "BGR":
        channel = 2.0 - channel
    pos = x + channel / 3.0 + y * cal.slant
    phase = pos * cal.pitch / cal.panel_w - cal.center
    return phase - np.floor(phase)


def subpixel_view_index(cal: CalibrationProfile, x, y, channel) -> np.ndarray:
    """View index in [0, total_views) assigned to subpixel (x, y, channel)."""
    phase = subpixel_phase(cal, x, y, channel)
    view = np.floor(phase * cal.total_views).astype(np.int64)
    view = np.clip(view, 0, cal.total_views - 1)
    if cal.invert:
        view = cal.total_views - 1 - view
    return view


def interlace(quilt_views: np.ndarray, cal: CalibrationProfile) -> np.ndarray:
    """Interleave quilt views into the panel base image.

    ``quilt_views`` is (V, H, W, 3) float in [0, 1], ordered view 1..V
    (leftmost first).  Each subpixel bilinearly samples its assigned view
    at the panel resolution.  When V differs from ``cal.total_views`` the
    nearest view is used (no angular blending).
    """
    views = np.asarray(quilt_views, np.float32)
    if views.ndim != 4 or views.shape[-1] != 3:
        raise ConfigurationError(f"quilt views must be (V, H, W, 3), got {views.shape}")
    n_views, h, w, _ = views.shape
    if n_views < 1:
        raise ConfigurationError("need at least one quilt view")

    ys, xs = np.mgrid[0 : cal.panel_h, 0 : cal.panel_w]
    # bilinear sample coordinates of every panel pixel in view space
    sx = (xs + 0.5) * w / cal.panel_w - 0.5
    sy = (ys + 0.5) * h / cal.panel_h - 0.5
    x0 = np.clip(np.floor(sx).astype(np.int64), 0, w - 1)
    y0 = np.clip(np.floor(sy).astype(np.int64), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(sx - x0, 0.0, 1.0).astype(np.float32)[..., None]
    fy = np.clip(sy - y0, 0.0, 1.0).astype(np.float32)[..., None]

    out = np.empty((cal.panel_h, cal.panel_w, 3), np.float32)
    for channel in range(3):
        view = subpixel_view_index(cal, xs, ys, channel)
        if n_views == cal.total_views:
            q = view
        elif cal.total_views == 1:
            q = np.zeros_like(view)
        else:
            q = np.rint(view * (n_views - 1) / (cal.total_views - 1)).astype(np.int64)
        v00 = views[q, y0, x0, channel]
        v01 = views[q, y0, x1, channel]
        v10 = views[q, y1, x0, channel]
        v11 = views[q, y1, x1, channel]
        top = v00 + (v01 - v00) * fx[..., 0]
        bot = v10 + (v11 - v10) * fx[..., 0]
        out[..., channel] = top + (bot - top) * fy[..., 0]
    return np.rint(np.clip(out, 0.0, 1.0) * 255.0).astype(np.uint8)


def simulate_misalignment(cal: CalibrationProfile, delta_slant_deg: float) -> CalibrationProfile:
    """Profile with the lens slant angle perturbed by ``delta_slant_deg``."""
    angle = math.atan(cal.slant) + math.radians(delta_slant_deg)
    return replace(cal, slant=math.tan(angle))


def phase_error_subpixels(cal_a: CalibrationProfile, cal_b: CalibrationProfile, row: int) -> float:
    """Accumulated phase error between two profiles at panel row ``row``,
    measured in subpixel steps (one subpixel = a third of a pixel)."""
    step = (1.0 / 3.0) * cal_a.pitch / cal_a.panel_w
    drift = row * (cal_b.slant - cal_a.slant) * cal_a.pitch / cal_a.panel_w
    return abs(drift) / step


def save_calibration(cal: CalibrationProfile, path) -> None:
    """Write the calibration as JSON with vendor-style key names."""
    doc = {
        "screenW": cal.panel_w,
        "screenH": cal.panel_h,
        "pitch": cal.pitch,
        "slope": cal.slant,
        "center": cal.center,
        "subp": 0 if cal.subpixel_order == "RGB" else 1,
        "invView": int(cal.invert),
        "numViews": cal.total_views,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_calibration(path) -> CalibrationProfile:
    """Read a calibration JSON written by :func:`save_calibration`.

    Vendor files that wrap each number as {"value": x} are unwrapped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)

    def get(key, default=None):
        v = doc.get(key, default)
        if isinstance(v, dict) and "value" in v:
            v = v["value"]
        if v is None:
            raise ConfigurationError(f"calibration file {path} is missing key {key!r}")
        return v

    return CalibrationProfile(
        panel_w=int(get("screenW")),
        panel_h=int(get("screenH")),
        pitch=float(get("pitch")),
        slant=float(get("slope", 0.0)),
        center=float(get("center", 0.0)) % 1.0,
        subpixel_order="BGR" if int(get("subp", 0)) else "RGB",
        invert=bool(int(get("invView", 0))),
        total_views=int(get("numViews", 45)),
    )
