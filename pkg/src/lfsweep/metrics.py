"""Image quality metrics: PSNR and SSIM, plus quilt-level comparison."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError
from .swizzle import Quilt

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images on a [0, 1] scale.

    Identical images report the cap (99 dB) instead of infinity.
    """
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def _luma601(img: np.ndarray) -> np.ndarray:
    if img.ndim == 2:
        return np.asarray(img, np.float64)
    if img.ndim == 3 and img.shape[-1] == 3:
        return img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got {img.shape}")


def _ssim_window() -> np.ndarray:
    half = SSIM_WINDOW // 2
    g = np.exp(-0.5 * (np.arange(-half, half + 1) / SSIM_SIGMA) ** 2)
    g /= g.sum()
    return np.outer(g, g)


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity on Rec. 601 luma.

    Gaussian 11x11 window with sigma 1.5, population covariances, and the
    standard stability constants; the mean is taken over the valid region
    (windows fully inside the image).
    """
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    ya, yb = _luma601(a), _luma601(b)
    half = SSIM_WINDOW // 2
    if min(ya.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels per side, got {ya.shape}")
    window = _ssim_window()

    def filt(img):
        return ndimage.convolve(img, window, mode="constant")[half:-half, half:-half]

    mu_a = filt(ya)
    mu_b = filt(yb)
    var_a = filt(ya * ya) - mu_a * mu_a
    var_b = filt(yb * yb) - mu_b * mu_b
    cov = filt(ya * yb) - mu_a * mu_b

    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def compare_quilts(q1: Quilt, q2: Quilt, background=(0.0, 0.0, 0.0)) -> dict:
    """Per-view and mean PSNR/SSIM between two quilts of the same config.

    Views are composited over ``background`` before comparison.
    """
    geo1 = {k: v for k, v in q1.config.to_dict().items() if k not in ("n_chunk", "plane_scale", "interp", "plane_precision")}
    geo2 = {k: v for k, v in q2.config.to_dict().items() if k not in ("n_chunk", "plane_scale", "interp", "plane_precision")}
    if geo1 != geo2:
        raise ConfigurationError("quilts were rendered with different view geometry")
    rows = []
    for i in range(1, q1.config.views_y + 1):
        for j in range(1, q1.config.views_x + 1):
            a = np.clip(q1.view_image(j, i, background), 0.0, 1.0)
            b = np.clip(q2.view_image(j, i, background), 0.0, 1.0)
            rows.append({"view_col": j, "view_row": i, "psnr": psnr(a, b), "ssim": ssim(a, b)})
    return {
        "per_view": rows,
        "mean_psnr": float(np.mean([r["psnr"] for r in rows])),
        "mean_ssim": float(np.mean([r["ssim"] for r in rows])),
    }


def compare_view_arrays(views1: np.ndarray, views2: np.ndarray) -> dict:
    """Like :func:`compare_quilts` for raw (Vy, Vx, H, W, 3) view arrays."""
    if views1.shape != views2.shape:
        raise ValueError(f"view array shapes differ: {views1.shape} vs {views2.shape}")
    rows = []
    vy, vx = views1.shape[:2]
    for i in range(vy):
        for j in range(vx):
            a = np.clip(views1[i, j], 0.0, 1.0)
            b = np.clip(views2[i, j], 0.0, 1.0)
            rows.append({"view_col": j + 1, "view_row": i + 1, "psnr": psnr(a, b), "ssim": ssim(a, b)})
    return {
        "per_view": rows,
        "mean_psnr": float(np.mean([r["psnr"] for r in rows])),
        "mean_ssim": float(np.mean([r["ssim"] for r in rows])),
    }
