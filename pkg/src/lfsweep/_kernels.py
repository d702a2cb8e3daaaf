"""Numba kernels for splat/voxel compositing and plane swizzle blending.

All kernels write disjoint output regions per parallel work item (tiles or
pixel rows), so results are bit-identical for any thread count.  Float32
accumulation mirrors a scalar per-pixel evaluation exactly: no fastmath,
no reordered reductions.

Shared compositing constants (3DGS practice, also used by the plane path so
the two routes stay comparable):

  CUTOFF_MAHAL_SQ   per-pixel evaluation cutoff on the squared Mahalanobis
                    distance (9 = three sigma)
  ALPHA_MIN         contributions below this are skipped
  ALPHA_MAX         per-splat opacity clamp
  T_STOP            per-pixel early stop for front-to-back compositing
"""

import math
import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numpy as np
from numba import njit, prange

CUTOFF_MAHAL_SQ = 9.0
ALPHA_MIN = 1.0 / 255.0
ALPHA_MAX = 0.99
T_STOP = 1e-4
TILE = 16
# swizzle early-termination threshold: half a u8 quantum
SWIZZLE_T_STOP = 1.0 / 512.0


@njit(cache=True)
def fill_tile_lists(tx0, tx1, ty0, ty1, n_tx, n_ty):
    """CSR tile lists from per-splat tile ranges (splats already sorted).

    Returns (starts, entries): entries[starts[t]:starts[t+1]] are the splat
    ids overlapping tile t, in the global sorted order.
    """
    n_tiles = n_tx * n_ty
    counts = np.zeros(n_tiles + 1, np.int64)
    for s in range(len(tx0)):
        for ty in range(ty0[s], ty1[s] + 1):
            for tx in range(tx0[s], tx1[s] + 1):
                counts[ty * n_tx + tx + 1] += 1
    starts = np.cumsum(counts)
    entries = np.empty(starts[-1], np.int64)
    cursor = starts[:-1].copy()
    for s in range(len(tx0)):
        for ty in range(ty0[s], ty1[s] + 1):
            for tx in range(tx0[s], tx1[s] + 1):
                t = ty * n_tx + tx
                entries[cursor[t]] = s
                cursor[t] += 1
    return starts, entries


@njit(cache=True)
def fill_tile_lists_chunked(chunk_id, tx0, tx1, ty0, ty1, n_tx, n_ty, n_chunks):
    """Like :func:`fill_tile_lists` with a leading chunk dimension.

    Tile ids are ``chunk * n_tx * n_ty + ty * n_tx + tx``; splats must
    already be sorted by (chunk, depth, index) so each tile list stays in
    compositing order.
    """
    per_chunk = n_tx * n_ty
    counts = np.zeros(n_chunks * per_chunk + 1, np.int64)
    for s in range(len(tx0)):
        base = chunk_id[s] * per_chunk
        for ty in range(ty0[s], ty1[s] + 1):
            for tx in range(tx0[s], tx1[s] + 1):
                counts[base + ty * n_tx + tx + 1] += 1
    starts = np.cumsum(counts)
    entries = np.empty(starts[-1], np.int64)
    cursor = starts[:-1].copy()
    for s in range(len(tx0)):
        base = chunk_id[s] * per_chunk
        for ty in range(ty0[s], ty1[s] + 1):
            for tx in range(tx0[s], tx1[s] + 1):
                t = base + ty * n_tx + tx
                entries[cursor[t]] = s
                cursor[t] += 1
    return starts, entries


@njit(cache=True, parallel=True)
def composite_splats_chunked(starts, entries, mean_px, conic, alpha, rgb, color, trans):
    """Per-chunk front-to-back compositing, parallel over (plane, tile).

    ``color`` is (K, H, W, 3) and ``trans`` (K, H, W); every chunk writes
    only its own plane, so chunks can run in any order or in parallel with
    identical results.  Same per-pixel arithmetic as
    :func:`composite_splats`.
    """
    n_chunks, h, w = trans.shape
    n_tx = (w + TILE - 1) // TILE
    n_ty = (h + TILE - 1) // TILE
    per_chunk = n_tx * n_ty
    for t in prange(n_chunks * per_chunk):
        k = t // per_chunk
        rem = t % per_chunk
        ty = rem // n_tx
        tx = rem % n_tx
        y0 = ty * TILE
        x0 = tx * TILE
        y1 = min(y0 + TILE, h)
        x1 = min(x0 + TILE, w)
        for y in range(y0, y1):
            for x in range(x0, x1):
                t_cur = trans[k, y, x]
                if t_cur < T_STOP:
                    continue
                r = color[k, y, x, 0]
                g = color[k, y, x, 1]
                b = color[k, y, x, 2]
                for e in range(starts[t], starts[t + 1]):
                    s = entries[e]
                    dx = np.float32(x) + np.float32(0.5) - mean_px[s, 0]
                    dy = np.float32(y) + np.float32(0.5) - mean_px[s, 1]
                    q = conic[s, 0] * dx * dx + np.float32(2.0) * conic[s, 1] * dx * dy + conic[s, 2] * dy * dy
                    if q > np.float32(CUTOFF_MAHAL_SQ) or q < np.float32(0.0):
                        continue
                    a = alpha[s] * np.exp(np.float32(-0.5) * q)
                    if a < np.float32(ALPHA_MIN):
                        continue
                    if a > np.float32(ALPHA_MAX):
                        a = np.float32(ALPHA_MAX)
                    wgt = t_cur * a
                    r += wgt * rgb[s, 0]
                    g += wgt * rgb[s, 1]
                    b += wgt * rgb[s, 2]
                    t_cur *= np.float32(1.0) - a
                    if t_cur < T_STOP:
                        break
                color[k, y, x, 0] = r
                color[k, y, x, 1] = g
                color[k, y, x, 2] = b
                trans[k, y, x] = t_cur


@njit(cache=True, parallel=True)
def composite_splats(starts, entries, mean_px, conic, alpha, rgb, color, trans):
    """Front-to-back splat compositing, parallel over 16x16 pixel tiles.

    ``color`` accumulates premultiplied RGB, ``trans`` the transmittance;
    both must come in initialized (0 and 1).  Splat order inside each tile
    list is the compositing order.
    """
    h, w = trans.shape
    n_tx = (w + TILE - 1) // TILE
    n_ty = (h + TILE - 1) // TILE
    for t in prange(n_tx * n_ty):
        ty = t // n_tx
        tx = t % n_tx
        y0 = ty * TILE
        x0 = tx * TILE
        y1 = min(y0 + TILE, h)
        x1 = min(x0 + TILE, w)
        for y in range(y0, y1):
            for x in range(x0, x1):
                t_cur = trans[y, x]
                if t_cur < T_STOP:
                    continue
                r = color[y, x, 0]
                g = color[y, x, 1]
                b = color[y, x, 2]
                for e in range(starts[t], starts[t + 1]):
                    s = entries[e]
                    dx = np.float32(x) + np.float32(0.5) - mean_px[s, 0]
                    dy = np.float32(y) + np.float32(0.5) - mean_px[s, 1]
                    q = conic[s, 0] * dx * dx + np.float32(2.0) * conic[s, 1] * dx * dy + conic[s, 2] * dy * dy
                    if q > np.float32(CUTOFF_MAHAL_SQ) or q < np.float32(0.0):
                        continue
                    a = alpha[s] * np.exp(np.float32(-0.5) * q)
                    if a < np.float32(ALPHA_MIN):
                        continue
                    if a > np.float32(ALPHA_MAX):
                        a = np.float32(ALPHA_MAX)
                    wgt = t_cur * a
                    r += wgt * rgb[s, 0]
                    g += wgt * rgb[s, 1]
                    b += wgt * rgb[s, 2]
                    t_cur *= np.float32(1.0) - a
                    if t_cur < T_STOP:
                        break
                color[y, x, 0] = r
                color[y, x, 1] = g
                color[y, x, 2] = b
                trans[y, x] = t_cur


@njit(cache=True, parallel=True)
def composite_voxels(starts, entries, lo, hi, sigma_len, rgb, origin, axes, px_to_dir, color, trans):
    """Front-to-back voxel compositing, parallel over 16x16 pixel tiles.

    Pixel coverage comes from an exact ray/box slab test in world space;
    opacity uses the fronto-parallel slab approximation
    ``alpha = 1 - exp(-sigma * voxel_size * |dir_cam|)`` (``sigma_len`` is
    the premultiplied ``sigma * voxel_size``).  ``px_to_dir`` holds
    (inv_fx, cx, inv_fy, cy) mapping pixel centers to camera ray slopes,
    ``axes`` is the world-from-camera rotation.
    """
    h, w = trans.shape
    n_tx = (w + TILE - 1) // TILE
    n_ty = (h + TILE - 1) // TILE
    inv_fx = px_to_dir[0]
    cx = px_to_dir[1]
    inv_fy = px_to_dir[2]
    cy = px_to_dir[3]
    for t in prange(n_tx * n_ty):
        ty = t // n_tx
        tx = t % n_tx
        y0 = ty * TILE
        x0 = tx * TILE
        y1 = min(y0 + TILE, h)
        x1 = min(x0 + TILE, w)
        for y in range(y0, y1):
            for x in range(x0, x1):
                t_cur = trans[y, x]
                if t_cur < T_STOP:
                    continue
                dcx = (x + 0.5 - cx) * inv_fx
                dcy = (y + 0.5 - cy) * inv_fy
                dwx = axes[0, 0] * dcx + axes[0, 1] * dcy + axes[0, 2]
                dwy = axes[1, 0] * dcx + axes[1, 1] * dcy + axes[1, 2]
                dwz = axes[2, 0] * dcx + axes[2, 1] * dcy + axes[2, 2]
                norm_cam = math.sqrt(dcx * dcx + dcy * dcy + 1.0)
                r = color[y, x, 0]
                g = color[y, x, 1]
                b = color[y, x, 2]
                for e in range(starts[t], starts[t + 1]):
                    s = entries[e]
                    tmin = 1e-9
                    tmax = 1e30
                    hit = True
                    for c in range(3):
                        if c == 0:
                            d = dwx
                        elif c == 1:
                            d = dwy
                        else:
                            d = dwz
                        o = origin[c]
                        if abs(d) < 1e-12:
                            if o < lo[s, c] or o > hi[s, c]:
                                hit = False
                                break
                        else:
                            ta = (lo[s, c] - o) / d
                            tb = (hi[s, c] - o) / d
                            if ta > tb:
                                ta, tb = tb, ta
                            if ta > tmin:
                                tmin = ta
                            if tb < tmax:
                                tmax = tb
                    if not hit or tmax < tmin:
                        continue
                    a = np.float32(1.0 - math.exp(-sigma_len[s] * norm_cam))
                    if a < np.float32(ALPHA_MIN):
                        continue
                    if a > np.float32(ALPHA_MAX):
                        a = np.float32(ALPHA_MAX)
                    wgt = t_cur * a
                    r += wgt * rgb[s, 0]
                    g += wgt * rgb[s, 1]
                    b += wgt * rgb[s, 2]
                    t_cur *= np.float32(1.0) - a
                    if t_cur < T_STOP:
                        break
                color[y, x, 0] = r
                color[y, x, 1] = g
                color[y, x, 2] = b
                trans[y, x] = t_cur


@njit(cache=True, parallel=True)
def swizzle_view_nearest(packed, scale, t_one, ix_lut, iy_lut, early_stop, out_color, out_trans):
    """Blend all sweeping planes into one quilt view, parallel over rows.

    ``packed`` holds the planes as (K, Hp, Wp, 4): premultiplied RGB in
    channels 0..2, transmittance in channel 3 (one cache line per sample).
    Planes are visited in storage order (ascending distance).  Nearest
    sampling uses precomputed per-plane index tables ``ix_lut`` (K, W) and
    ``iy_lut`` (K, H); an entry of -1 marks out-of-window samples, whole
    empty planes, and pixels outside a plane's content box, all of which
    read as transparent.  A texel whose stored transmittance equals
    ``t_one`` (255 for u8, 1.0 for f32) is exactly transparent and carries
    no color (guaranteed by premultiplication), so it is skipped outright:
    full transmittance composites as exactly 1.  ``scale`` dequantizes
    stored values (1/255 for u8 planes, 1 for f32).
    """
    n_planes = packed.shape[0]
    h, w = out_trans.shape
    one = np.float32(1.0)
    for y in prange(h):
        for x in range(w):
            t_acc = one
            r = np.float32(0.0)
            g = np.float32(0.0)
            b = np.float32(0.0)
            for k in range(n_planes):
                ix = ix_lut[k, x]
                iy = iy_lut[k, y]
                if ix < 0 or iy < 0:
                    continue
                tv = packed[k, iy, ix, 3]
                if tv == t_one:
                    continue
                r += t_acc * (scale * np.float32(packed[k, iy, ix, 0]))
                g += t_acc * (scale * np.float32(packed[k, iy, ix, 1]))
                b += t_acc * (scale * np.float32(packed[k, iy, ix, 2]))
                t_acc *= scale * np.float32(tv)
                if early_stop and t_acc < np.float32(SWIZZLE_T_STOP):
                    break
            out_color[y, x, 0] = r
            out_color[y, x, 1] = g
            out_color[y, x, 2] = b
            out_trans[y, x] = t_acc


@njit(cache=True, parallel=True)
def swizzle_view_bilinear(packed, scale, t_one, nonempty, ax, bx, ay, by, early_stop, out_color, out_trans):
    """Bilinear variant of :func:`swizzle_view_nearest`.

    Sampling positions come from the affine maps ``xp = ax[k] + bx[k]*x``;
    neighbors outside the plane window or at full stored transmittance
    contribute transparently (colors and alpha interpolate against zero).
    """
    n_planes, hp, wp, _ = packed.shape
    h, w = out_trans.shape
    one = np.float32(1.0)
    for y in prange(h):
        for x in range(w):
            t_acc = one
            r = np.float32(0.0)
            g = np.float32(0.0)
            b = np.float32(0.0)
            for k in range(n_planes):
                if not nonempty[k]:
                    continue
                xp = ax[k] + bx[k] * x
                yp = ay[k] + by[k] * y
                xf = math.floor(xp)
                yf = math.floor(yp)
                x0 = int(xf)
                y0 = int(yf)
                fx = np.float32(xp - xf)
                fy = np.float32(yp - yf)
                ck0 = np.float32(0.0)
                ck1 = np.float32(0.0)
                ck2 = np.float32(0.0)
                a_k = np.float32(0.0)
                for dy in range(2):
                    yi = y0 + dy
                    if yi < 0 or yi >= hp:
                        continue
                    wy = fy if dy == 1 else one - fy
                    for dx in range(2):
                        xi = x0 + dx
                        if xi < 0 or xi >= wp:
                            continue
                        tv = packed[k, yi, xi, 3]
                        if tv == t_one:
                            continue
                        wx = fx if dx == 1 else one - fx
                        wgt = wy * wx
                        ck0 += wgt * (scale * np.float32(packed[k, yi, xi, 0]))
                        ck1 += wgt * (scale * np.float32(packed[k, yi, xi, 1]))
                        ck2 += wgt * (scale * np.float32(packed[k, yi, xi, 2]))
                        a_k += wgt * (one - scale * np.float32(tv))
                r += t_acc * ck0
                g += t_acc * ck1
                b += t_acc * ck2
                t_acc *= one - a_k
                if early_stop and t_acc < np.float32(SWIZZLE_T_STOP):
                    break
            out_color[y, x, 0] = r
            out_color[y, x, 1] = g
            out_color[y, x, 2] = b
            out_trans[y, x] = t_acc


def warmup() -> None:
    """Force-compile every kernel specialization (cached across runs)."""
    starts = np.zeros(2, np.int64)
    entries = np.zeros(0, np.int64)
    color = np.zeros((1, 1, 3), np.float32)
    trans = np.ones((1, 1), np.float32)
    composite_splats(starts, entries, np.zeros((0, 2), np.float32), np.zeros((0, 3), np.float32),
                     np.zeros(0, np.float32), np.zeros((0, 3), np.float32), color, trans)
    composite_voxels(starts, entries, np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0),
                     np.zeros((0, 3), np.float32), np.zeros(3), np.eye(3), np.array([1.0, 0.0, 1.0, 0.0]),
                     color, trans)
    zero = np.zeros(1, np.float64)
    lut = np.zeros((1, 1), np.int32)
    for packed, scale, t_one in (
        (np.zeros((1, 1, 1, 4), np.uint8), np.float32(1.0 / 255.0), np.uint8(255)),
        (np.zeros((1, 1, 1, 4), np.float32), np.float32(1.0), np.float32(1.0)),
    ):
        swizzle_view_nearest(packed, scale, t_one, lut, lut, True, color.copy(), trans.copy())
        swizzle_view_bilinear(packed, scale, t_one, np.ones(1, np.bool_), zero, zero, zero, zero,
                              True, color.copy(), trans.copy())
    _ = fill_tile_lists(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                        np.zeros(0, np.int64), 1, 1)
    _ = fill_tile_lists_chunked(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                                np.zeros(0, np.int64), np.zeros(0, np.int64), 1, 1, 1)
    composite_splats_chunked(np.zeros(2, np.int64), entries, np.zeros((0, 2), np.float32),
                             np.zeros((0, 3), np.float32), np.zeros(0, np.float32),
                             np.zeros((0, 3), np.float32), np.zeros((1, 1, 1, 3), np.float32),
                             np.ones((1, 1, 1), np.float32))
