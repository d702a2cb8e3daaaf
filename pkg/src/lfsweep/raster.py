"""Rasterization: the per-view oracle renderer and the sweeping-plane path.

Both paths share one compositing kernel and one set of constants, so a
single-chunk plane render and a conventional perspective render of the same
primitives agree to quantization.  Splats go through the standard EWA
projection with the antialiasing dilation applied in screen space; the
plane path scales that dilation with :func:`adaptive_filter_strength` so
plane pixels and view pixels blur the same world-space footprint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .chunking import ChunkPartition
from .config import DisplayConfig
from .errors import GeometryError
from .geometry import CameraPose, QuiltViewParams, ReferenceCamera, plane_pixel_grid
from .scene import GaussianScene, Scene, VoxelScene, eval_sh_colors

BASE_FILTER_STRENGTH = 0.3  # screen-space variance dilation, in pixel^2


@dataclass(frozen=True)
class RenderCamera:
    """Pinhole camera in pixel terms: pose, half-FOV tangents, principal shift."""

    position: np.ndarray
    rotation: np.ndarray  # world-from-camera, columns = (right, down, forward)
    tan_half_x: float
    tan_half_y: float
    principal_x: float
    principal_y: float
    width: int
    height: int

    @property
    def focal_px_x(self) -> float:
        return 0.5 * self.width / self.tan_half_x

    @property
    def focal_px_y(self) -> float:
        return 0.5 * self.height / self.tan_half_y

    # pixel coordinates are corner-origin: pixel i covers [i, i+1), its
    # center sits at i + 0.5, so signed coord c maps to (c + 1) * W / 2
    @property
    def center_px_x(self) -> float:
        return (self.principal_x + 1.0) * self.width / 2.0

    @property
    def center_px_y(self) -> float:
        return (self.principal_y + 1.0) * self.height / 2.0


def camera_for_view(cfg: DisplayConfig, base: CameraPose, view: QuiltViewParams) -> RenderCamera:
    """Quilt-view camera: base pose shifted laterally, frustum sheared back."""
    position = base.position + view.offset_x * base.right + view.offset_y * base.down
    return RenderCamera(
        position=position,
        rotation=base.orientation,
        tan_half_x=math.tan(0.5 * cfg.fov_x),
        tan_half_y=math.tan(0.5 * cfg.fov_y),
        principal_x=view.principal_x,
        principal_y=view.principal_y,
        width=cfg.res_x,
        height=cfg.res_y,
    )


def reference_render_camera(cfg: DisplayConfig, ref: ReferenceCamera) -> RenderCamera:
    """Sweep camera over the plane pixel grid (no principal shift)."""
    wp, hp = plane_pixel_grid(cfg)
    return RenderCamera(
        position=ref.pose.position,
        rotation=ref.pose.orientation,
        tan_half_x=math.tan(0.5 * ref.fov_x_ref),
        tan_half_y=math.tan(0.5 * ref.fov_y_ref),
        principal_x=0.0,
        principal_y=0.0,
        width=wp,
        height=hp,
    )


def adaptive_filter_strength(
    cfg: DisplayConfig, ref: ReferenceCamera, base_strength: float = BASE_FILTER_STRENGTH
) -> float:
    """Dilation strength for plane rendering that matches view rendering.

    Scales the base screen-space dilation by the squared ratio of view
    pixel size to plane pixel size at the focal plane, so the planes carry
    the same world-space antialiasing footprint as a conventional render.
    """
    ratio = (
        cfg.d_focal
        * math.tan(0.5 * cfg.fov_x)
        / ((cfg.d_focal - ref.d_forward) * math.tan(0.5 * ref.fov_x_ref))
    )
    return base_strength * (ratio * cfg.plane_scale) ** 2


@dataclass(frozen=True)
class Splat2D:
    """One projected Gaussian: pixel-space mean/covariance plus blend terms.

    ``covariance`` is the dilated screen-space matrix; ``opacity`` already
    includes the dilation compensation factor, so the splat composites as
    premultiplied ``opacity * rgb``.
    """

    mean: np.ndarray
    covariance: np.ndarray
    rgb: np.ndarray
    opacity: float
    depth: float


class _SplatBatch:
    """Projected splats ready for the compositing kernel (SoA, f32)."""

    __slots__ = ("mean_px", "conic", "alpha", "rgb", "radius", "depth", "cov")

    def __init__(self, mean_px, conic, alpha, rgb, radius, depth, cov):
        self.mean_px = mean_px
        self.conic = conic
        self.alpha = alpha
        self.rgb = rgb
        self.radius = radius
        self.depth = depth
        self.cov = cov


def _quat_to_rot(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    r = np.empty((len(q), 3, 3))
    r[:, 0, 0] = 1 - 2 * (y * y + z * z)
    r[:, 0, 1] = 2 * (x * y - w * z)
    r[:, 0, 2] = 2 * (x * z + w * y)
    r[:, 1, 0] = 2 * (x * y + w * z)
    r[:, 1, 1] = 1 - 2 * (x * x + z * z)
    r[:, 1, 2] = 2 * (y * z - w * x)
    r[:, 2, 0] = 2 * (x * z - w * y)
    r[:, 2, 1] = 2 * (y * z + w * x)
    r[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return r


def _world_covariance(scene: GaussianScene, idx: np.ndarray) -> np.ndarray:
    rot = _quat_to_rot(scene.rotation[idx].astype(np.float64))
    scale = np.exp(scene.log_scale[idx].astype(np.float64))
    m = rot * scale[:, None, :]
    return m @ m.transpose(0, 2, 1)


def project_gaussians(
    camera: RenderCamera,
    scene: GaussianScene,
    indices: np.ndarray,
    colors: np.ndarray,
    filter_strength: float = BASE_FILTER_STRENGTH,
) -> tuple[_SplatBatch, np.ndarray]:
    """EWA-project a subset of splats into ``camera`` pixel space.

    Splats behind the camera are dropped; the returned boolean mask marks
    the survivors within ``indices``.  ``colors`` must align with
    ``indices`` and is clipped to [0, 1] for plane storage safety.
    """
    idx = np.asarray(indices, np.int64)
    pos = scene.position[idx].astype(np.float64)
    cam = (pos - camera.position) @ camera.rotation
    front = cam[:, 2] > 1e-6
    idx, cam, colors = idx[front], cam[front], np.asarray(colors)[front]
    if len(idx) == 0:
        return _SplatBatch(*[np.zeros(s, np.float32) for s in ((0, 2), (0, 3), (0,), (0, 3), (0,))],
                           np.zeros(0), np.zeros((0, 2, 2))), front

    tx, ty, tz = cam[:, 0], cam[:, 1], cam[:, 2]
    fx, fy = camera.focal_px_x, camera.focal_px_y

    cov_world = _world_covariance(scene, idx)
    cov_cam = np.einsum("ba,nbc,cd->nad", camera.rotation, cov_world, camera.rotation)
    j = np.zeros((len(idx), 2, 3))
    j[:, 0, 0] = fx / tz
    j[:, 0, 2] = -fx * tx / tz**2
    j[:, 1, 1] = fy / tz
    j[:, 1, 2] = -fy * ty / tz**2
    cov2 = np.einsum("nij,njk,nlk->nil", j, cov_cam, j)

    a, b, c = cov2[:, 0, 0], cov2[:, 0, 1], cov2[:, 1, 1]
    det_raw = np.maximum(a * c - b * b, 0.0)
    s = filter_strength
    ad, cd = a + s, c + s
    det = ad * cd - b * b
    compensation = np.sqrt(det_raw / det)

    alpha = _sigmoid(scene.opacity_logit[idx].astype(np.float64)) * compensation
    conic = np.stack([cd / det, -b / det, ad / det], axis=1)
    lam_max = 0.5 * (ad + cd) + np.sqrt(0.25 * (ad - cd) ** 2 + b * b)
    radius = 3.0 * np.sqrt(lam_max)

    mean_px = np.stack(
        [
            (tx / tz / camera.tan_half_x + camera.principal_x + 1.0) * camera.width / 2.0,
            (ty / tz / camera.tan_half_y + camera.principal_y + 1.0) * camera.height / 2.0,
        ],
        axis=1,
    )
    cov_dilated = np.stack([np.stack([ad, b], -1), np.stack([b, cd], -1)], axis=1)
    return _SplatBatch(
        mean_px=mean_px.astype(np.float32),
        conic=conic.astype(np.float32),
        alpha=alpha.astype(np.float32),
        rgb=np.clip(colors, 0.0, 1.0).astype(np.float32),
        radius=radius.astype(np.float32),
        depth=tz,
        cov=cov_dilated,
    ), front


def project_gaussian(
    camera: RenderCamera,
    scene: GaussianScene,
    index: int,
    filter_strength: float = BASE_FILTER_STRENGTH,
) -> Splat2D | None:
    """Project one splat; returns None when it lies behind the camera."""
    direction = scene.position[index].astype(np.float64) - camera.position
    n = np.linalg.norm(direction)
    color = eval_sh_colors(scene, direction / n if n > 0 else np.array([0.0, 0.0, 1.0]))[index]
    batch, _ = project_gaussians(camera, scene, np.array([index]), color[None], filter_strength)
    if len(batch.alpha) == 0:
        return None
    return Splat2D(
        mean=batch.mean_px[0].astype(np.float64),
        covariance=batch.cov[0],
        rgb=batch.rgb[0],
        opacity=float(batch.alpha[0]),
        depth=float(batch.depth[0]),
    )


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _composite_batch(camera: RenderCamera, batch: _SplatBatch, sort_keys, color, trans) -> None:
    """Sort, tile-bin, and composite a splat batch into (color, trans)."""
    if len(batch.alpha) == 0:
        return
    order = np.lexsort(sort_keys)
    mean_px = np.ascontiguousarray(batch.mean_px[order])
    conic = np.ascontiguousarray(batch.conic[order])
    alpha = np.ascontiguousarray(batch.alpha[order])
    rgb = np.ascontiguousarray(batch.rgb[order])
    radius = batch.radius[order]

    starts, entries = _tile_ranges(mean_px, radius, camera.width, camera.height)
    _kernels.composite_splats(starts, entries, mean_px, conic, alpha, rgb, color, trans)


def _tile_bounds(mean_px, radius, n_tx, n_ty):
    """Clipped per-splat tile ranges; invisible splats get empty ranges."""
    x0 = np.floor((mean_px[:, 0] - radius) / _kernels.TILE).astype(np.int64)
    x1 = np.floor((mean_px[:, 0] + radius) / _kernels.TILE).astype(np.int64)
    y0 = np.floor((mean_px[:, 1] - radius) / _kernels.TILE).astype(np.int64)
    y1 = np.floor((mean_px[:, 1] + radius) / _kernels.TILE).astype(np.int64)
    visible = (x1 >= 0) & (y1 >= 0) & (x0 < n_tx) & (y0 < n_ty) & (radius > 0)
    x0, x1 = np.clip(x0, 0, n_tx - 1), np.clip(x1, 0, n_tx - 1)
    y0, y1 = np.clip(y0, 0, n_ty - 1), np.clip(y1, 0, n_ty - 1)
    x1 = np.where(visible, x1, x0 - 1)
    return x0, x1, y0, y1


def _tile_ranges(mean_px, radius, width, height):
    n_tx = (width + _kernels.TILE - 1) // _kernels.TILE
    n_ty = (height + _kernels.TILE - 1) // _kernels.TILE
    x0, x1, y0, y1 = _tile_bounds(mean_px, radius, n_tx, n_ty)
    return _kernels.fill_tile_lists(x0, x1, y0, y1, n_tx, n_ty)


def _voxel_batch(camera: RenderCamera, scene: VoxelScene, idx: np.ndarray):
    lo = (scene.grid_origin + scene.indices[idx] * scene.voxel_size).astype(np.float64)
    hi = lo + scene.voxel_size
    centers = lo + 0.5 * scene.voxel_size
    cam = (centers - camera.position) @ camera.rotation
    front = cam[:, 2] > 1e-6
    idx, lo, hi, cam = idx[front], lo[front], hi[front], cam[front]
    return idx, lo, hi, cam[:, 2]


def _composite_voxels(camera: RenderCamera, scene: VoxelScene, idx, lo, hi, depth, color, trans):
    if len(idx) == 0:
        return
    order = np.lexsort((idx, depth))
    idx, lo, hi = idx[order], lo[order], hi[order]

    # pixel bbox from the 8 projected corners
    corners = np.stack([np.where(np.array(m)[None, :], hi, lo) for m in
                        [(i & 1, (i >> 1) & 1, (i >> 2) & 1) for i in range(8)]], axis=1)
    cam = (corners - camera.position) @ camera.rotation
    tz = np.maximum(cam[:, :, 2], 1e-6)
    px = (cam[:, :, 0] / tz / camera.tan_half_x + camera.principal_x + 1.0) * camera.width / 2.0
    py = (cam[:, :, 1] / tz / camera.tan_half_y + camera.principal_y + 1.0) * camera.height / 2.0

    n_tx = (camera.width + _kernels.TILE - 1) // _kernels.TILE
    n_ty = (camera.height + _kernels.TILE - 1) // _kernels.TILE
    x0 = np.floor(px.min(axis=1) / _kernels.TILE).astype(np.int64)
    x1 = np.floor(px.max(axis=1) / _kernels.TILE).astype(np.int64)
    y0 = np.floor(py.min(axis=1) / _kernels.TILE).astype(np.int64)
    y1 = np.floor(py.max(axis=1) / _kernels.TILE).astype(np.int64)
    visible = (x1 >= 0) & (y1 >= 0) & (x0 < n_tx) & (y0 < n_ty)
    x0, x1 = np.clip(x0, 0, n_tx - 1), np.clip(x1, 0, n_tx - 1)
    y0, y1 = np.clip(y0, 0, n_ty - 1), np.clip(y1, 0, n_ty - 1)
    x1 = np.where(visible, x1, x0 - 1)
    starts, entries = _kernels.fill_tile_lists(x0, x1, y0, y1, n_tx, n_ty)

    px_to_dir = np.array([
        1.0 / camera.focal_px_x, camera.center_px_x,
        1.0 / camera.focal_px_y, camera.center_px_y,
    ])
    _kernels.composite_voxels(
        starts, entries, lo, hi,
        (scene.density[idx].astype(np.float64) * scene.voxel_size),
        np.clip(scene.rgb[idx], 0.0, 1.0).astype(np.float32),
        camera.position, camera.rotation, px_to_dir, color, trans,
    )


def render_perspective(
    scene: Scene,
    camera: RenderCamera,
    *,
    filter_strength: float = BASE_FILTER_STRENGTH,
    indices: np.ndarray | None = None,
    colors: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Conventional depth-sorted front-to-back render of the whole scene.

    Returns premultiplied color (H, W, 3) and transmittance (H, W), both
    float32.  View-dependent splat colors are evaluated toward this camera
    unless explicit ``colors`` are given.
    """
    color = np.zeros((camera.height, camera.width, 3), np.float32)
    trans = np.ones((camera.height, camera.width), np.float32)
    if indices is None:
        indices = np.arange(scene.count, dtype=np.int64)
    indices = np.asarray(indices, np.int64)

    if isinstance(scene, GaussianScene):
        if colors is None:
            d = scene.position[indices].astype(np.float64) - camera.position
            norm = np.linalg.norm(d, axis=1, keepdims=True)
            sub_dirs = np.divide(d, norm, out=np.zeros_like(d), where=norm > 0)
            dirs = np.zeros((scene.count, 3))
            dirs[indices] = sub_dirs
            colors = eval_sh_colors(scene, dirs)[indices]
        batch, _ = project_gaussians(camera, scene, indices, colors, filter_strength)
        _composite_batch(camera, batch, (np.arange(len(batch.depth)), batch.depth), color, trans)
    elif isinstance(scene, VoxelScene):
        idx, lo, hi, depth = _voxel_batch(camera, scene, indices)
        _composite_voxels(camera, scene, idx, lo, hi, depth, color, trans)
    else:
        raise TypeError(f"unsupported scene type {type(scene).__name__}")
    return color, trans


# -------------------------------------------------------------- PlaneStack


@dataclass
class PlaneStack:
    """The rendered forward-sweeping planes.

    Stored interleaved as ``packed`` (n_chunk, Hp, Wp, 4): premultiplied
    RGB in channels 0..2 and transmittance in channel 3, uint8 or float32.
    ``color`` and ``trans`` expose the conventional array views.

    distances   (n_chunk,) plane depths from the base camera, ascending
    nonempty    per-plane flag; empty planes hold (0, 1) everywhere
    content_box (n_chunk, 4) inclusive [x0, x1, y0, y1] bounds of texels
                below full transmittance (-1s when the plane is blank);
                outside it every texel is exactly transparent
    """

    packed: np.ndarray
    distances: np.ndarray
    precision: str
    nonempty: np.ndarray
    filter_strength: float
    content_box: np.ndarray | None = None

    def __post_init__(self):
        if self.content_box is None:
            self.content_box = _content_boxes(self.packed, self.precision)

    @classmethod
    def from_components(cls, color, trans, distances, precision, nonempty=None, filter_strength=BASE_FILTER_STRENGTH):
        """Build a stack from separate float color/transmittance arrays."""
        color = np.asarray(color, np.float32)
        trans = np.asarray(trans, np.float32)
        k, h, w, _ = color.shape
        if precision == "u8":
            packed = np.empty((k, h, w, 4), np.uint8)
            packed[..., :3] = _quantize_u8(color)
            packed[..., 3] = _quantize_u8(trans)
        else:
            packed = np.empty((k, h, w, 4), np.float32)
            packed[..., :3] = color
            packed[..., 3] = trans
        if nonempty is None:
            nonempty = np.ones(k, np.bool_)
        return cls(packed, np.asarray(distances, np.float64), precision,
                   np.asarray(nonempty, np.bool_), filter_strength)

    @property
    def color(self) -> np.ndarray:
        """Premultiplied RGB view, (n_chunk, Hp, Wp, 3)."""
        return self.packed[..., :3]

    @property
    def trans(self) -> np.ndarray:
        """Transmittance view, (n_chunk, Hp, Wp)."""
        return self.packed[..., 3]

    @property
    def n_planes(self) -> int:
        return self.packed.shape[0]

    @property
    def grid(self) -> tuple[int, int]:
        return self.packed.shape[2], self.packed.shape[1]

    def memory_bytes(self) -> int:
        return self.packed.nbytes

    def plane_f32(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Dequantized contiguous (color, trans) of plane ``k``."""
        if self.precision == "u8":
            return (
                self.color[k].astype(np.float32) * np.float32(1 / 255),
                self.trans[k].astype(np.float32) * np.float32(1 / 255),
            )
        return np.ascontiguousarray(self.color[k]), np.ascontiguousarray(self.trans[k])


def _quantize_u8(x: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def _content_boxes(packed: np.ndarray, precision: str) -> np.ndarray:
    """Inclusive [x0, x1, y0, y1] bounds of below-full-transmittance texels."""
    full = np.uint8(255) if precision == "u8" else np.float32(1.0)
    mask = packed[..., 3] != full
    k = packed.shape[0]
    boxes = np.full((k, 4), -1, np.int32)
    rows = mask.any(axis=2)
    cols = mask.any(axis=1)
    for i in range(k):
        ys = np.nonzero(rows[i])[0]
        xs = np.nonzero(cols[i])[0]
        if len(ys):
            boxes[i] = (xs[0], xs[-1], ys[0], ys[-1])
    return boxes


def rasterize_chunks(
    scene: Scene,
    ref: ReferenceCamera,
    partition: ChunkPartition,
    cfg: DisplayConfig,
    *,
    adaptive: bool = True,
    base_strength: float = BASE_FILTER_STRENGTH,
) -> PlaneStack:
    """Render every depth chunk onto its own plane with the sweep camera.

    Chunks are independent: no occlusion is applied across planes here.
    Splat colors are evaluated once toward the base camera (plane colors
    are only exact for the central view).  With ``adaptive`` off the raw
    ``base_strength`` dilation is used, reproducing the plane-resolution
    filter mismatch of a conventional renderer.
    """
    camera = reference_render_camera(cfg, ref)
    strength = adaptive_filter_strength(cfg, ref, base_strength) if adaptive else base_strength
    wp, hp = camera.width, camera.height
    k = partition.n_chunk

    f32_color = np.zeros((k, hp, wp, 3), np.float32)
    f32_trans = np.ones((k, hp, wp), np.float32)
    nonempty = np.zeros(k, np.bool_)

    if isinstance(scene, GaussianScene):
        # one projection pass and one kernel dispatch over all chunks;
        # members are already (depth, index)-ordered per chunk, so every
        # (plane, tile) list stays in blend order
        all_members = np.concatenate(partition.members) if not partition.empty else np.zeros(0, np.int64)
        chunk_ids = np.repeat(np.arange(k), [len(m) for m in partition.members])
        nonempty[:] = [len(m) > 0 for m in partition.members]
        if len(all_members):
            d = scene.position[all_members].astype(np.float64) - ref.base_position
            norm = np.linalg.norm(d, axis=1, keepdims=True)
            dirs = np.divide(d, norm, out=np.zeros_like(d), where=norm > 0)
            colors = eval_sh_colors(
                GaussianScene(
                    scene.position[all_members], scene.log_scale[all_members],
                    scene.rotation[all_members], scene.opacity_logit[all_members],
                    scene.sh_coeffs[all_members],
                ),
                dirs,
            )
            batch, front = project_gaussians(camera, scene, all_members, colors, strength)
            n_tx = (wp + _kernels.TILE - 1) // _kernels.TILE
            n_ty = (hp + _kernels.TILE - 1) // _kernels.TILE
            x0, x1, y0, y1 = _tile_bounds(batch.mean_px, batch.radius, n_tx, n_ty)
            starts, entries = _kernels.fill_tile_lists_chunked(
                chunk_ids[front], x0, x1, y0, y1, n_tx, n_ty, k
            )
            _kernels.composite_splats_chunked(
                starts, entries, batch.mean_px, batch.conic, batch.alpha, batch.rgb,
                f32_color, f32_trans,
            )
    elif isinstance(scene, VoxelScene):
        for ki in range(k):
            members = partition.members[ki]
            if len(members) == 0:
                continue
            nonempty[ki] = True
            idx, lo, hi, depth = _voxel_batch(camera, scene, members)
            _composite_voxels(camera, scene, idx, lo, hi, depth, f32_color[ki], f32_trans[ki])
    else:
        raise TypeError(f"unsupported scene type {type(scene).__name__}")

    return PlaneStack.from_components(
        f32_color,
        f32_trans,
        distances=partition.plane_distances,
        precision=cfg.plane_precision,
        nonempty=nonempty,
        filter_strength=strength,
    )


def lowpass_planes(planes: PlaneStack, sigma: float) -> PlaneStack:
    """Separable Gaussian blur of every plane's color and transmittance.

    Applied in place (the stack is returned for chaining); ``sigma`` is in
    plane pixels and 0 is the identity.  Used by the voxel path in lieu of
    supersampled rendering.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return planes
    for k in range(planes.n_planes):
        if not planes.nonempty[k]:
            continue
        color, trans = planes.plane_f32(k)
        color = ndimage.gaussian_filter(color, sigma=(sigma, sigma, 0), mode="nearest")
        trans = ndimage.gaussian_filter(trans, sigma=sigma, mode="nearest")
        if planes.precision == "u8":
            planes.color[k] = _quantize_u8(color)
            planes.trans[k] = _quantize_u8(trans)
        else:
            planes.color[k] = color
            planes.trans[k] = trans
    # blurring spreads content, so the cached bounds must be rebuilt
    planes.content_box = _content_boxes(planes.packed, planes.precision)
    return planes


def default_lowpass_sigma(cfg: DisplayConfig) -> float:
    """Default voxel-path plane blur: half a plane pixel per unit scale."""
    return 0.5 * cfg.plane_scale


def dump_planes(planes: PlaneStack, outdir) -> None:
    """Debug dump: per-plane color/transmittance PNG pair + metadata JSON."""
    from pathlib import Path

    from PIL import Image

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for k in range(planes.n_planes):
        color, trans = planes.plane_f32(k)
        Image.fromarray(_quantize_u8(color)).save(outdir / f"plane_{k:03d}_color.png")
        Image.fromarray(_quantize_u8(trans)).save(outdir / f"plane_{k:03d}_trans.png")
    meta = {
        "distances": [float(d) for d in planes.distances],
        "precision": planes.precision,
        "filter_strength": planes.filter_strength,
        "nonempty": planes.nonempty.tolist(),
        "grid": list(planes.grid),
    }
    with open(outdir / "planes.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
