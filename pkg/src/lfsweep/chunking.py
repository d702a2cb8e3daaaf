"""Frustum culling and quantile depth chunking of scene primitives.

Primitives are binned into ``n_chunk`` depth slabs holding roughly equal
counts, so each sweeping plane represents a similar amount of content.
Depths are reported relative to the BASE camera (sweep-camera depth plus
its forward offset), matching the plane-projection convention.

Documented conventions (frozen by golden tests):

  * boundaries sit at nearest-rank percentiles of the culled depths;
  * a depth equal to an interior boundary belongs to the LOWER chunk;
  * the median of an even-sized chunk is the mean of the two middle depths;
  * empty chunks are kept (plane distance = midpoint of their boundary
    interval) so there are always exactly ``n_chunk`` planes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import ReferenceCamera
from .scene import GaussianScene, Scene, VoxelScene


@dataclass(frozen=True)
class ChunkPartition:
    """Depth partition of the culled primitives.

    boundaries       (n_chunk + 1,) non-decreasing chunk edges
    plane_distances  (n_chunk,) per-chunk plane depth (median member depth)
    members          per chunk: original primitive indices, (depth, index) order
    member_depths    per chunk: matching base-relative depths
    empty            True when nothing survived culling
    """

    boundaries: np.ndarray
    plane_distances: np.ndarray
    members: list[np.ndarray]
    member_depths: list[np.ndarray]
    empty: bool

    @property
    def n_chunk(self) -> int:
        return len(self.members)

    def assignment(self) -> dict[int, int]:
        """Primitive index -> chunk index, for every culled-in primitive."""
        return {int(i): k for k, idx in enumerate(self.members) for i in idx}

    def counts(self) -> np.ndarray:
        return np.array([len(m) for m in self.members])


def cull_and_depth(
    scene: Scene, ref: ReferenceCamera, margin_per_depth: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Primitives whose centers fall inside the sweep frustum, with depths.

    A guard margin keeps primitives whose center is just outside but whose
    footprint can reach in: 3 sigma of the largest axis scale for splats,
    one voxel diagonal for voxels.  ``margin_per_depth`` adds a further
    depth-proportional slack (world units per unit camera depth), used by
    the render pipeline to cover the screen-space antialiasing dilation.
    Returned depths are base-relative.
    """
    if isinstance(scene, GaussianScene):
        centers = scene.position.astype(np.float64)
        margin = 3.0 * np.exp(scene.log_scale.astype(np.float64)).max(axis=1)
    elif isinstance(scene, VoxelScene):
        centers = scene.centers()
        margin = np.full(scene.count, math.sqrt(3.0) * scene.voxel_size)
    else:
        raise TypeError(f"unsupported scene type {type(scene).__name__}")
    if len(centers) == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.float64)

    cam = ref.pose.world_to_camera(centers)
    tz = cam[:, 2]
    margin = margin + np.maximum(tz, 0.0) * margin_per_depth
    tan_x = math.tan(0.5 * ref.fov_x_ref)
    tan_y = math.tan(0.5 * ref.fov_y_ref)
    keep = (
        (tz > 1e-9)
        & (np.abs(cam[:, 0]) <= tz * tan_x + margin)
        & (np.abs(cam[:, 1]) <= tz * tan_y + margin)
    )
    indices = np.nonzero(keep)[0]
    return indices, tz[indices] + ref.d_forward


def pixel_margin_per_depth(cfg, ref: ReferenceCamera, pixels: float = 4.0) -> float:
    """Cull slack of a few plane pixels, scaled to world units per depth.

    Covers footprint growth from the antialiasing dilation, which the
    3-sigma center margin alone does not account for."""
    from .geometry import plane_pixel_grid

    wp, hp = plane_pixel_grid(cfg)
    return pixels * 2.0 * max(
        math.tan(0.5 * ref.fov_x_ref) / wp, math.tan(0.5 * ref.fov_y_ref) / hp
    )


def quantile_chunk(depths: np.ndarray, n_chunk: int, indices: np.ndarray | None = None) -> ChunkPartition:
    """Partition ``depths`` into ``n_chunk`` balanced slabs.

    ``indices`` are the original primitive ids (defaults to 0..len-1).
    An empty input yields an all-empty partition flagged ``empty``.
    """
    if n_chunk < 1:
        raise ValueError(f"n_chunk must be >= 1, got {n_chunk}")
    depths = np.asarray(depths, np.float64).reshape(-1)
    if indices is None:
        indices = np.arange(len(depths), dtype=np.int64)
    indices = np.asarray(indices, np.int64).reshape(-1)
    if len(indices) != len(depths):
        raise ValueError("indices and depths must have equal length")

    if len(depths) == 0:
        return ChunkPartition(
            boundaries=np.zeros(n_chunk + 1),
            plane_distances=np.zeros(n_chunk),
            members=[np.zeros(0, np.int64) for _ in range(n_chunk)],
            member_depths=[np.zeros(0) for _ in range(n_chunk)],
            empty=True,
        )

    order = np.lexsort((indices, depths))
    sorted_depths = depths[order]
    sorted_indices = indices[order]
    n = len(sorted_depths)

    # nearest-rank percentiles at 0, 100/n_chunk, ..., 100
    ranks = [max(math.ceil(k * n / n_chunk), 1) - 1 for k in range(n_chunk + 1)]
    boundaries = sorted_depths[ranks]

    # interval (b_k, b_{k+1}]; ties at a boundary fall to the lower chunk
    chunk_of = np.searchsorted(boundaries[1:-1], sorted_depths, side="left")

    members, member_depths, plane_distances = [], [], []
    for k in range(n_chunk):
        sel = chunk_of == k
        members.append(sorted_indices[sel])
        member_depths.append(sorted_depths[sel])
        if sel.any():
            plane_distances.append(float(np.median(sorted_depths[sel])))
        else:
            plane_distances.append(float(0.5 * (boundaries[k] + boundaries[k + 1])))
    return ChunkPartition(
        boundaries=boundaries,
        plane_distances=np.asarray(plane_distances),
        members=members,
        member_depths=member_depths,
        empty=False,
    )


def build_partition(scene: Scene, ref: ReferenceCamera, n_chunk: int, cfg=None) -> ChunkPartition:
    """Cull against the sweep camera, then quantile-chunk the survivors.

    With a display config the cull margin gains the pixel-space slack of
    :func:`pixel_margin_per_depth`.
    """
    coeff = pixel_margin_per_depth(cfg, ref) if cfg is not None else 0.0
    indices, depths = cull_and_depth(scene, ref, coeff)
    return quantile_chunk(depths, n_chunk, indices)


def partition_stats(partition: ChunkPartition) -> dict:
    """JSON-ready per-chunk statistics for debugging."""
    return {
        "n_chunk": partition.n_chunk,
        "empty": partition.empty,
        "total": int(partition.counts().sum()),
        "counts": partition.counts().tolist(),
        "plane_distances": [float(d) for d in partition.plane_distances],
        "boundaries": [float(b) for b in partition.boundaries],
    }


def dump_partition_stats(partition: ChunkPartition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(partition_stats(partition), fh, indent=2)
