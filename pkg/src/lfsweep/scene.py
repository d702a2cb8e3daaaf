"""Scene loading: 3DGS PLY splat soups, sparse voxel files, synthetic scenes.

Gaussian scenes keep opacity and scale in raw (logit/log) form exactly as
stored in the PLY; activations are applied at render time.  Voxel scenes are
piecewise constant: one density and one color per occupied cell.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SceneFormatError

# real spherical harmonics constants, degree 0..3 (3DGS ordering)
SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
)

VOXEL_MAGIC = b"LFVX"
VOXEL_VERSION = 1
SYNTHETIC_NAMES = ("single", "depth-ramp", "shell", "grid")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianScene:
    """A splat soup in the de-facto 3DGS layout.

    position      (N, 3) float32 world coordinates
    log_scale     (N, 3) float32 per-axis log standard deviations
    rotation      (N, 4) float32 unit quaternions, (w, x, y, z)
    opacity_logit (N,)   float32 pre-sigmoid opacities
    sh_coeffs     (N, K, 3) float32 with K = (degree + 1)**2
    """

    position: np.ndarray
    log_scale: np.ndarray
    rotation: np.ndarray
    opacity_logit: np.ndarray
    sh_coeffs: np.ndarray

    def __post_init__(self):
        n = self.position.shape[0]
        object.__setattr__(self, "position", _freeze(self.position.astype(np.float32, copy=False)))
        object.__setattr__(self, "log_scale", _freeze(self.log_scale.astype(np.float32, copy=False)))
        object.__setattr__(self, "rotation", _freeze(self.rotation.astype(np.float32, copy=False)))
        object.__setattr__(
            self, "opacity_logit", _freeze(self.opacity_logit.astype(np.float32, copy=False).reshape(n))
        )
        object.__setattr__(self, "sh_coeffs", _freeze(self.sh_coeffs.astype(np.float32, copy=False)))
        if self.position.shape != (n, 3) or self.log_scale.shape != (n, 3):
            raise SceneFormatError("position/log_scale must be (N, 3)")
        if self.rotation.shape != (n, 4):
            raise SceneFormatError("rotation must be (N, 4)")
        k = self.sh_coeffs.shape[1] if self.sh_coeffs.ndim == 3 else -1
        if self.sh_coeffs.shape != (n, k, 3) or k not in (1, 4, 9, 16):
            raise SceneFormatError(f"sh_coeffs must be (N, K, 3) with K in (1,4,9,16), got {self.sh_coeffs.shape}")
        if not np.all(np.isfinite(self.position)) or not np.all(np.isfinite(self.log_scale)):
            raise SceneFormatError("non-finite position or scale")

    @property
    def count(self) -> int:
        return self.position.shape[0]

    @property
    def sh_degree(self) -> int:
        return int(math.isqrt(self.sh_coeffs.shape[1])) - 1

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.count == 0:
            return np.zeros(3), np.zeros(3)
        return self.position.min(axis=0), self.position.max(axis=0)


@dataclass(frozen=True)
class VoxelScene:
    """Sparse voxel grid with constant density and color per occupied cell."""

    grid_origin: np.ndarray
    voxel_size: float
    indices: np.ndarray  # (M, 3) int32
    density: np.ndarray  # (M,) float32, >= 0
    rgb: np.ndarray  # (M, 3) float32 in [0, 1]

    def __post_init__(self):
        object.__setattr__(self, "grid_origin", _freeze(np.asarray(self.grid_origin, np.float32).reshape(3)))
        object.__setattr__(self, "indices", _freeze(np.asarray(self.indices, np.int32).reshape(-1, 3)))
        m = self.indices.shape[0]
        object.__setattr__(self, "density", _freeze(np.asarray(self.density, np.float32).reshape(m)))
        object.__setattr__(self, "rgb", _freeze(np.asarray(self.rgb, np.float32).reshape(m, 3)))
        # stored as f32 on disk; round now so save/load is exact
        object.__setattr__(self, "voxel_size", float(np.float32(self.voxel_size)))
        if self.voxel_size <= 0:
            raise SceneFormatError(f"voxel_size must be positive, got {self.voxel_size}")
        if m and len(np.unique(self.indices, axis=0)) != m:
            raise SceneFormatError("duplicate voxel indices")
        if not np.all(np.isfinite(self.density)) or np.any(self.density < 0):
            raise SceneFormatError("voxel densities must be finite and >= 0")

    @property
    def count(self) -> int:
        return self.indices.shape[0]

    def centers(self) -> np.ndarray:
        return self.grid_origin + (self.indices.astype(np.float64) + 0.5) * self.voxel_size

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.count == 0:
            return np.zeros(3), np.zeros(3)
        lo = self.grid_origin + self.indices.min(axis=0) * self.voxel_size
        hi = self.grid_origin + (self.indices.max(axis=0) + 1) * self.voxel_size
        return lo, hi


Scene = GaussianScene | VoxelScene


@dataclass(frozen=True)
class SceneSource:
    """Where a scene comes from: a PLY file, a voxel file, or a generator."""

    kind: str  # "gaussian_ply" | "voxel_file" | "synthetic"
    path: str | None = None
    name: str | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> "SceneSource":
        """Parse a CLI scene spec: ``synthetic:<name>`` or a file path."""
        if spec.startswith("synthetic:"):
            name = spec.split(":", 1)[1]
            if name not in SYNTHETIC_NAMES:
                raise ValueError(f"unknown synthetic scene {name!r}; known: {SYNTHETIC_NAMES}")
            return cls(kind="synthetic", name=name, seed=seed)
        suffix = Path(spec).suffix.lower()
        if suffix == ".ply":
            return cls(kind="gaussian_ply", path=spec)
        if suffix == ".lfvox":
            return cls(kind="voxel_file", path=spec)
        raise ValueError(f"cannot infer scene type of {spec!r} (expect .ply, .lfvox, or synthetic:<name>)")

    def load(self) -> Scene:
        if self.kind == "gaussian_ply":
            return load_gaussian_ply(self.path)
        if self.kind == "voxel_file":
            return load_voxels(self.path)
        if self.kind == "synthetic":
            return generate_synthetic(self.name, self.seed, **self.params)
        raise ValueError(f"unknown scene source kind {self.kind!r}")


# ---------------------------------------------------------------- 3DGS PLY

_REQUIRED_PROPS = (
    "x", "y", "z",
    "f_dc_0", "f_dc_1", "f_dc_2",
    "opacity",
    "scale_0", "scale_1", "scale_2",
    "rot_0", "rot_1", "rot_2", "rot_3",
)


def _parse_ply_header(fh) -> tuple[int, list[str], int]:
    """Returns (vertex count, property names, header byte length)."""
    line = fh.readline()
    if line.strip() != b"ply":
        raise SceneFormatError("not a PLY file (missing 'ply' magic)")
    count = None
    props: list[str] = []
    in_vertex = False
    while True:
        line = fh.readline()
        if not line:
            raise SceneFormatError("PLY header ends before end_header")
        text = line.decode("ascii", errors="replace").strip()
        if text == "end_header":
            break
        if text.startswith("comment") or not text:
            continue
        if text.startswith("format"):
            if text.split()[1] != "binary_little_endian":
                raise SceneFormatError(f"unsupported PLY format: {text}")
        elif text.startswith("element"):
            parts = text.split()
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                count = int(parts[2])
        elif text.startswith("property") and in_vertex:
            parts = text.split()
            if parts[1] != "float":
                raise SceneFormatError(f"unsupported property type in {text!r} (only float)")
            props.append(parts[2])
    if count is None:
        raise SceneFormatError("PLY has no vertex element")
    return count, props, fh.tell()


def load_gaussian_ply(path) -> GaussianScene:
    """Load a binary little-endian 3DGS PLY (INRIA property naming).

    Expected vertex properties: x, y, z, f_dc_0..2, f_rest_* (0, 9, 24 or
    45 of them, channel-major), opacity, scale_0..2, rot_0..3.  Extra
    properties (normals etc.) are ignored.
    """
    with open(path, "rb") as fh:
        count, props, _ = _parse_ply_header(fh)
        for name in _REQUIRED_PROPS:
            if name not in props:
                raise SceneFormatError(f"PLY is missing required property {name!r}")
        n_rest = sum(1 for p in props if re.fullmatch(r"f_rest_\d+", p))
        for i in range(n_rest):
            if f"f_rest_{i}" not in props:
                raise SceneFormatError(f"PLY is missing required property 'f_rest_{i}'")
        if n_rest % 3 != 0:
            raise SceneFormatError(f"f_rest count {n_rest} is not a multiple of 3")
        k = n_rest // 3 + 1
        degree = math.isqrt(k) - 1
        if (degree + 1) ** 2 != k or degree > 3:
            raise SceneFormatError(f"f_rest count {n_rest} does not match an SH degree <= 3")

        dtype = np.dtype([(p, "<f4") for p in props])
        raw = fh.read(count * dtype.itemsize)
        if len(raw) < count * dtype.itemsize:
            raise OSError(
                f"truncated PLY: expected {count * dtype.itemsize} payload bytes, got {len(raw)}"
            )
        rec = np.frombuffer(raw, dtype=dtype, count=count)

    position = np.stack([rec["x"], rec["y"], rec["z"]], axis=1)
    log_scale = np.stack([rec["scale_0"], rec["scale_1"], rec["scale_2"]], axis=1)
    rotation = np.stack([rec[f"rot_{i}"] for i in range(4)], axis=1)
    opacity = np.asarray(rec["opacity"])
    sh = np.zeros((count, k, 3), np.float32)
    for ch in range(3):
        sh[:, 0, ch] = rec[f"f_dc_{ch}"]
    # INRIA layout flattens (K-1, 3) channel-major: all R coeffs, then G, then B
    for ch in range(3):
        for m in range(k - 1):
            sh[:, m + 1, ch] = rec[f"f_rest_{ch * (k - 1) + m}"]
    rotation = _normalize_quats(rotation)
    return GaussianScene(position, log_scale, rotation, opacity, sh)


def _normalize_quats(q: np.ndarray) -> np.ndarray:
    """Normalize quaternions, but keep bit-exact values that are already unit."""
    norm = np.linalg.norm(q.astype(np.float64), axis=1)
    bad = np.abs(norm - 1.0) > 1e-6
    if not bad.any():
        return q
    if np.any(norm[bad] < 1e-12):
        raise SceneFormatError("zero-norm quaternion in PLY")
    out = q.copy()
    out[bad] = (q[bad].astype(np.float64) / norm[bad, None]).astype(np.float32)
    return out


def save_gaussian_ply(scene: GaussianScene, path) -> None:
    """Write ``scene`` in the INRIA 3DGS PLY layout (with zero normals)."""
    k = scene.sh_coeffs.shape[1]
    props = ["x", "y", "z", "nx", "ny", "nz"]
    props += [f"f_dc_{c}" for c in range(3)]
    props += [f"f_rest_{i}" for i in range(3 * (k - 1))]
    props += ["opacity"] + [f"scale_{i}" for i in range(3)] + [f"rot_{i}" for i in range(4)]
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {scene.count}"]
    header += [f"property float {p}" for p in props]
    header += ["end_header"]
    rec = np.zeros(scene.count, np.dtype([(p, "<f4") for p in props]))
    rec["x"], rec["y"], rec["z"] = scene.position.T
    for ch in range(3):
        rec[f"f_dc_{ch}"] = scene.sh_coeffs[:, 0, ch]
        for m in range(k - 1):
            rec[f"f_rest_{ch * (k - 1) + m}"] = scene.sh_coeffs[:, m + 1, ch]
    rec["opacity"] = scene.opacity_logit
    for i in range(3):
        rec[f"scale_{i}"] = scene.log_scale[:, i]
    for i in range(4):
        rec[f"rot_{i}"] = scene.rotation[:, i]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(rec.tobytes())


# ------------------------------------------------------------- voxel file

_VOXEL_RECORD = np.dtype([("i", "<i4"), ("j", "<i4"), ("k", "<i4"), ("sigma", "<f4"), ("r", "<f4"), ("g", "<f4"), ("b", "<f4")])
_VOXEL_HEADER = struct.Struct("<4sIQ3ff")  # magic, version, count, origin, voxel_size


def save_voxels(scene: VoxelScene, path) -> None:
    """Write the project voxel format: LFVX header + fixed-size records."""
    with open(path, "wb") as fh:
        fh.write(
            _VOXEL_HEADER.pack(VOXEL_MAGIC, VOXEL_VERSION, scene.count, *scene.grid_origin, scene.voxel_size)
        )
        rec = np.zeros(scene.count, _VOXEL_RECORD)
        rec["i"], rec["j"], rec["k"] = scene.indices.T
        rec["sigma"] = scene.density
        rec["r"], rec["g"], rec["b"] = scene.rgb.T
        fh.write(rec.tobytes())


def load_voxels(path) -> VoxelScene:
    """Read the project voxel format written by :func:`save_voxels`."""
    with open(path, "rb") as fh:
        head = fh.read(_VOXEL_HEADER.size)
        if len(head) < _VOXEL_HEADER.size:
            raise OSError(f"truncated voxel file: header is {len(head)} bytes")
        magic, version, count, ox, oy, oz, size = _VOXEL_HEADER.unpack(head)
        if magic != VOXEL_MAGIC:
            raise SceneFormatError(f"bad voxel magic {magic!r}")
        if version != VOXEL_VERSION:
            raise SceneFormatError(f"unsupported voxel format version {version}")
        raw = fh.read(count * _VOXEL_RECORD.itemsize)
        if len(raw) < count * _VOXEL_RECORD.itemsize:
            raise OSError(f"truncated voxel file: {len(raw)} payload bytes for {count} records")
        rec = np.frombuffer(raw, _VOXEL_RECORD, count=count)
    return VoxelScene(
        grid_origin=np.array([ox, oy, oz], np.float32),
        voxel_size=size,
        indices=np.stack([rec["i"], rec["j"], rec["k"]], axis=1),
        density=np.asarray(rec["sigma"]),
        rgb=np.stack([rec["r"], rec["g"], rec["b"]], axis=1),
    )


# ---------------------------------------------------------- SH evaluation


def eval_sh_colors(scene: GaussianScene, directions: np.ndarray) -> np.ndarray:
    """Evaluate the SH color of every splat toward unit ``directions``.

    ``directions`` is (N, 3) or (3,) (broadcast).  Follows the 3DGS
    convention: +0.5 offset, clamped to >= 0.
    """
    sh = scene.sh_coeffs.astype(np.float64)
    n, k, _ = sh.shape
    d = np.broadcast_to(np.asarray(directions, np.float64), (n, 3))
    color = SH_C0 * sh[:, 0]
    if k > 1:
        x, y, z = d[:, 0:1], d[:, 1:2], d[:, 2:3]
        color = color - SH_C1 * y * sh[:, 1] + SH_C1 * z * sh[:, 2] - SH_C1 * x * sh[:, 3]
    if k > 4:
        x, y, z = d[:, 0:1], d[:, 1:2], d[:, 2:3]
        xx, yy, zz, xy, yz, xz = x * x, y * y, z * z, x * y, y * z, x * z
        color = (
            color
            + SH_C2[0] * xy * sh[:, 4]
            + SH_C2[1] * yz * sh[:, 5]
            + SH_C2[2] * (2.0 * zz - xx - yy) * sh[:, 6]
            + SH_C2[3] * xz * sh[:, 7]
            + SH_C2[4] * (xx - yy) * sh[:, 8]
        )
        if k > 9:
            color = (
                color
                + SH_C3[0] * y * (3.0 * xx - yy) * sh[:, 9]
                + SH_C3[1] * xy * z * sh[:, 10]
                + SH_C3[2] * y * (4.0 * zz - xx - yy) * sh[:, 11]
                + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[:, 12]
                + SH_C3[4] * x * (4.0 * zz - xx - yy) * sh[:, 13]
                + SH_C3[5] * z * (xx - yy) * sh[:, 14]
                + SH_C3[6] * x * (xx - 3.0 * yy) * sh[:, 15]
            )
    return np.maximum(color + 0.5, 0.0).astype(np.float32)


def eval_sh(scene: GaussianScene, index: int, direction) -> np.ndarray:
    """SH color of one splat toward a unit ``direction`` (3,)."""
    sub = GaussianScene(
        scene.position[index : index + 1],
        scene.log_scale[index : index + 1],
        scene.rotation[index : index + 1],
        scene.opacity_logit[index : index + 1],
        scene.sh_coeffs[index : index + 1],
    )
    return eval_sh_colors(sub, np.asarray(direction, np.float64))[0]


# ------------------------------------------------------- synthetic scenes


def _logit(p):
    return np.log(p / (1.0 - p))


def _unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return (q / np.linalg.norm(q, axis=1, keepdims=True)).astype(np.float32)


def generate_synthetic(name: str, seed: int = 0, **params) -> Scene:
    """Deterministic desk-scale test scenes.

    single      one isotropic splat at the focal-plane center
    depth-ramp  1000 splats spread uniformly through the display frustum
    shell       splats on a sphere shell behind the focal plane (occlusion)
    grid        a colored sparse voxel lattice spanning a depth range

    Geometry defaults match a d_focal = 2 display looking down +z from the
    origin; override with keyword parameters where exposed.
    """
    if name == "single":
        depth = params.pop("depth", 2.0)
        scale = params.pop("scale", 0.12)
        opacity = params.pop("opacity", 0.8)
        _reject_params(name, params)
        return GaussianScene(
            position=np.array([[0.0, 0.0, depth]], np.float32),
            log_scale=np.full((1, 3), np.log(scale), np.float32),
            rotation=np.array([[1.0, 0.0, 0.0, 0.0]], np.float32),
            opacity_logit=np.array([_logit(opacity)], np.float32),
            sh_coeffs=np.array([[[0.9, 0.1, -0.6]]], np.float32),
        )

    if name == "depth-ramp":
        # surface-like: mostly opaque splats so rays terminate quickly,
        # the regime where depth-chunk resolution drives quilt quality.
        # scales grow with depth so the on-screen footprint stays constant
        count = params.pop("count", 1000)
        z_range = params.pop("z_range", (1.6, 7.0))
        half_extent = params.pop("half_extent", 2.6)
        _reject_params(name, params)
        rng = np.random.default_rng(seed)
        z = rng.uniform(*z_range, size=count)
        xy = rng.uniform(-half_extent, half_extent, size=(count, 2))
        position = np.column_stack([xy, z]).astype(np.float32)
        log_scale = (
            rng.normal(np.log(0.023), 0.25, size=(count, 3)) + np.log(z)[:, None]
        ).astype(np.float32)
        alpha = rng.uniform(0.7, 0.98, size=count)
        dc = rng.uniform(-1.4, 1.4, size=(count, 1, 3))
        rest = rng.uniform(-0.1, 0.1, size=(count, 3, 3))
        sh = np.concatenate([dc, rest], axis=1).astype(np.float32)
        return GaussianScene(position, log_scale, _unit_quats(rng, count), _logit(alpha).astype(np.float32), sh)

    if name == "shell":
        count = params.pop("count", 800)
        center = np.asarray(params.pop("center", (0.0, 0.0, 3.0)), np.float64)
        radius = params.pop("radius", 0.8)
        _reject_params(name, params)
        rng = np.random.default_rng(seed)
        d = rng.normal(size=(count, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        position = (center + radius * d).astype(np.float32)
        log_scale = rng.normal(np.log(0.08), 0.2, size=(count, 3)).astype(np.float32)
        alpha = rng.uniform(0.5, 0.95, size=count)
        dc = (0.9 * d[:, None, :]).astype(np.float32)  # color varies over the shell
        return GaussianScene(position, log_scale, _unit_quats(rng, count), _logit(alpha).astype(np.float32), dc)

    if name == "grid":
        side = params.pop("side", 6)
        voxel_size = params.pop("voxel_size", 0.09)
        spacing = params.pop("spacing", 3)
        _reject_params(name, params)
        span = side * spacing * voxel_size
        origin = np.array([-span / 2, -span / 2, 2.2], np.float32)
        ii, jj, kk = np.meshgrid(*[np.arange(side) * spacing] * 3, indexing="ij")
        idx = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()]).astype(np.int32)
        rgb = (idx / idx.max()).astype(np.float32)
        density = np.full(len(idx), 40.0, np.float32)
        return VoxelScene(origin, voxel_size, idx, density, rgb)

    raise ValueError(f"unknown synthetic scene {name!r}; known: {SYNTHETIC_NAMES}")


def _reject_params(name, params):
    if params:
        raise ValueError(f"unknown parameters for synthetic scene {name!r}: {sorted(params)}")
