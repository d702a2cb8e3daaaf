"""Display/camera geometry: visible volume, sweep camera, quilt views.

Coordinate conventions (fixed project-wide):

  * Right-handed camera frame: x right, y down, z forward into the scene.
    A pose's ``orientation`` matrix has those axes as columns (world-from-
    camera rotation).
  * Image coordinates are SIGNED normalized: the image border sits at +-1,
    the principal axis at 0.  Pixel x maps to u = 2*(x + 0.5)/W - 1.
  * Plane distances d_k are measured from the BASE camera position along
    its view axis.

The quilt views are produced by sliding the base camera laterally by
``offset`` while shearing the frustum (``principal``) so that every view's
pixel grid converges on the focal plane: corresponding pixels of all views
hit the same focal-plane point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DisplayConfig
from .errors import ConfigurationError, GeometryError

_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class CameraPose:
    """Position plus world-from-camera rotation (x right, y down, z forward)."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(3)
        r = np.asarray(self.orientation, dtype=np.float64).reshape(3, 3)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", r)
        if np.linalg.norm(r.T @ r - np.eye(3)) >= _ORTHO_TOL:
            raise GeometryError("orientation is not orthonormal")

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def look_at(cls, position, target, up=(0.0, 1.0, 0.0)) -> "CameraPose":
        """Pose at ``position`` with the view axis through ``target``.

        ``up`` is the world direction that should map to image-up (-y).
        """
        position = np.asarray(position, dtype=np.float64).reshape(3)
        target = np.asarray(target, dtype=np.float64).reshape(3)
        up = np.asarray(up, dtype=np.float64).reshape(3)
        f = target - position
        n = np.linalg.norm(f)
        if n < 1e-12:
            raise GeometryError("look_at target coincides with position")
        f = f / n
        r = np.cross(f, up)
        n = np.linalg.norm(r)
        if n < 1e-12:
            raise GeometryError("up direction is parallel to the view axis")
        r = r / n
        d = np.cross(f, r)
        return cls(position, np.stack([r, d, f], axis=1))

    @property
    def right(self) -> np.ndarray:
        return self.orientation[:, 0]

    @property
    def down(self) -> np.ndarray:
        return self.orientation[:, 1]

    @property
    def forward(self) -> np.ndarray:
        return self.orientation[:, 2]

    def translated(self, distance: float) -> "CameraPose":
        """New pose moved ``distance`` along the view axis."""
        return CameraPose(self.position + distance * self.forward, self.orientation)

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        """Map world points (..., 3) into this camera's frame."""
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.position) @ self.orientation


@dataclass(frozen=True)
class ReferenceCamera:
    """The sweep camera: base pose moved forward with a widened FOV.

    Positioned so the whole display-visible volume behind the focal plane
    falls inside its frustum.
    """

    pose: CameraPose
    d_forward: float
    fov_x_ref: float
    fov_y_ref: float

    @property
    def base_position(self) -> np.ndarray:
        return self.pose.position - self.d_forward * self.pose.forward


@dataclass(frozen=True)
class QuiltViewParams:
    """Per-view angles and offsets for one quilt cell.

    ``rho_*`` is the view's angular position inside the viewing cone,
    ``offset_*`` the lateral camera shift, and ``principal_*`` the
    normalized principal-point shift that re-aims the view at the focal
    plane center.
    """

    view_col: int
    view_row: int
    rho_x: float
    rho_y: float
    offset_x: float
    offset_y: float
    principal_x: float
    principal_y: float


def forward_distance(cfg: DisplayConfig) -> float:
    """Distance to move the sweep camera forward from the base camera.

    Chosen per axis so the camera's frustum edge passes through the focal
    window edge while still containing the whole viewing wedge; the
    stricter axis wins.  ``d_shift`` backs the camera off and the result
    is clamped at 0.
    """
    if not cfg.d_focal > 0:
        raise ConfigurationError("d_focal must be positive")
    best = 0.0
    for phi, theta in ((cfg.view_angle_x, cfg.fov_x), (cfg.view_angle_y, cfg.fov_y)):
        tp = math.tan(0.5 * phi)
        tt = math.tan(0.5 * theta)
        best = max(best, cfg.d_focal * tp / (tp + tt))
    return max(best - cfg.d_shift, 0.0)


def reference_camera(cfg: DisplayConfig, base: CameraPose) -> ReferenceCamera:
    """Build the sweep camera for ``cfg`` in front of ``base``."""
    d_fwd = forward_distance(cfg)
    if d_fwd >= cfg.d_focal:
        raise GeometryError(f"forward distance {d_fwd} reaches the focal plane {cfg.d_focal}")
    fov_x = 2.0 * math.atan(cfg.d_focal * math.tan(0.5 * cfg.fov_x) / (cfg.d_focal - d_fwd))
    fov_y = 2.0 * math.atan(cfg.d_focal * math.tan(0.5 * cfg.fov_y) / (cfg.d_focal - d_fwd))
    return ReferenceCamera(base.translated(d_fwd), d_fwd, fov_x, fov_y)


def _view_fraction(index: int, count: int) -> float:
    # single row/column degenerates to the central view
    if count == 1:
        return 0.5
    return (index - 1) / (count - 1)


def quilt_view_params(cfg: DisplayConfig, j: int, i: int = 1) -> QuiltViewParams:
    """Parameters of quilt view at column ``j`` (1..views_x), row ``i``.

    View angles interpolate linearly across the viewing cone; ``j = 1`` is
    the leftmost viewing position (camera shifted toward -x).
    """
    if not 1 <= j <= cfg.views_x:
        raise ValueError(f"view column {j} out of range 1..{cfg.views_x}")
    if not 1 <= i <= cfg.views_y:
        raise ValueError(f"view row {i} out of range 1..{cfg.views_y}")
    rho_x = cfg.view_angle_x * (_view_fraction(j, cfg.views_x) - 0.5)
    rho_y = cfg.view_angle_y * (_view_fraction(i, cfg.views_y) - 0.5)
    return QuiltViewParams(
        view_col=j,
        view_row=i,
        rho_x=rho_x,
        rho_y=rho_y,
        offset_x=cfg.d_focal * math.tan(rho_x),
        offset_y=cfg.d_focal * math.tan(rho_y),
        principal_x=math.tan(rho_x) / math.tan(0.5 * cfg.fov_x),
        principal_y=math.tan(rho_y) / math.tan(0.5 * cfg.fov_y),
    )


def projection_coeffs(
    cfg: DisplayConfig, ref: ReferenceCamera, view: QuiltViewParams, d_k: float, axis: str = "x"
) -> tuple[float, float]:
    """Coefficients (a, b) of the affine quilt-to-plane map u' = a + b*u.

    ``d_k`` is the plane distance from the base camera.  Fails when the
    plane does not lie strictly in front of the sweep camera.
    """
    if d_k <= ref.d_forward:
        raise GeometryError(f"plane distance {d_k} not in front of sweep camera at {ref.d_forward}")
    if axis == "x":
        rho, theta, theta_ref = view.rho_x, cfg.fov_x, ref.fov_x_ref
    elif axis == "y":
        rho, theta, theta_ref = view.rho_y, cfg.fov_y, ref.fov_y_ref
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    denom = (d_k - ref.d_forward) * math.tan(0.5 * theta_ref)
    a = (cfg.d_focal - d_k) * math.tan(rho) / denom
    b = d_k * math.tan(0.5 * theta) / denom
    return a, b


def project_quilt_to_plane(
    cfg: DisplayConfig,
    ref: ReferenceCamera,
    view: QuiltViewParams,
    u,
    d_k: float,
    axis: str = "x",
):
    """Project a signed quilt coordinate ``u`` onto the plane at ``d_k``.

    Returns the signed normalized coordinate in the sweep camera's image.
    Affine in ``u``; the focal plane (d_k == d_focal) is the fixed point
    where u' == u for every view.  Accepts scalars or arrays.
    """
    a, b = projection_coeffs(cfg, ref, view, d_k, axis)
    return a + b * np.asarray(u, dtype=np.float64) if isinstance(u, np.ndarray) else a + b * u


def plane_pixel_grid(cfg: DisplayConfig) -> tuple[int, int]:
    """(width, height) of the sweeping planes: ceil(plane_scale * res)."""
    return (math.ceil(cfg.plane_scale * cfg.res_x), math.ceil(cfg.plane_scale * cfg.res_y))


def signed_pixel_centers(count: int) -> np.ndarray:
    """Signed normalized coordinates of pixel centers, border at +-1."""
    return (2.0 * (np.arange(count) + 0.5)) / count - 1.0
