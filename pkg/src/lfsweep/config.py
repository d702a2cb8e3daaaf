"""Display configuration: the full quilt/3D-display parameterization.

Angles are stored in radians internally.  The on-disk key/value format uses
degrees for all angle fields (``fov_x``, ``fov_y``, ``view_angle_x``,
``view_angle_y``); see :func:`load_display_config` for the schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace, asdict

from .errors import ConfigurationError

INTERP_MODES = ("nearest", "bilinear")
PLANE_PRECISIONS = ("u8", "f32")

_ANGLE_KEYS = ("fov_x", "fov_y", "view_angle_x", "view_angle_y")
_INT_KEYS = ("views_x", "views_y", "res_x", "res_y", "n_chunk")
_FLOAT_KEYS = ("d_focal", "d_shift", "plane_scale")
_STR_KEYS = ("interp", "plane_precision")
_ALL_KEYS = _FLOAT_KEYS + _ANGLE_KEYS + _INT_KEYS + _STR_KEYS


@dataclass(frozen=True)
class DisplayConfig:
    """Quilt and sweeping-plane parameters for one display setup.

    d_focal        distance from the base camera to the focal plane (the
                   display "window"), in scene units
    fov_x, fov_y   base camera field of view (radians)
    view_angle_x/y display viewing angles (radians); 0 collapses that axis
    views_x/y      quilt view grid dimensions
    res_x/y        pixels per quilt view
    d_shift        backward shift of the sweep camera (scene units, >= 0)
    n_chunk        number of depth chunks / sweeping planes
    plane_scale    plane resolution multiplier relative to res_x/res_y
    interp         plane sampling mode: "nearest" or "bilinear"
    plane_precision  plane storage: "u8" or "f32"
    """

    d_focal: float = 2.0
    fov_x: float = math.radians(60.0)
    fov_y: float = math.radians(60.0)
    view_angle_x: float = math.radians(35.0)
    view_angle_y: float = 0.0
    views_x: int = 9
    views_y: int = 1
    res_x: int = 128
    res_y: int = 128
    d_shift: float = 0.0
    n_chunk: int = 32
    plane_scale: float = 1.0
    interp: str = "nearest"
    plane_precision: str = "u8"

    def __post_init__(self):
        if not (self.d_focal > 0 and math.isfinite(self.d_focal)):
            raise ConfigurationError(f"d_focal must be positive, got {self.d_focal}")
        for name in ("fov_x", "fov_y"):
            v = getattr(self, name)
            if not 0.0 < v < math.pi:
                raise ConfigurationError(f"{name} must be in (0, pi) radians, got {v}")
        for name in ("view_angle_x", "view_angle_y"):
            v = getattr(self, name)
            if not 0.0 <= v < math.pi:
                raise ConfigurationError(f"{name} must be in [0, pi) radians, got {v}")
        for name in ("views_x", "views_y", "res_x", "res_y", "n_chunk"):
            v = getattr(self, name)
            if not (isinstance(v, int) and v >= 1):
                raise ConfigurationError(f"{name} must be an integer >= 1, got {v!r}")
        if self.d_shift < 0:
            raise ConfigurationError(f"d_shift must be >= 0, got {self.d_shift}")
        if not self.plane_scale > 0:
            raise ConfigurationError(f"plane_scale must be > 0, got {self.plane_scale}")
        if self.interp not in INTERP_MODES:
            raise ConfigurationError(f"interp must be one of {INTERP_MODES}, got {self.interp!r}")
        if self.plane_precision not in PLANE_PRECISIONS:
            raise ConfigurationError(
                f"plane_precision must be one of {PLANE_PRECISIONS}, got {self.plane_precision!r}"
            )

    @property
    def n_views(self) -> int:
        return self.views_x * self.views_y

    def with_overrides(self, **kwargs) -> "DisplayConfig":
        """Return a copy with the given fields replaced (and re-validated)."""
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        """Plain dict with angles in degrees (the file/wire representation)."""
        d = asdict(self)
        for k in _ANGLE_KEYS:
            d[k] = math.degrees(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DisplayConfig":
        """Inverse of :meth:`to_dict`; unknown keys are rejected."""
        unknown = set(d) - set(_ALL_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown display config keys: {sorted(unknown)}")
        kwargs = dict(d)
        for k in _ANGLE_KEYS:
            if k in kwargs:
                kwargs[k] = math.radians(float(kwargs[k]))
        for k in _FLOAT_KEYS:
            if k in kwargs:
                kwargs[k] = float(kwargs[k])
        for k in _INT_KEYS:
            if k in kwargs:
                v = kwargs[k]
                if isinstance(v, float) and not v.is_integer():
                    raise ConfigurationError(f"{k} must be an integer, got {v}")
                kwargs[k] = int(v)
        return cls(**kwargs)


def load_display_config(path) -> DisplayConfig:
    """Parse a ``key = value`` display config file.

    One assignment per line; ``#`` starts a comment; blank lines ignored.
    Angles are given in degrees.  Missing keys fall back to defaults.
    """
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _ALL_KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = value
    kwargs = {}
    for key, value in values.items():
        try:
            if key in _STR_KEYS:
                kwargs[key] = value
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"{path}: bad value for {key!r}: {value!r}") from exc
    return DisplayConfig.from_dict(kwargs)


def save_display_config(cfg: DisplayConfig, path) -> None:
    """Write ``cfg`` in the key/value file format (angles in degrees)."""
    d = cfg.to_dict()
    lines = ["# lfsweep display configuration (angles in degrees)"]
    for k in _ALL_KEYS:
        lines.append(f"{k} = {d[k]}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def config_to_json(cfg: DisplayConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def config_from_json(text: str) -> DisplayConfig:
    return DisplayConfig.from_dict(json.loads(text))
