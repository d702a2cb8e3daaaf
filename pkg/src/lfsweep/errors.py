"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A display configuration value is out of range or inconsistent."""


class GeometryError(ValueError):
    """A camera/plane arrangement is geometrically impossible."""


class SceneFormatError(ValueError):
    """A scene file is structurally invalid (bad header, missing property)."""
