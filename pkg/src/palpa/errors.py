"""Exception types shared across the palpa package."""


class PalpaError(Exception):
    """Base class for all palpa errors."""


class ParseError(PalpaError):
    """A mesh or script file is malformed for its declared format."""


class MaterialError(PalpaError):
    """Vertex colors are missing or out of range after normalization."""


class GeometryError(PalpaError):
    """Mesh geometry is unusable: dangling index or degenerate triangle."""


class InvalidBarycentric(PalpaError):
    """Barycentric coordinates are negative or do not sum to one."""


class RangeError(PalpaError):
    """A scalar parameter lies outside its documented range."""


class DomainError(PalpaError):
    """A numeric argument violates a function's domain (e.g. width <= 0)."""


class VersionError(PalpaError):
    """A trace or protocol version is not supported."""


class SchemaError(PalpaError):
    """A trace file violates the documented record schema or invariants."""


class AssetError(PalpaError):
    """A mesh or preset named in a header cannot be resolved."""


class UnknownPreset(PalpaError):
    """The requested pathology preset is not registered."""


class SessionAborted(PalpaError):
    """The pose source closed before the session was ended."""
