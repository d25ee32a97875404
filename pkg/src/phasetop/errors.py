"""Exception types raised by the library."""


class PhasetopError(Exception):
    """Base class for all library errors."""


class GeometryError(PhasetopError):
    """Degenerate or inconsistent domain description."""


class MeshError(PhasetopError):
    """Internal mesh inconsistency (corrupted refinement data, bad arrays)."""


class SolveError(PhasetopError):
    """Linear solver failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SupportError(PhasetopError):
    """Boundary conditions leave unconstrained rigid-body modes."""


class ConfigError(PhasetopError):
    """Invalid run configuration or benchmark id."""
