"""Exception hierarchy shared by all solver modules."""


class DeltaSurfError(Exception):
    """Base class for every error raised by this package."""


class ImmersionError(DeltaSurfError):
    """The chart metric is degenerate at an evaluated point."""


class OutOfTubeError(DeltaSurfError):
    """A normal offset lies outside the tubular neighbourhood."""


class MeshError(DeltaSurfError):
    """Mesh generation or mesh quality failure."""


class DomainError(DeltaSurfError):
    """A requested parameter domain leaves the region covered by the chart."""


class ConvergenceError(DeltaSurfError):
    """An iterative solver stopped before reaching its tolerance.

    ``partial`` carries whatever the solver had computed so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ValidityError(DeltaSurfError):
    """A formula was evaluated outside its range of validity."""


class InsufficientDataError(DeltaSurfError):
    """Too few records for a fit."""


class ConfigError(DeltaSurfError):
    """Invalid run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
