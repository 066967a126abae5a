"""Exception and warning types shared across the package."""


class PminError(Exception):
    """Base class for package errors."""


class ExpressionSyntaxError(PminError, SyntaxError):
    """Malformed profile expression.  ``position`` is the 0-based offset."""

    def __init__(self, message, position, source=""):
        super().__init__(f"{message} at position {position}")
        self.msg = message
        self.position = position
        self.source = source
        self.key = None

    def __str__(self):
        where = f"{self.key}: " if self.key else ""
        return f"{where}{self.msg} at position {self.position}"


class DomainError(PminError, ValueError):
    """A profile function is undefined (or not finite) at some parameter."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ProfileError(PminError, ValueError):
    """Invalid surface profile description."""


class NormalizationError(PminError, ValueError):
    pass


class DegenerateTriple(PminError, ValueError):
    """Three rulings whose projections do not bound a proper triangle."""


class InvalidPlane(PminError, ValueError):
    """The plane is vertical, hence not the contact plane of any point."""


class SingularContamination(PminError, RuntimeError):
    """Singular-set exclusion removed too much of a graph patch."""


class GridTooCoarse(UserWarning):
    """Root refinement did not reach the requested residual."""


class DegenerateDirections(UserWarning):
    """All sampled ruling directions are parallel."""
