"""Ruled p-minimal surfaces in the Heisenberg group: build, analyze, classify, verify."""
from .errors import (DegenerateDirections, DegenerateTriple, DomainError, ExpressionSyntaxError,
                     GridTooCoarse, InvalidPlane, NormalizationError, PminError, ProfileError,
                     SingularContamination)
from .profile import ProfileFunction, SurfaceProfile, parse_expression
from .kernels import BACKEND

__version__ = "0.1.0"
