"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems give 2, numerical
solver failures give 3.
"""


class InputError(ValueError):
    """Invalid user input: malformed spec file, inadmissible domain, bad flags."""


class InvalidDomainError(InputError):
    """Domain violates hemisphere containment or is geometrically degenerate."""


class SolverError(RuntimeError):
    """A numerical routine failed to converge or produced inconsistent output."""


class BracketError(SolverError):
    """Eigenvalue search could not bracket or refine a root."""


class MeshQualityError(SolverError):
    """Generated mesh violates conformity or minimum-angle requirements."""


class PointOutsideMeshError(InputError):
    """Interpolation request outside the meshed domain."""
