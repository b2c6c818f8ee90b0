"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: DomainError -> 2,
InconsistencyError -> 3, CutoffError -> 4.
"""


class Genus2Error(Exception):
    """Base class for all package errors."""


class DomainError(Genus2Error):
    """A point lies outside the sewing domain, or an input violates a
    geometric precondition (pole, excised disk, non-convergent q)."""


class OutOfDiskError(DomainError):
    """z is outside the convergence disk |z| < D(q) of a Laurent series."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class InconsistencyError(Genus2Error):
    """Two independent computation routes disagree beyond tolerance."""


class CutoffError(Genus2Error):
    """A lattice/theta cutoff is too small for the requested tolerance."""


class IntegrationPathError(Genus2Error):
    """No safe contour exists (path would enter an excised disk), or the
    quadrature failed to converge."""
