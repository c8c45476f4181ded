"""Exception and warning types shared across the package."""

from __future__ import annotations


class HodgeLabError(Exception):
    """Base class for all package-specific errors."""


# --- complex construction -------------------------------------------------

class NonManifoldEdge(HodgeLabError):
    """An edge is incident to more than two triangles."""


class DanglingFace(HodgeLabError):
    """A simplex references a vertex index out of range."""


class BadRadii(HodgeLabError):
    """Annulus radii are not 0 < r_inner < r_outer."""


class OpenBoundaryChain(HodgeLabError):
    """Boundary edges do not close up into loops."""


# --- metric ---------------------------------------------------------------

class DegenerateTriangle(HodgeLabError):
    """Triangle area below the degeneracy floor."""


class AspectBlowup(HodgeLabError):
    """Triangle aspect ratio exceeds the resolution guard."""


# --- linear algebra -------------------------------------------------------

class SolverStall(HodgeLabError):
    """Iterative solver failed to reach the requested tolerance.

    Attributes:
        iterations: iterations performed before giving up.
        residual: relative residual at the point of failure.
    """

    def __init__(self, message: str, iterations: int = -1, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class RankDeficient(HodgeLabError):
    """Input vectors are numerically dependent.

    Attributes:
        rank: detected numerical rank.
    """

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


class PrimeTooSmall(HodgeLabError):
    """GF(p) ranks disagreed across distinct primes (retry signal)."""


# --- hodge ----------------------------------------------------------------

class AmbiguousKernel(HodgeLabError):
    """Near-kernel split has gap certificate below the acceptance ratio."""


class BadSplit(HodgeLabError):
    """Core subcomplex has no interior or complement is malformed."""


class UnderResolved(HodgeLabError):
    """Mesh resolution below what the requested computation needs."""


class OpenCycle(HodgeLabError):
    """Edge path is not a closed cycle of existing edges."""


# --- ends -----------------------------------------------------------------

class EmptyComplement(HodgeLabError):
    """Core subcomplex leaves no complement vertices."""


class TruncationTooTight(HodgeLabError):
    """A truncation radius leaves no interior vertices to solve on."""


class NonConvergent(HodgeLabError):
    """Exhaustion sequence did not settle on the common core."""


# --- warped ---------------------------------------------------------------

class GridTooCoarse(HodgeLabError):
    """Radial step exceeds the documented ceiling."""


class NotClosed(HodgeLabError):
    """Mode-form fails the discrete closedness requirement."""


class TailTooFat(HodgeLabError):
    """Mode-form carries too much mass near the truncation radius."""


class UnknownOracle(HodgeLabError):
    """Requested analytic oracle name is not in the table."""


class DegreeOutOfRange(HodgeLabError):
    """Cochain degree outside the supported range."""


# --- cli / io -------------------------------------------------------------

class ConfigError(HodgeLabError):
    """Scenario configuration failed to parse or validate."""


class ParseError(HodgeLabError):
    """Mesh or sidecar text failed to parse.

    Attributes:
        line: 1-based line number of the offending token.
        column: 1-based column, 0 when unknown.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.column = column


class ValidationError(HodgeLabError):
    """Parsed data violates a documented invariant."""


class IoError(HodgeLabError):
    """Report files could not be written."""


# --- warnings -------------------------------------------------------------

class BcOnClosedComplexWarning(UserWarning):
    """Boundary condition requested on a closed complex (no-op)."""


class ClusterWarning(UserWarning):
    """Eigenvalue spacing below resolution; ordering within cluster arbitrary."""
