"""Error taxonomy shared by all modules.

Every failure mode raised by the library derives from AvgsmoothError so a
caller (notably the CLI) can map classes of failures to exit codes without
string matching.
"""
from __future__ import annotations

__all__ = [
    "AvgsmoothError",
    "AsymmetricMatrix",
    "NegativeDistance",
    "TriangleViolation",
    "DuplicatePoints",
    "TooFewPoints",
    "DegenerateSpace",
    "InvalidRadius",
    "EmptyCenters",
    "ZeroDistanceToNonAnchor",
    "EmptyAnchors",
    "InvalidParameters",
    "Infeasible",
    "Unbounded",
    "SolverFailure",
    "NonconvergenceAfterMaxIters",
    "InfeasibleDemand",
    "TooLarge",
    "EpsilonOutOfRange",
    "WeakMeanTooLarge",
    "InvalidParameter",
    "ParseError",
    "ValidationError",
    "SchemaMismatch",
]


class AvgsmoothError(Exception):
    """Base class for all library errors."""


# -- metric construction -------------------------------------------------

class AsymmetricMatrix(AvgsmoothError):
    """Distance matrix is not symmetric."""


class NegativeDistance(AvgsmoothError):
    """A pairwise distance is negative (or the diagonal is nonzero)."""


class TriangleViolation(AvgsmoothError):
    """The triangle inequality fails for some triple."""


class DuplicatePoints(AvgsmoothError):
    """Two distinct indices sit at distance zero."""


class TooFewPoints(AvgsmoothError):
    """The construction needs more points than were given."""


class DegenerateSpace(AvgsmoothError):
    """Operation undefined on this space (e.g. aspect ratio of one point)."""


# -- nets and hierarchies ------------------------------------------------

class InvalidRadius(AvgsmoothError):
    """Net radius must be a positive real."""


class EmptyCenters(AvgsmoothError):
    """Voronoi assignment against an empty center list."""


# -- extension -----------------------------------------------------------

class ZeroDistanceToNonAnchor(AvgsmoothError):
    """A query declared distinct from all anchors is at distance <= 0 to one."""


class EmptyAnchors(AvgsmoothError):
    """Extension requires at least one anchor."""


# -- defects -------------------------------------------------------------

class InvalidParameters(AvgsmoothError):
    """Defect parameters out of range (eta, ell, c must be positive)."""


# -- LP solvers ----------------------------------------------------------

class Infeasible(AvgsmoothError):
    """Linear program has no feasible point."""


class Unbounded(AvgsmoothError):
    """Linear program objective is unbounded below."""


class SolverFailure(AvgsmoothError):
    """Solver exceeded its iteration budget or failed a residual check."""


class NonconvergenceAfterMaxIters(AvgsmoothError):
    """Iterative approximate solver failed to produce a feasible point."""


class InfeasibleDemand(AvgsmoothError):
    """Knapsack cover demand exceeds the total size of all items."""


class TooLarge(AvgsmoothError):
    """Problem size exceeds the limit of the requested exact backend."""


# -- adversarial extension ----------------------------------------------

class EpsilonOutOfRange(AvgsmoothError):
    """epsilon must satisfy 0 < epsilon < 1 and n >= 1/epsilon."""


class WeakMeanTooLarge(AvgsmoothError):
    """Classification extension requires weak mean slope <= n."""


# -- CLI / IO ------------------------------------------------------------

class InvalidParameter(AvgsmoothError):
    """A CLI flag value is outside its documented domain."""


class ParseError(AvgsmoothError):
    """Input file could not be parsed."""


class ValidationError(AvgsmoothError):
    """Semantically invalid input (weights, labels, shapes)."""


class SchemaMismatch(AvgsmoothError):
    """Train and test files do not share a coordinate schema."""
