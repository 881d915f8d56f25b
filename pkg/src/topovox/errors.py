"""Exception types shared across the package."""


class TopovoxError(Exception):
    """Base class for all package errors."""


class BadDimension(TopovoxError):
    """Non-positive grid dimensions or edge length."""


class EmptyDomain(TopovoxError):
    """Geometry masking removed every element."""


class EmptyLoadRegion(TopovoxError):
    """A load region selected no nodes."""


class DimensionMismatch(TopovoxError):
    """Vector length does not match the operator's DOF count."""


class NoConvergence(TopovoxError):
    """Iterative solver hit its iteration cap.

    Carries the final relative residual and iteration count.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SingularSystem(TopovoxError):
    """Nonzero load with zero stiffness diagonal on a free DOF."""


class ZeroMassSubspace(TopovoxError):
    """A free DOF carries zero lumped mass."""


class MissingAnalysis(TopovoxError):
    """A constraint references an analysis that was not run."""


class AllWeightsZero(TopovoxError):
    """Every constraint weight collapsed to zero; nothing steers the level-set."""


class SchemaError(TopovoxError):
    """Config document violates the schema. Carries the offending field path."""

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class SemanticError(TopovoxError):
    """Config is well-formed but semantically invalid."""


class ConfigRejected(SemanticError):
    """Constraint setup that would make the optimizer terminate immediately."""
