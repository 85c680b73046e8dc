"""Exception hierarchy shared by all modules."""


class ArtifactError(Exception):
    """Base class for domain errors raised by this package."""


class OmegaViolation(ArtifactError, ValueError):
    """Equivariant parameters with an integral pairwise difference."""


class IllConditioned(ArtifactError, ValueError):
    pass


class DimensionMismatch(ArtifactError, ValueError):
    pass


class NoConvergence(ArtifactError, RuntimeError):
    pass


class StepUnderflow(ArtifactError, RuntimeError):
    pass


class PoorFit(ArtifactError, RuntimeError):
    pass


class GrowthCollision(ArtifactError, RuntimeError):
    pass


class NonTermination(ArtifactError, RuntimeError):
    pass


class IndexOutOfRange(ArtifactError, IndexError):
    pass


class UnwrapFailure(ArtifactError, RuntimeError):
    pass


class GapViolation(ArtifactError, ValueError):
    pass


class PlanInfeasible(ArtifactError, RuntimeError):
    pass


class MissingPowerMap(ArtifactError, ValueError):
    pass


class NonIntegral(ArtifactError, ValueError):
    pass


class BadFusion(ArtifactError, ValueError):
    pass


class PatternViolation(ArtifactError, RuntimeError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ConfigError(ArtifactError, ValueError):
    pass


class InvalidGroupData(ArtifactError, ValueError):
    """Character-table file that fails its consistency checks."""
