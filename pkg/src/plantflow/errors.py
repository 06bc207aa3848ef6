"""Exception hierarchy shared by the solvers, the data layer and the CLI."""


class PlantFlowError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PlantFlowError, ValueError):
    """A potential or flow argument lies outside the admissible domain."""


class SingularityError(DomainError):
    """Derivative requested where it does not exist (Weibull nu < 1 at 0)."""


class CurveValidityError(PlantFlowError, ValueError):
    """A curve fails the unimodality conditions required by the solvers."""


class ConfigError(PlantFlowError, ValueError):
    """Malformed or out-of-range chain configuration."""


class NoPositiveFlow(PlantFlowError):
    """A segment has zero conductance at its base potential."""


class InfeasibleTarget(PlantFlowError):
    """Requested flow exceeds what a segment can carry from its base."""

    def __init__(self, message: str, max_flow: float = float("nan")):
        super().__init__(message)
        self.max_flow = max_flow


class BracketError(PlantFlowError):
    """Could not enclose a root in a finite bracket."""


class NoRootFound(PlantFlowError):
    """Bottleneck residual scan found no sign change."""


class NoStationarySegment(PlantFlowError):
    """No segment of a solution sits at its capacity."""


class UnsupportedSize(PlantFlowError, ValueError):
    """Chain too long for the exhaustive grid oracle."""
