"""Exception types shared across the package."""


class YieldFanError(Exception):
    """Base class for all package errors."""


class CurveDataError(YieldFanError):
    """Panel file is missing, malformed, or violates the panel contract."""


class DomainError(YieldFanError, ValueError):
    """An argument is outside the mathematical domain of the formula."""


class FeasibilityError(YieldFanError):
    """Covariance matrix is incompatible with the requested decomposition."""


class SolverError(YieldFanError):
    """A numerical routine failed to converge; distinct from infeasibility."""


class DegenerateDataError(YieldFanError):
    """Data carries no information for the requested estimate."""


class SamplerStallError(YieldFanError):
    """A sampler constraint stopped accepting proposals.

    `constraint` names the offending acceptance test; `report` carries the
    counters at the time of the stall.
    """

    def __init__(self, constraint: str, report: dict):
        self.constraint = constraint
        self.report = report
        super().__init__(
            f"sampler stalled on constraint '{constraint}': "
            f"no acceptance in the last {report.get('window')} proposals "
            f"(iteration {report.get('iteration')})"
        )
