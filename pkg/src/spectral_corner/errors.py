"""Exception types shared across the package."""


class SpecError(ValueError):
    """Raised when an input specification (domain, field, config) is invalid."""


class NumericalError(RuntimeError):
    """Raised when a numerical stage fails to meet its contract.

    Carries the stage name so orchestration layers can attribute failures.
    """

    def __init__(self, stage: str, message: str, best_estimate=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.best_estimate = best_estimate
