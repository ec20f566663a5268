"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


class ThresholdError(DomainError):
    """No sampling point reaches the requested indicator cutoff."""


class StateError(RuntimeError):
    """An operation was applied to data in the wrong state."""


class ContractError(ValueError):
    """Inputs violate a shape or value contract between components."""


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
