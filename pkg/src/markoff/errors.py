class MarkoffError(Exception):
    """Base class for every error raised by the library."""

    code = "error"


class InvalidInput(MarkoffError, ValueError):
    code = "invalid_input"


class NonRealInput(InvalidInput):
    code = "non_real_input"


class InvalidSpec(InvalidInput):
    code = "invalid_spec"


class ConfigError(InvalidInput):
    code = "config_error"


class DegenerateRootFailure(MarkoffError, ArithmeticError):
    code = "degenerate_root_failure"


class StepBudgetExceeded(MarkoffError, RuntimeError):
    code = "step_budget_exceeded"


class ParabolicCenterUndefined(MarkoffError, ArithmeticError):
    code = "parabolic_center_undefined"


class NotLoxodromic(MarkoffError, ArithmeticError):
    code = "not_loxodromic"


class ResidualTooLarge(MarkoffError, ValueError):
    code = "residual_too_large"


class NotBqAccepted(MarkoffError, RuntimeError):
    code = "not_bq_accepted"


class SeedNotAvailable(MarkoffError, ValueError):
    code = "seed_not_available"
