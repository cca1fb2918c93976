"""Exception hierarchy shared by every floydlab module."""


class FloydlabError(Exception):
    """Base class for all library errors."""


class DomainError(FloydlabError, ValueError):
    """An argument lies outside the region where a quantity is defined."""


class EvalError(FloydlabError, ArithmeticError):
    """A basis or derived quantity could not be evaluated at the requested point."""


class SingularError(FloydlabError, ArithmeticError):
    """A linear system is numerically degenerate."""


class AiryOverflowError(FloydlabError, OverflowError):
    """Bi(z) or Bi'(z) would exceed the largest finite float."""


class QuadratureError(FloydlabError, ArithmeticError):
    pass


class StepError(FloydlabError, ValueError):
    pass


class BracketError(FloydlabError, ValueError):
    pass


class EigenvalueError(FloydlabError, ValueError):
    """Energy is not a symmetric bound-state eigenvalue of the well."""


class UnwrapError(FloydlabError, ArithmeticError):
    """Reduced action failed to increase monotonically while unwrapping."""


class NoLevelError(FloydlabError, ValueError):
    pass


class ConfigError(FloydlabError, ValueError):
    """Scenario file failed validation."""
