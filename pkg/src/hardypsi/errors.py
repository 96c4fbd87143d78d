"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code used when it escapes a job.
"""


class HardyPsiError(Exception):
    exit_code = 1


class ConfigError(HardyPsiError, ValueError):
    exit_code = 2


class ParameterError(HardyPsiError, ValueError):
    """A numeric argument lies outside its documented range."""

    exit_code = 2


class DomainError(HardyPsiError, ValueError):
    """Evaluation at a pole (e.g. the Cayley transform at -i)."""

    exit_code = 2


class SymbolClassError(HardyPsiError, ValueError):
    """A symbol is not continuous on the compactified line, or violates its declared limit."""

    exit_code = 3


class ResolutionError(HardyPsiError, RuntimeError):
    """Sampling, quadrature or grid resolution is insufficient for the requested accuracy."""

    exit_code = 4


class NotFredholmError(HardyPsiError, ValueError):
    """The spectral parameter lies on (or within tolerance of) the essential spectrum."""

    exit_code = 4

    def __init__(self, message, distance=None, threshold=None):
        super().__init__(message)
        self.distance = distance
        self.threshold = threshold


class ConsistencyError(HardyPsiError, AssertionError):
    """An internal cross-check failed; results must not be trusted."""

    exit_code = 5

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
