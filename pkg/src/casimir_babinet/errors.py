"""Exception hierarchy; the CLI maps these onto exit codes."""


class CasimirError(Exception):
    exit_code = 1


class DomainError(CasimirError, ValueError):
    """An argument lies outside the operation's domain."""


class BasisMismatchError(CasimirError, ValueError):
    """Blocks defined on different order bases were combined."""


class ConfigError(CasimirError):
    exit_code = 1


class ConvergenceError(CasimirError, RuntimeError):
    """A linear solve, lattice sum or quadrature missed its tolerance."""

    exit_code = 2


class DegenerateFrequencyError(ConvergenceError):
    """kappa = k_x = k_y = 0: the zeroth order has no decay."""


class InvariantViolation(CasimirError, RuntimeError):
    """A physical bound was broken, e.g. a round-trip eigenvalue >= 1."""

    exit_code = 3

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
