"""Exception types raised by the solvers and their helpers."""


class CFError(Exception):
    """Base class for all package errors."""


class DomainError(CFError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class EvaluationError(CFError, ArithmeticError):
    """A right-hand side or intermediate state became non-finite."""


class StateError(CFError, RuntimeError):
    """A stateful update was applied out of sequence."""


class AssemblyError(CFError, RuntimeError):
    """A linear system could not be assembled (e.g. a zero diagonal entry)."""


class SingularMatrixError(CFError, ArithmeticError):
    """A zero pivot was met during tridiagonal elimination."""


class ConvergenceError(CFError, RuntimeError):
    """An adaptive procedure hit its refinement cap before converging."""


class DimensionError(CFError, ValueError):
    """Array shapes or grids do not match."""


class UsageError(CFError, ValueError):
    """Invalid command-line flag combination."""
