"""Fractional setup, time grids, problem descriptions and the benchmarks.

A Caputo-Fabrizio problem ``D^alpha y = f(t, y)``, ``y(0) = y0`` is solved
in its equivalent Volterra form

    y(t) = g(t, y(t)) + beta * int_0^t y(s) exp(-beta (t - s)) ds,
    g(t, y) = (1 - alpha)/M(alpha) * f(t, y) + y0 * exp(-beta t),

with ``beta = alpha / (1 - alpha)``.  Everything here is immutable and can
be shared between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, DomainError, EvaluationError

__all__ = [
    "FractionalSetup",
    "TimeGrid",
    "OdeProblem",
    "Trajectory",
    "make_setup",
    "g_eval",
    "builtin_problem",
    "kernel_transform",
    "HALF_BRANCH_TOL",
]

SCHEME_TAGS = ("CPL", "CPQ", "FPL", "FPQ")

#: |alpha - 0.5| below this selects the beta = 1 branch of Example 1.
HALF_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class FractionalSetup:
    """Order ``alpha``, kernel rate ``beta`` and normalisation ``M(alpha)``."""

    alpha: float
    m_alpha: float = 1.0
    beta: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.m_alpha > 0.0:
            raise DomainError(f"M(alpha) must be positive, got {self.m_alpha!r}")
        object.__setattr__(self, "beta", self.alpha / (1.0 - self.alpha))

    @classmethod
    def from_alpha(cls, alpha: float, m_alpha: float = 1.0) -> "FractionalSetup":
        return cls(alpha, m_alpha)

    @property
    def local_coef(self) -> float:
        """``(1 - alpha) / M(alpha)``, the weight of ``f`` inside ``g``."""
        return (1.0 - self.alpha) / self.m_alpha


def make_setup(alpha: float, m_alpha: float = 1.0) -> FractionalSetup:
    return FractionalSetup(alpha, m_alpha)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j h`` on ``[0, t_end]`` with ``n_steps`` steps."""

    t_end: float
    n_steps: int

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise DomainError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps!r}")

    @classmethod
    def from_step(cls, h: float, t_end: float = 1.0) -> "TimeGrid":
        n = round(t_end / h)
        if n < 1 or not math.isclose(n * h, t_end, rel_tol=1e-9):
            raise DomainError(f"h = {h!r} does not divide t_end = {t_end!r}")
        return cls(t_end, n)

    @property
    def h(self) -> float:
        return self.t_end / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(self.n_steps + 1)

    def time(self, j: float) -> float:
        """Time of (possibly fractional) node index ``j``."""
        return j * self.h


@dataclass(frozen=True)
class OdeProblem:
    """``D^alpha y = rhs(t, y)``, ``y(0) = y0``.

    ``exact`` is optional and never read by the solvers.
    """

    setup: FractionalSetup
    y0: float
    rhs: Callable[[float, float], float]
    exact: Optional[Callable[[float], float]] = None
    name: str = "custom"


@dataclass
class Trajectory:
    """Solution values on a :class:`TimeGrid` plus start-up half nodes."""

    grid: TimeGrid
    values: np.ndarray
    half_node_values: dict = field(default_factory=dict)
    scheme_tag: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise DimensionError(
                f"expected {self.grid.n_steps + 1} values, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise EvaluationError("trajectory contains non-finite values")
        if self.scheme_tag and self.scheme_tag not in SCHEME_TAGS:
            raise DomainError(f"unknown scheme tag {self.scheme_tag!r}")

    @property
    def times(self) -> np.ndarray:
        return self.grid.nodes


def g_eval(problem: OdeProblem, t: float, y: float) -> float:
    """Evaluate ``g(t, y) = (1-alpha)/M f(t, y) + y0 exp(-beta t)``."""
    f = problem.rhs(t, y)
    if not math.isfinite(f):
        raise EvaluationError(f"rhs returned {f!r} at t={t!r}, y={y!r}")
    s = problem.setup
    return s.local_coef * f + problem.y0 * math.exp(-s.beta * t)


def kernel_transform(beta: float, k: int, a: complex, t: float) -> complex:
    """``int_0^t s^k exp(a s) exp(-beta (t - s)) ds`` in closed form.

    Equal to ``k! t^(k+1) exp(a t) phi_{k+1}(-(a + beta) t)``; stable for
    small ``(a + beta) t``.  Used to manufacture Caputo-Fabrizio forcings:
    ``D^alpha u = M/(1-alpha) * int_0^t u'(s) exp(-beta (t - s)) ds``.
    """
    from .weights import phi

    a = complex(a)
    if t == 0.0:
        return 0j
    value = math.factorial(k) * t ** (k + 1) * complex(
        np.exp(a * t)) * phi(k + 1, complex(-(a + beta) * t))
    return value


# ---------------------------------------------------------------------------
# benchmark problems


def _example1(setup: FractionalSetup) -> OdeProblem:
    alpha, beta, m = setup.alpha, setup.beta, setup.m_alpha

    def exact(t):
        return math.expm1(-t) + t

    if abs(alpha - 0.5) < HALF_BRANCH_TOL:
        def rhs(t, y):
            e = math.exp(-t)
            return -2.0 * m * (e - 1.0 + t * e) + y * y - exact(t) ** 2
    else:
        scale = -m / (beta * (beta - 1.0) * (alpha - 1.0))

        def rhs(t, y):
            return (scale * (math.expm1(-beta * t) - beta * math.expm1(-t))
                    + y * y - exact(t) ** 2)

    return OdeProblem(setup, 0.0, rhs, exact, name="ex1")


def _example2(setup: FractionalSetup) -> OdeProblem:
    alpha, beta, m = setup.alpha, setup.beta, setup.m_alpha
    scale = m / ((beta * beta + 1.0) ** 2 * (alpha - 1.0))

    def exact(t):
        return t * math.cos(t)

    def rhs(t, y):
        c, s, e = math.cos(t), math.sin(t), math.exp(-beta * t)
        d = (beta ** 3 * (e - c + t * s) - beta ** 2 * (2.0 * s + t * c)
             - t * c + beta * (c - e + t * s))
        return scale * d + y * y - (t * c) ** 2

    return OdeProblem(setup, 0.0, rhs, exact, name="ex2")


_BUILTINS = {"ex1": _example1, "ex2": _example2}


def builtin_problem(problem_id: str, alpha: float, m_alpha: float = 1.0) -> OdeProblem:
    """Return benchmark ``ex1`` (exact ``e^-t - 1 + t``) or ``ex2`` (``t cos t``).

    Both live on ``[0, 1]`` with ``y0 = 0``.  For ``ex1`` an ``alpha`` within
    :data:`HALF_BRANCH_TOL` of 0.5 uses the ``beta = 1`` form of the forcing,
    whose generic expression divides by ``beta - 1``.
    """
    try:
        build = _BUILTINS[problem_id]
    except KeyError:
        raise DomainError(f"unknown problem id {problem_id!r}; expected one of "
                          f"{sorted(_BUILTINS)}") from None
    return build(make_setup(alpha, m_alpha))
