"""Time-fractional diffusion and advection-diffusion in one space dimension.

The model problem is

    D^alpha y + y_x + y_xx = f(x, t, y)     (advection_diffusion)
    D^alpha y + y_xx = f(x, t, y)           (diffusion)

on ``[a, b]`` with Dirichlet data.  The spatial operator keeps the sign
convention of the benchmark problems (``+ y_xx`` on the left), which is the
opposite of the usual heat equation; the manufactured forcings below are
built for that convention.

Space is discretised by central differences, time by the quadratic
predictor-corrector scheme.  With ``c = (1 - alpha)/M`` and ``d = 1 - beta A2``
every predictor and corrector stage solves the tridiagonal system

    d y_m + c (y_{m+1} - y_{m-1}) / (2 tau) + c (y_{m+1} - 2 y_m + y_{m-1}) / tau^2
        = g_m + beta (Y_mem,m + A0 y_m^{n-1} + A1 y_m^n).

Levels ``t_{1/4}, t_{1/2}, t_1, t_2`` come from the same start-up cascade as
the ODE solvers, with the spatial operator kept implicit in each stage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import AssemblyError, DimensionError, DomainError, EvaluationError, \
    SingularMatrixError, StateError
from .problem import FractionalSetup, TimeGrid, kernel_transform, make_setup
from .stepper import startup_cascade
from .weights import WeightTable, quadratic_weights

__all__ = [
    "SpaceGrid",
    "PdeProblem",
    "TridiagonalSystem",
    "FieldHistory",
    "ErrorTracker",
    "assemble_step",
    "thomas_solve",
    "solve_pde",
    "builtin_pde_problem",
]

PDE_KINDS = ("diffusion", "advection_diffusion")
PDE_SCHEMES = ("CPQ", "FPQ")
CORNER_TOL = 1e-10


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid ``x_m = a + m tau``, ``m = 0..M``."""

    a: float
    b: float
    m_cells: int

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")
        if int(self.m_cells) != self.m_cells or self.m_cells < 3:
            raise DomainError(f"need at least 3 cells, got {self.m_cells!r}")

    @classmethod
    def from_spacing(cls, tau: float, a: float = 0.0, b: float = 1.0) -> "SpaceGrid":
        """Grid with ``M = round((b - a)/tau)`` cells."""
        if not tau > 0.0:
            raise DomainError(f"tau must be positive, got {tau!r}")
        return cls(a, b, max(3, round((b - a) / tau)))

    @property
    def tau(self) -> float:
        return (self.b - self.a) / self.m_cells

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.tau * np.arange(self.m_cells + 1)


@dataclass(frozen=True)
class PdeProblem:
    """Dirichlet problem for the time-fractional (advection-)diffusion model.

    ``rhs(x, t, y)``, ``initial(x)`` and ``exact(x, t)`` must accept arrays
    of nodes; ``left_bc(t)`` and ``right_bc(t)`` return scalars.
    """

    setup: FractionalSetup
    kind: str
    rhs: Callable
    initial: Callable
    left_bc: Callable[[float], float]
    right_bc: Callable[[float], float]
    exact: Optional[Callable] = None
    a: float = 0.0
    b: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        if self.kind not in PDE_KINDS:
            raise DomainError(f"unknown PDE kind {self.kind!r}")
        ends = np.array([self.a, self.b])
        y0 = np.asarray(self.initial(ends), dtype=float)
        bc = np.array([self.left_bc(0.0), self.right_bc(0.0)], dtype=float)
        if np.any(np.abs(y0 - bc) > CORNER_TOL):
            raise DomainError(f"initial data {y0} and boundary data {bc} disagree "
                              "at the corners")


@dataclass
class TridiagonalSystem:
    """Rows ``sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]``.

    ``sub[0]`` and ``sup[-1]`` are ignored.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if not (len(self.sub) == len(self.sup) == len(self.rhs) == n) or n == 0:
            raise DimensionError("tridiagonal arrays must share one positive length")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        return y


@njit(cache=True)
def _thomas(sub, diag, sup, rhs, out):
    # returns the row of a zero pivot, or -1
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    piv = diag[0]
    if piv == 0.0:
        return 0
    cp[0] = sup[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * cp[i - 1]
        if piv == 0.0:
            return i
        cp[i] = sup[i] / piv
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / piv
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return -1


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    No pivoting; the systems assembled here are diagonally dominant or close
    to it.

    Raises
    ------
    SingularMatrixError
        If a pivot is exactly zero.
    """
    args = [np.ascontiguousarray(v, dtype=float)
            for v in (system.sub, system.diag, system.sup, system.rhs)]
    out = np.empty_like(args[1])
    bad = _thomas(*args, out)
    if bad >= 0:
        raise SingularMatrixError(f"zero pivot in row {bad}")
    return out


@dataclass
class FieldHistory:
    """Computed field, the start-up half levels and the per-node memory.

    ``values[n, m]`` approximates ``y(x_m, t_n)``.  When the solver ran with
    ``keep_levels=False`` only the final level is kept in ``final``.
    """

    space: SpaceGrid
    time: TimeGrid
    scheme_tag: str
    final: np.ndarray
    values: Optional[np.ndarray] = None
    half_levels: dict = field(default_factory=dict)
    memory: Optional[np.ndarray] = None
    f_cache: Optional[np.ndarray] = None

    def error_maxima(self, exact) -> tuple[float, float]:
        """``(E^x_max, E^t_max)`` against ``exact(x, t)``.

        ``E^x_max`` is the spatial maximum at the worst level and ``E^t_max``
        the temporal maximum at the worst interior node; both equal the
        largest nodal error.  They differ only in which grid is refined when
        a rate is computed.  :meth:`final_level_error` gives the error at
        ``t_N`` alone.
        """
        err = self._errors(exact)
        return float(err.max()), float(err[:, 1:-1].max())

    def final_level_error(self, exact) -> float:
        """Spatial maximum error at ``t_N``."""
        return float(np.abs(exact(self.space.nodes, self.time.t_end) - self.final).max())

    def _errors(self, exact) -> np.ndarray:
        if self.values is None:
            raise StateError("levels were not kept; use an ErrorTracker observer")
        x, t = self.space.nodes, self.time.nodes
        ref = np.asarray(exact(x[None, :], t[:, None]), dtype=float)
        if ref.shape != self.values.shape:
            raise DimensionError(f"exact field {ref.shape} does not match {self.values.shape}")
        return np.abs(ref - self.values)


class ErrorTracker:
    """Observer that accumulates ``E^x_max`` and ``E^t_max`` level by level.

    Lets :func:`solve_pde` run with ``keep_levels=False`` on large grids.
    """

    def __init__(self, exact: Callable, space: SpaceGrid):
        self.exact = exact
        self.x = space.nodes
        self.e_x_max = 0.0
        self.e_t_max = 0.0
        self.final = math.nan

    def __call__(self, n: int, t: float, level: np.ndarray) -> None:
        err = np.abs(self.exact(self.x, t) - level)
        self.e_x_max = max(self.e_x_max, float(err.max()))
        self.e_t_max = max(self.e_t_max, float(err[1:-1].max()))
        self.final = float(err.max())


def _operator_coefficients(problem: PdeProblem, space: SpaceGrid) -> tuple[float, float, float]:
    """Spatial contributions ``(sub, diag, sup)`` of ``c (y_x + y_xx)``."""
    c, tau = problem.setup.local_coef, space.tau
    lap = c / tau ** 2
    adv = c / (2.0 * tau) if problem.kind == "advection_diffusion" else 0.0
    return lap - adv, -2.0 * lap, lap + adv


def _stage_system(problem: PdeProblem, space: SpaceGrid, t: float, denom: float,
                  right: np.ndarray) -> TridiagonalSystem:
    lo, mid, hi = _operator_coefficients(problem, space)
    n = space.m_cells - 1
    diag_value = denom + mid
    if diag_value == 0.0:
        raise AssemblyError(f"zero diagonal entry at t={t!r}")
    rhs = np.array(right[1:-1], dtype=float)
    rhs[0] -= lo * problem.left_bc(t)
    rhs[-1] -= hi * problem.right_bc(t)
    return TridiagonalSystem(np.full(n, lo), np.full(n, diag_value), np.full(n, hi), rhs)


def _solve_stage(problem: PdeProblem, space: SpaceGrid, t: float, denom: float,
                 right: np.ndarray) -> np.ndarray:
    inner = thomas_solve(_stage_system(problem, space, t, denom, right))
    if not np.all(np.isfinite(inner)):
        raise EvaluationError(f"non-finite field at t={t!r}")
    level = np.empty(space.m_cells + 1)
    level[0], level[-1] = problem.left_bc(t), problem.right_bc(t)
    level[1:-1] = inner
    return level


def assemble_step(problem: PdeProblem, space: SpaceGrid, time: TimeGrid, stage: str,
                  n_next: int, history: FieldHistory,
                  predicted: Optional[np.ndarray] = None) -> TridiagonalSystem:
    """Tridiagonal system of the predictor or corrector stage for ``t_{n_next}``.

    ``history.values`` must hold levels ``0..n_next-1``, ``history.f_cache``
    the ``f`` values of levels ``n_next-3 .. n_next-1`` and
    ``history.memory`` the memory part targeting ``t_{n_next}``.  The
    corrector additionally needs the ``predicted`` level.
    """
    if stage not in ("predictor", "corrector"):
        raise DomainError(f"unknown stage {stage!r}")
    n = n_next - 1
    if n < 2:
        raise StateError("main steps start at t_3; levels 1-2 come from the start-up")
    if history.values is None or history.memory is None or history.f_cache is None:
        raise StateError("history lacks levels, memory or cached f values")
    setup, h = problem.setup, time.h
    a0, a1, a2 = quadratic_weights(setup, h, 0)
    t_next = n_next * h
    if stage == "predictor":
        fm2, fm1, fn = history.f_cache
        f_part = fm2 - 3.0 * fm1 + 3.0 * fn
    else:
        if predicted is None:
            raise StateError("the corrector needs the predicted level")
        f_part = problem.rhs(space.nodes, t_next, predicted)
    right = (history.values[0] * math.exp(-setup.beta * t_next) + setup.local_coef * f_part
             + setup.beta * (history.memory + a0 * history.values[n - 1]
                             + a1 * history.values[n]))
    return _stage_system(problem, space, t_next, 1.0 - setup.beta * a2, right)


def _checked_field_rhs(problem: PdeProblem, x: np.ndarray) -> Callable:
    def rhs(t, y):
        try:
            value = np.asarray(problem.rhs(x, t, y), dtype=float)
        except (OverflowError, ZeroDivisionError) as exc:
            raise EvaluationError(f"rhs failed at t={t!r}: {exc}") from exc
        if not np.all(np.isfinite(value)):
            raise EvaluationError(f"rhs is not finite at t={t!r}")
        return value

    return rhs


def solve_pde(problem: PdeProblem, space: SpaceGrid, time: TimeGrid, scheme: str = "FPQ",
              seed_exact_startup: bool = False,
              observer: Optional[Callable[[int, float, np.ndarray], None]] = None,
              keep_levels: bool = True) -> FieldHistory:
    """March the quadratic predictor-corrector scheme on ``space x time``.

    Parameters
    ----------
    scheme
        ``"FPQ"`` keeps the memory with the recurrence; ``"CPQ"`` re-sums
        the whole history at every step.
    seed_exact_startup
        Take ``t_{1/2}, t_1, t_2`` from ``problem.exact`` instead of the
        start-up cascade.  Meant for isolating the main scheme only.
    observer
        Called as ``observer(n, t_n, level)`` for every accepted level.
    keep_levels
        Store all levels.  ``"CPQ"`` needs them and ignores ``False``.
    """
    scheme = scheme.upper()
    if scheme not in PDE_SCHEMES:
        raise DomainError(f"unknown PDE scheme {scheme!r}; expected one of {PDE_SCHEMES}")
    n_steps = time.n_steps
    if n_steps < 3:
        raise DomainError("the quadratic scheme needs at least 3 steps")
    setup, h, x = problem.setup, time.h, space.nodes
    beta, c = setup.beta, setup.local_coef
    rhs = _checked_field_rhs(problem, x)

    y0 = np.asarray(problem.initial(x), dtype=float).copy()
    y0[0], y0[-1] = problem.left_bc(0.0), problem.right_bc(0.0)

    if seed_exact_startup:
        if problem.exact is None:
            raise DomainError("exact start-up seeding needs problem.exact")
        yq, yh, y1, y2 = (np.asarray(problem.exact(x, s * h), dtype=float)
                          for s in (0.25, 0.5, 1.0, 2.0))
        f0, f1 = rhs(0.0, y0), rhs(h, y1)
    else:
        def stage(t, denom, right):
            return _solve_stage(problem, space, t, denom, right)

        yq, yh, y1, y2, f0, f1 = startup_cascade(setup, h, y0, rhs, stage)

    keep = keep_levels or scheme == "CPQ"
    levels = np.empty((n_steps + 1, space.m_cells + 1)) if keep else None
    window = [y0, y1, y2]  # last three levels
    if keep:
        levels[0], levels[1], levels[2] = y0, y1, y2
    if observer is not None:
        for n, lev in enumerate(window):
            observer(n, n * h, lev)

    table = WeightTable(setup, h)
    q0, qh, q1 = table.first
    k0, k1, k2 = quadratic_weights(setup, h, 1)
    a0, a1, a2 = table.quadratic
    d = table.decay
    first = q0 * y0 + qh * yh + q1 * y1
    f2 = rhs(2.0 * h, y2)
    f_cache = np.stack([f0, f1, f2])
    mem = d * d * first + (k0 * y0 + k1 * y1 + k2 * y2)
    powers = table.decay_powers(n_steps + 1)
    state = FieldHistory(space, time, scheme, y2, levels, {0.25: yq, 0.5: yh}, mem, f_cache)

    for n in range(2, n_steps):
        if n >= 3:
            if scheme == "FPQ":
                mem = d * mem + k0 * window[0] + k1 * window[1] + k2 * window[2]
            else:
                mem = powers[n] * first
                for j in range(1, n):
                    p = powers[n - j]
                    mem = mem + p * (a0 * levels[j - 1] + a1 * levels[j] + a2 * levels[j + 1])
        t_next = (n + 1) * h
        base = y0 * math.exp(-beta * t_next) + beta * (mem + a0 * window[1] + a1 * window[2])
        den = 1.0 - beta * a2
        extrap = f_cache[0] - 3.0 * f_cache[1] + 3.0 * f_cache[2]
        pred = _solve_stage(problem, space, t_next, den, base + c * extrap)
        new = _solve_stage(problem, space, t_next, den, base + c * rhs(t_next, pred))
        window = [window[1], window[2], new]
        f_cache = np.stack([f_cache[1], f_cache[2], rhs(t_next, new)])
        if keep:
            levels[n + 1] = new
        if observer is not None:
            observer(n + 1, t_next, new)

    state.final = window[2]
    state.memory = mem
    state.f_cache = f_cache
    if not keep_levels:
        state.values = None
    return state


# ---------------------------------------------------------------------------
# benchmark problems


def _cf_derivative_ex4(setup: FractionalSetup, t: float) -> float:
    # u' = 1 - e^-t + sin(pi t) + pi t cos(pi t)
    b = setup.beta
    if t == 0.0:
        return 0.0
    s = (kernel_transform(b, 0, 0.0, t) - kernel_transform(b, 0, -1.0, t)).real
    s += kernel_transform(b, 0, 1j * math.pi, t).imag
    s += math.pi * kernel_transform(b, 1, 1j * math.pi, t).real
    return setup.m_alpha / (1.0 - setup.alpha) * s


def _example4(setup: FractionalSetup) -> PdeProblem:
    pi = math.pi

    def u(t):
        return math.expm1(-t) + t + t * math.sin(pi * t)

    def exact(x, t):
        return np.cos(3 * pi * x) * (np.expm1(-t) + t + t * np.sin(pi * t))

    def rhs(x, t, y):
        ut, cx = u(t), np.cos(3 * pi * x)
        ex = cx * ut
        return (cx * _cf_derivative_ex4(setup, t)
                - (3 * pi * np.sin(3 * pi * x) + 9 * pi ** 2 * cx) * ut + y * y - ex * ex)

    return PdeProblem(setup, "advection_diffusion", rhs, lambda x: np.zeros_like(x),
                      u, lambda t: -u(t), exact, name="ex4")


def _example5(setup: FractionalSetup) -> PdeProblem:
    from .weights import phi

    def shape(x):
        return x * x * (x - 1.0) ** 2

    def exact(x, t):
        return (1.0 - t ** 4) * shape(x)

    def rhs(x, t, y):
        du = -24.0 * setup.m_alpha * t ** 4 * phi(4, -setup.beta * t) / (1.0 - setup.alpha)
        ex = (1.0 - t ** 4) * shape(x)
        lap = 2 * x * x + 2 * (x - 1.0) ** 2 + 4 * x * (2 * x - 2.0)
        return du * shape(x) + (1.0 - t ** 4) * lap + y * y - ex * ex

    return PdeProblem(setup, "diffusion", rhs, shape, lambda t: 0.0, lambda t: 0.0,
                      exact, name="ex5")


_PDE_BUILTINS = {"ex4": _example4, "ex5": _example5}


def builtin_pde_problem(problem_id: str, alpha: float, m_alpha: float = 1.0) -> PdeProblem:
    """``ex4`` (advection-diffusion, exact ``cos(3 pi x) u(t)``) or ``ex5``
    (diffusion, exact ``(1 - t^4) x^2 (x - 1)^2``), both on ``[0, 1]``."""
    try:
        build = _PDE_BUILTINS[problem_id]
    except KeyError:
        raise DomainError(f"unknown PDE problem id {problem_id!r}; expected one of "
                          f"{sorted(_PDE_BUILTINS)}") from None
    return build(make_setup(alpha, m_alpha))
