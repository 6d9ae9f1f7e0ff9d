"""Independent oracles and error metrics.

Nothing in this module is used by the solvers themselves.  The oracles
recompute quantities along a different path than the production code:

* :func:`quadrature_oracle` integrates numerically (composite Gauss-Legendre
  with panel doubling) instead of using closed-form weights;
* :func:`memory_oracle` sums the history integral interval by interval from
  absolute times instead of running the recurrence;
* :func:`dense_solve` hands a tridiagonal system to LAPACK as a full matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError
from .problem import FractionalSetup, TimeGrid, Trajectory
from .weights import hat_weight

__all__ = [
    "quadrature_oracle",
    "memory_oracle",
    "dense_solve",
    "ErrorReport",
    "PdeErrorReport",
    "error_metrics",
    "rate_of_convergence",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def quadrature_oracle(integrand: Callable[[float], float], a: float, b: float,
                      rel_tol: float = 1e-13, max_depth: int = 14) -> float:
    """Integrate ``integrand`` over ``[a, b]`` adaptively.

    The interval is split into ``2**k`` equal panels with a 16-point
    Gauss-Legendre rule on each; ``k`` grows until two successive estimates
    agree to ``rel_tol`` (relative to the estimate, or to the integral of
    ``|integrand|`` when the estimate itself is close to zero).

    Raises
    ------
    ConvergenceError
        If ``2**max_depth`` panels are not enough.
    """
    if rel_tol < 1e-14:
        raise DomainError("rel_tol below 1e-14 is not attainable in binary64")
    if b < a:
        return -quadrature_oracle(integrand, b, a, rel_tol, max_depth)
    if a == b:
        return 0.0

    def estimate(panels):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        fx = np.fromiter((integrand(float(s)) for s in x), dtype=float, count=x.size)
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        return math.fsum(w * fx), math.fsum(w * np.abs(fx))

    previous, _ = estimate(1)
    for depth in range(1, max_depth + 1):
        current, scale = estimate(2 ** depth)
        if abs(current - previous) <= rel_tol * max(abs(current), 1e-3 * scale):
            return current
        previous = current
    raise ConvergenceError(f"no convergence after {2 ** max_depth} panels on [{a}, {b}]")


def memory_oracle(values: Sequence[float], setup: FractionalSetup, grid: TimeGrid,
                  target: int, order: str = "linear",
                  half_value: Optional[float] = None) -> float:
    """Direct evaluation of ``Y_mem(t_target) = int_0^{t_{target-1}} y(s) K ds``.

    ``values`` holds ``y_0 .. y_{target-1}`` (extra entries are ignored).
    ``order="linear"`` interpolates piecewise linearly.  ``order="quadratic"``
    uses nodes ``t_0, t_{1/2}, t_1`` on the first interval (``half_value`` is
    ``y_{1/2}``) and ``t_{j-1}, t_j, t_{j+1}`` on ``[t_j, t_{j+1}]``.
    Every weight is computed from absolute times; no recurrence is involved.
    """
    if order not in ("linear", "quadratic"):
        raise DomainError(f"unknown order {order!r}")
    n = target - 1
    if n < 0:
        raise DomainError("target index must be at least 1")
    if n == 0:
        return 0.0
    y = np.asarray(values, dtype=float)
    if y.size < n + 1:
        raise DimensionError(f"need y_0..y_{n}, got {y.size} values")
    h = grid.h
    t_target = target * h
    terms = []
    if order == "linear":
        for j in range(n):
            ta, tb = j * h, (j + 1) * h
            terms.append(hat_weight(setup, (ta, tb), ta, tb, t_target) * y[j])
            terms.append(hat_weight(setup, (tb, ta), ta, tb, t_target) * y[j + 1])
        return math.fsum(terms)
    if half_value is None:
        raise DomainError("quadratic memory needs the half-node value y_{1/2}")
    t0, th, t1 = 0.0, 0.5 * h, h
    terms.append(hat_weight(setup, (t0, th, t1), t0, t1, t_target) * y[0])
    terms.append(hat_weight(setup, (th, t0, t1), t0, t1, t_target) * half_value)
    terms.append(hat_weight(setup, (t1, t0, th), t0, t1, t_target) * y[1])
    for j in range(1, n):
        tm, tj, tp = (j - 1) * h, j * h, (j + 1) * h
        terms.append(hat_weight(setup, (tm, tj, tp), tj, tp, t_target) * y[j - 1])
        terms.append(hat_weight(setup, (tj, tm, tp), tj, tp, t_target) * y[j])
        terms.append(hat_weight(setup, (tp, tm, tj), tj, tp, t_target) * y[j + 1])
    return math.fsum(terms)


def dense_solve(sub, diag, sup, rhs) -> np.ndarray:
    """Solve a tridiagonal system through a dense LU factorisation."""
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    mat = np.diag(diag)
    if n > 1:
        mat += np.diag(np.asarray(sub, dtype=float)[1:], -1)
        mat += np.diag(np.asarray(sup, dtype=float)[:-1], 1)
    return np.linalg.solve(mat, np.asarray(rhs, dtype=float))


def rate_of_convergence(err_coarse: float, err_fine: float,
                        step_coarse: float, step_fine: float) -> float:
    """Observed order ``log(e_c / e_f) / log(h_c / h_f)`` (``log2`` when halving)."""
    if err_coarse <= 0.0 or err_fine <= 0.0:
        return math.nan
    ratio = step_coarse / step_fine
    if math.isclose(ratio, 1.0, rel_tol=1e-12):
        return math.nan  # step not refined
    if math.isclose(ratio, 2.0, rel_tol=1e-12):
        return math.log2(err_coarse / err_fine)
    return math.log(err_coarse / err_fine) / math.log(ratio)


@dataclass(frozen=True)
class ErrorReport:
    """Maximum and discrete L2 errors of an ODE trajectory."""

    e_max: float
    e_l2: float
    n_steps: int
    h: float
    alpha: float
    scheme_tag: str = ""
    roc_max: Optional[float] = None
    roc_l2: Optional[float] = None


@dataclass(frozen=True)
class PdeErrorReport:
    """``E^x_max`` and ``E^t_max`` of a PDE run (see :meth:`FieldHistory.error_maxima`)."""

    e_x_max: float
    e_t_max: float
    n_steps: int
    m_cells: int
    h: float
    tau: float
    alpha: float
    scheme_tag: str = ""
    roc_x: Optional[float] = None
    roc_t: Optional[float] = None


def _ode_metrics(traj: Trajectory, exact, coarser: Optional[ErrorReport],
                alpha: float) -> ErrorReport:
    grid = traj.grid
    t = grid.nodes
    if callable(exact):
        ref = np.array([exact(float(s)) for s in t])
    else:
        ref = np.asarray(exact, dtype=float)
    if ref.shape != traj.values.shape:
        raise DimensionError(f"exact values {ref.shape} do not match {traj.values.shape}")
    err = np.abs(ref - traj.values)
    e_max = float(err.max())
    e_l2 = math.sqrt(grid.h * math.fsum(err ** 2))
    roc_max = roc_l2 = None
    if coarser is not None:
        roc_max = rate_of_convergence(coarser.e_max, e_max, coarser.h, grid.h)
        roc_l2 = rate_of_convergence(coarser.e_l2, e_l2, coarser.h, grid.h)
    return ErrorReport(e_max, e_l2, grid.n_steps, grid.h, alpha,
                       traj.scheme_tag, roc_max, roc_l2)


def error_metrics(result, exact, coarser=None, alpha: float = math.nan):
    """Error report of a trajectory or field history against ``exact``.

    ``exact`` is a callable (``exact(t)`` for ODEs, ``exact(x, t)`` for PDEs)
    or an array on the same grid.  Passing the report of the next coarser
    run fills in the rate-of-convergence fields.
    """
    from .pde import FieldHistory

    if isinstance(result, Trajectory):
        return _ode_metrics(result, exact, coarser, alpha)
    if isinstance(result, FieldHistory):
        e_x, e_t = result.error_maxima(exact)
        roc_x = roc_t = None
        if coarser is not None:
            roc_x = rate_of_convergence(coarser.e_x_max, e_x, coarser.tau, result.space.tau)
            roc_t = rate_of_convergence(coarser.e_t_max, e_t, coarser.h, result.time.h)
        return PdeErrorReport(e_x, e_t, result.time.n_steps, result.space.m_cells,
                              result.time.h, result.space.tau, alpha, result.scheme_tag,
                              roc_x, roc_t)
    raise DomainError(f"cannot compute errors for {type(result).__name__}")
