"""Fast predictor-corrector solvers (F-PC-L, F-PC-Q).

The history integral at ``t_{n+1}`` splits into a memory part over
``[t_0, t_n]`` and a local part over ``[t_n, t_{n+1}]``.  Because the kernel
factorises, ``exp(-beta (t_{n+1} - s)) = exp(-beta h) exp(-beta (t_n - s))``,
the memory part obeys

    Y_mem(t_{n+1}) = exp(-beta h) Y_mem(t_n) + int_{t_{n-1}}^{t_n} y K(t_{n+1}, s) ds,

so each step costs ``O(1)`` instead of ``O(n)``.  With the increment
interpolated on the same nodes as the standard schemes use for that
interval, the fast and standard solvers compute the same sums, only
associated differently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, StateError
from .problem import FractionalSetup, OdeProblem, TimeGrid, Trajectory
from .stepper import _check_denominator, _checked_rhs, _finite, startup
from .weights import WeightTable, linear_weights, quadratic_weights

__all__ = ["MemoryState", "memory_update", "solve_fpl", "solve_fpq"]


@dataclass(frozen=True)
class MemoryState:
    """Running memory integral ``Y_mem(t_{step_index})``.

    ``value`` may be a float or an array of per-node values (PDE use).
    """

    value: object
    step_index: int
    decay: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.value)):
            raise StateError("memory value is not finite")
        if self.step_index < 1:
            raise StateError(f"memory targets start at t_1, got index {self.step_index}")

    @classmethod
    def empty(cls, setup: FractionalSetup, h: float) -> "MemoryState":
        """``Y_mem(t_1)``: the integral over ``[t_0, t_0]``, i.e. zero."""
        return cls(0.0, 1, math.exp(-setup.beta * h))


@lru_cache(maxsize=64)
def _increment_weights(beta_alpha: tuple, h: float, order: str) -> tuple:
    setup = FractionalSetup(*beta_alpha)
    if order == "linear":
        return linear_weights(setup, h, 1)
    return quadratic_weights(setup, h, 1)


def memory_update(state: MemoryState, y_recent: Sequence, setup: FractionalSetup,
                  h: float, newest_index: int) -> MemoryState:
    """Advance ``Y_mem`` from target ``t_n`` to ``t_{n+1}``.

    Parameters
    ----------
    state
        Memory at target ``t_n``.
    y_recent
        ``(y_{n-1}, y_n)`` for the linear increment or ``(y_{n-2}, y_{n-1}, y_n)``
        for the quadratic one.  Entries may be arrays.
    newest_index
        ``n``, the index of the last value in ``y_recent``; it must equal
        ``state.step_index``.

    Raises
    ------
    StateError
        If ``newest_index`` does not continue ``state``.
    """
    if newest_index != state.step_index:
        raise StateError(f"memory targets t_{state.step_index} but the increment "
                         f"ends at t_{newest_index}")
    if len(y_recent) == 2:
        w = _increment_weights((setup.alpha, setup.m_alpha), h, "linear")
    elif len(y_recent) == 3:
        if newest_index < 2:
            raise StateError("quadratic increment needs t_{n-2} >= t_0")
        w = _increment_weights((setup.alpha, setup.m_alpha), h, "quadratic")
    else:
        raise DomainError("memory increments take two or three values")
    inc = w[0] * y_recent[0]
    for wk, yk in zip(w[1:], y_recent[1:]):
        inc = inc + wk * yk
    return MemoryState(state.decay * state.value + inc, state.step_index + 1, state.decay)


def solve_fpl(problem: OdeProblem, grid: TimeGrid) -> Trajectory:
    """F-PC-L: the linear scheme with the history carried by :func:`memory_update`."""
    n_steps = grid.n_steps
    if n_steps < 2:
        raise DomainError("F-PC-L needs at least 2 steps")
    setup, h, y0 = problem.setup, grid.h, float(problem.y0)
    beta, c = setup.beta, setup.local_coef
    rhs = _checked_rhs(problem)
    start = startup(problem, h)

    table = WeightTable(setup, h)
    b1, b2 = table.linear
    den = _check_denominator(table.linear_denominator)
    # Y_mem(t_2): [t_0, t_1] at lag 1
    l1, l2 = linear_weights(setup, h, 1)
    mem = l1 * y0 + l2 * start.y1

    y = np.empty(n_steps + 1)
    y[0], y[1] = y0, start.y1
    f_prev, f_cur = start.f0, start.f1
    for n in range(1, n_steps):
        if n >= 2:
            mem = table.decay * mem + l1 * y[n - 1] + l2 * y[n]
        t_next = (n + 1) * h
        base = y0 * math.exp(-beta * t_next) + beta * (mem + b1 * y[n])
        y_pred = (base + c * (2.0 * f_cur - f_prev)) / den
        y[n + 1] = _finite((base + c * rhs(t_next, y_pred)) / den, t_next)
        f_prev, f_cur = f_cur, rhs(t_next, y[n + 1])
    return Trajectory(grid, y, {0.25: start.y_quarter, 0.5: start.y_half}, "FPL")


def solve_fpq(problem: OdeProblem, grid: TimeGrid) -> Trajectory:
    """F-PC-Q: the quadratic scheme with the history carried by :func:`memory_update`."""
    n_steps = grid.n_steps
    if n_steps < 3:
        raise DomainError("F-PC-Q needs at least 3 steps")
    setup, h, y0 = problem.setup, grid.h, float(problem.y0)
    beta, c = setup.beta, setup.local_coef
    rhs = _checked_rhs(problem)
    start = startup(problem, h)
    yh = start.y_half

    table = WeightTable(setup, h)
    a0, a1, a2 = table.quadratic
    q0, qh, q1 = table.first
    den = _check_denominator(table.quadratic_denominator)
    d = table.decay
    k0, k1, k2 = quadratic_weights(setup, h, 1)
    # Y_mem(t_3): first interval at lag 2, then [t_1, t_2] at lag 1
    mem = d * d * (q0 * y0 + qh * yh + q1 * start.y1) + (k0 * y0 + k1 * start.y1
                                                         + k2 * start.y2)

    y = np.empty(n_steps + 1)
    y[0], y[1], y[2] = y0, start.y1, start.y2
    f2, f1, f0 = rhs(2.0 * h, start.y2), start.f1, start.f0  # f_n, f_{n-1}, f_{n-2}
    for n in range(2, n_steps):
        if n >= 3:
            mem = d * mem + k0 * y[n - 2] + k1 * y[n - 1] + k2 * y[n]
        t_next = (n + 1) * h
        base = y0 * math.exp(-beta * t_next) + beta * (mem + a0 * y[n - 1] + a1 * y[n])
        y_pred = (base + c * (f0 - 3.0 * f1 + 3.0 * f2)) / den
        y[n + 1] = _finite((base + c * rhs(t_next, y_pred)) / den, t_next)
        f0, f1, f2 = f1, f2, rhs(t_next, y[n + 1])
    return Trajectory(grid, y, {0.25: start.y_quarter, 0.5: yh}, "FPQ")
