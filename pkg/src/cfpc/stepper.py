"""Standard predictor-corrector solvers (C-PC-L, C-PC-Q) and the start-up.

Both schemes march the Volterra form ``y = g(t, y) + beta * int y K ds``.
At each target ``t_{n+1}`` the unknown value only enters the last
interval's quadrature, so

    [1 - beta w_new] y_{n+1} = g + beta * (history + local),

where ``w_new`` is the weight of the node ``t_{n+1}`` on ``[t_n, t_{n+1}]``.
The predictor replaces ``f(t_{n+1}, y_{n+1})`` inside ``g`` by a linear
(``2 f_n - f_{n-1}``) or quadratic (``f_{n-2} - 3 f_{n-1} + 3 f_n``)
extrapolation, the corrector evaluates ``f`` once at the predicted value.

The history sums here are recomputed from scratch every step, which costs
``O(n)`` per step and ``O(N^2)`` per solve; :mod:`cfpc.fast` carries the
same sums along with an ``O(1)`` recurrence.
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, EvaluationError
from .problem import FractionalSetup, OdeProblem, TimeGrid, Trajectory
from .weights import WeightTable, hat_weight

__all__ = ["StartupValues", "startup", "solve_cpl", "solve_cpq", "startup_cascade"]

STARTUP_VARIANTS = ("derived", "printed")


class StartupValues(NamedTuple):
    """Values from the start-up cascade plus the ``f`` values it evaluated."""

    y_quarter: object
    y_half: object
    y1: object
    y2: object
    f0: object
    f1: object


def startup_cascade(setup: FractionalSetup, h: float, y0, rhs: Callable,
                    solve_stage: Callable, variant: str = "derived") -> StartupValues:
    """Run the four-stage linear-quadratic start-up on ``t_{1/4}, t_{1/2}, t_1, t_2``.

    Parameters
    ----------
    setup, h
        Fractional order and the main step size.
    y0
        Initial value (a float, or an array of nodal values for PDEs).
    rhs
        ``rhs(t, y)`` evaluated elementwise.
    solve_stage
        ``solve_stage(t, denominator, right_side) -> y`` solves the implicit
        stage equation ``denominator * y (+ spatial terms) = right_side``.
        For ODEs this is a division.
    variant
        ``"derived"`` uses the extrapolation ``3 f_a - 8 f_b + 6 f_c`` and
        puts the weight of the unknown node in the bracket on the left.
        ``"printed"`` reproduces the printed coefficients of stages 3 and 4
        (``6 f_c - 8 f_b - 3 f_a`` and the bracket weight of the oldest node);
        it is kept only to show that it loses accuracy.
    """
    if variant not in STARTUP_VARIANTS:
        raise DomainError(f"unknown start-up variant {variant!r}")
    beta, c = setup.beta, setup.local_coef
    tq, th, t1, t2 = 0.25 * h, 0.5 * h, h, 2.0 * h

    def w(nodes, ta, tb, target):
        return hat_weight(setup, nodes, ta, tb, target)

    def pece(t, denom, base, f_extrap):
        predicted = solve_stage(t, denom, base + c * f_extrap)
        return solve_stage(t, denom, base + c * rhs(t, predicted))

    f0 = rhs(0.0, y0)

    # stage 1: linear on [t_0, t_{1/4}], predictor keeps f at y0
    d = 1.0 - beta * w((tq, 0.0), 0.0, tq, tq)
    base = y0 * math.exp(-beta * tq) + beta * w((0.0, tq), 0.0, tq, tq) * y0
    yq = pece(tq, d, base, rhs(tq, y0))
    fq = rhs(tq, yq)

    # stage 2: quadratic on [t_0, t_{1/2}] through t_0, t_{1/4}, t_{1/2}
    d = 1.0 - beta * w((th, 0.0, tq), 0.0, th, th)
    base = y0 * math.exp(-beta * th) + beta * (w((0.0, tq, th), 0.0, th, th) * y0
                                               + w((tq, 0.0, th), 0.0, th, th) * yq)
    yh = pece(th, d, base, 2.0 * fq - f0)
    fh = rhs(th, yh)

    # stage 3: quadratic on [t_0, t_1] through t_0, t_{1/2}, t_1
    w0 = w((0.0, th, t1), 0.0, t1, t1)
    wnew = w((t1, 0.0, th), 0.0, t1, t1)
    d = 1.0 - beta * (wnew if variant == "derived" else w0)
    base = y0 * math.exp(-beta * t1) + beta * (w0 * y0 + w((th, 0.0, t1), 0.0, t1, t1) * yh)
    if variant == "derived":
        extrap = 3.0 * f0 - 8.0 * fq + 6.0 * fh
    else:
        extrap = 6.0 * fh - 8.0 * fq - 3.0 * f0
    y1 = pece(t1, d, base, extrap)
    f1 = rhs(t1, y1)

    # stage 4: [t_0, t_1] with the half node, then [t_1, t_2] through t_0, t_1, t_2
    v0 = w((0.0, t1, t2), t1, t2, t2)
    vnew = w((t2, 0.0, t1), t1, t2, t2)
    d = 1.0 - beta * (vnew if variant == "derived" else v0)
    base = y0 * math.exp(-beta * t2) + beta * (
        w((0.0, th, t1), 0.0, t1, t2) * y0
        + w((th, 0.0, t1), 0.0, t1, t2) * yh
        + w((t1, 0.0, th), 0.0, t1, t2) * y1
        + v0 * y0
        + w((t1, 0.0, t2), t1, t2, t2) * y1)
    if variant == "derived":
        extrap = 3.0 * f0 - 8.0 * fh + 6.0 * f1
    else:
        extrap = 6.0 * f1 - 8.0 * fh - 3.0 * f0
    y2 = pece(t2, d, base, extrap)
    return StartupValues(yq, yh, y1, y2, f0, f1)


def _checked_rhs(problem: OdeProblem) -> Callable[[float, float], float]:
    f = problem.rhs

    def rhs(t, y):
        try:
            value = f(t, y)
        except (OverflowError, ZeroDivisionError) as exc:
            raise EvaluationError(f"rhs failed at t={t!r}: {exc}") from exc
        if not math.isfinite(value):
            raise EvaluationError(f"rhs returned {value!r} at t={t!r}, y={y!r}")
        return value

    return rhs


def _scalar_stage(t, denom, right):
    if not denom > 0.0:
        raise DomainError(f"non-positive stage denominator {denom!r} at t={t!r}")
    y = right / denom
    if not math.isfinite(y):
        raise EvaluationError(f"non-finite start-up value at t={t!r}")
    return y


def startup(problem: OdeProblem, h: float, variant: str = "derived") -> StartupValues:
    """Start-up values ``y_{1/4}, y_{1/2}, y_1, y_2`` for an ODE problem."""
    if not h > 0.0:
        raise DomainError(f"step size must be positive, got {h!r}")
    return startup_cascade(problem.setup, h, float(problem.y0), _checked_rhs(problem),
                           _scalar_stage, variant)


def _finite(value: float, t: float) -> float:
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite solution value at t={t!r}")
    return value


def _check_denominator(value: float) -> float:
    if not value > 0.0:
        raise DomainError(f"corrector denominator {value!r} is not positive")
    return value


def solve_cpl(problem: OdeProblem, grid: TimeGrid) -> Trajectory:
    """C-PC-L: linear-interpolation predictor-corrector, full history each step."""
    n_steps = grid.n_steps
    if n_steps < 2:
        raise DomainError("C-PC-L needs at least 2 steps")
    setup, h, y0 = problem.setup, grid.h, float(problem.y0)
    beta, c = setup.beta, setup.local_coef
    rhs = _checked_rhs(problem)
    start = startup(problem, h)

    table = WeightTable(setup, h)
    b1, b2 = table.linear
    den = _check_denominator(table.linear_denominator)
    powers = table.decay_powers(n_steps + 1)
    w1 = [b1 * p for p in powers]
    w2 = [b2 * p for p in powers]

    y = [y0, start.y1]
    f = [start.f0, start.f1]
    for n in range(1, n_steps):
        acc = 0.0
        for j in range(n):
            k = n - j
            acc += w1[k] * y[j] + w2[k] * y[j + 1]
        t_next = (n + 1) * h
        base = y0 * math.exp(-beta * t_next) + beta * (acc + b1 * y[n])
        y_pred = (base + c * (2.0 * f[n] - f[n - 1])) / den
        y_next = _finite((base + c * rhs(t_next, y_pred)) / den, t_next)
        y.append(y_next)
        f.append(rhs(t_next, y_next))
    return Trajectory(grid, np.array(y), {0.25: start.y_quarter, 0.5: start.y_half}, "CPL")


def solve_cpq(problem: OdeProblem, grid: TimeGrid) -> Trajectory:
    """C-PC-Q: quadratic-interpolation predictor-corrector, full history each step."""
    n_steps = grid.n_steps
    if n_steps < 3:
        raise DomainError("C-PC-Q needs at least 3 steps")
    setup, h, y0 = problem.setup, grid.h, float(problem.y0)
    beta, c = setup.beta, setup.local_coef
    rhs = _checked_rhs(problem)
    start = startup(problem, h)
    yh = start.y_half

    table = WeightTable(setup, h)
    a0, a1, a2 = table.quadratic
    q0, qh, q1 = table.first
    den = _check_denominator(table.quadratic_denominator)
    powers = table.decay_powers(n_steps + 1)
    w0 = [a0 * p for p in powers]
    w1 = [a1 * p for p in powers]
    w2 = [a2 * p for p in powers]
    first = q0 * y0 + qh * yh + q1 * start.y1

    y = [y0, start.y1, start.y2]
    f = [start.f0, start.f1, rhs(2.0 * h, start.y2)]
    for n in range(2, n_steps):
        acc = powers[n] * first
        for j in range(1, n):
            k = n - j
            acc += w0[k] * y[j - 1] + w1[k] * y[j] + w2[k] * y[j + 1]
        t_next = (n + 1) * h
        base = y0 * math.exp(-beta * t_next) + beta * (acc + a0 * y[n - 1] + a1 * y[n])
        y_pred = (base + c * (f[n - 2] - 3.0 * f[n - 1] + 3.0 * f[n])) / den
        y_next = _finite((base + c * rhs(t_next, y_pred)) / den, t_next)
        y.append(y_next)
        f.append(rhs(t_next, y_next))
    return Trajectory(grid, np.array(y), {0.25: start.y_quarter, 0.5: yh}, "CPQ")
