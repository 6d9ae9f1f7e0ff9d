"""Quadrature weights for the exponential kernel ``exp(-beta (t - s))``.

Every weight used by the schemes is an integral of a Lagrange basis
polynomial against the kernel over one interval.  After the change of
variable ``s = t_a + w x`` these reduce to the moments

    int_0^1 x^m exp(-z (1 - x)) dx = m! * phi_{m+1}(-z),     z = beta * w,

so all closed forms below are short combinations of the phi-functions
``phi_k(x) = sum_j x^j / (j + k)!``.  The phi-functions are evaluated by
their Taylor series for ``|x| < 1`` and by the upward recurrence
``phi_{k+1}(x) = (phi_k(x) - 1/k!) / x`` otherwise, which keeps full
relative accuracy as ``beta * h -> 0``.

Weights for a target ``t_{n+1}`` depend on ``(beta, h)`` and on the lag
``k = n - j`` between the interval and the target only; a lag multiplies
the lag-0 value by ``exp(-beta k h)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .problem import FractionalSetup

__all__ = [
    "phi",
    "WeightRow",
    "linear_weights",
    "quadratic_weights",
    "first_interval_weights",
    "hat_weight",
    "WeightTable",
]

_TAYLOR_RADIUS = 1.0
_TAYLOR_TERMS = 24
_INV_FACTORIAL = [1.0 / math.factorial(i) for i in range(_TAYLOR_TERMS + 12)]


def phi(k: int, x):
    """Return ``phi_k(x)`` for a real or complex scalar ``x``.

    ``phi_0 = exp``, ``phi_1(x) = (e^x - 1)/x`` and so on.  Accurate to a
    few ulps for all ``x``; no cancellation near the origin.
    """
    if k < 0:
        raise DomainError("phi order must be non-negative")
    if abs(x) < _TAYLOR_RADIUS:
        # Horner on sum_j x^j/(j+k)!, highest term first
        acc = 0.0
        for j in range(_TAYLOR_TERMS - 1, -1, -1):
            acc = acc * x + _INV_FACTORIAL[j + k]
        return acc
    value = cmath.exp(x) if isinstance(x, complex) else math.exp(x)
    for i in range(k):
        value = (value - _INV_FACTORIAL[i]) / x
    return value


def _check_step(h: float) -> None:
    if not h > 0.0:
        raise DomainError(f"step size must be positive, got {h!r}")


def _check_lag(lag: int) -> None:
    if lag < 0:
        raise DomainError(f"lag must be non-negative, got {lag!r}")


@dataclass(frozen=True)
class WeightRow:
    """Kernel-weighted quadrature coefficients on one interval.

    ``coefficients`` are ordered like the interpolation nodes, oldest first.
    """

    target_index: float
    interval_index: float
    coefficients: tuple[float, ...]
    kind: str

    def __post_init__(self):
        kinds = ("linear", "quadratic_interior", "quadratic_first_interval",
                 "hat_linear", "hat_quadratic")
        if self.kind not in kinds:
            raise DomainError(f"unknown weight kind {self.kind!r}")

    @property
    def total(self) -> float:
        return math.fsum(self.coefficients)


def linear_weights(setup: FractionalSetup, h: float, lag: int) -> tuple[float, float]:
    """Weights ``(B1, B2)`` of the linear interpolant on ``[t_j, t_{j+1}]``.

    ``B1`` multiplies ``y_j`` and ``B2`` multiplies ``y_{j+1}``; the target is
    ``t_{j+1+lag}``.

    Examples
    --------
    >>> s = FractionalSetup.from_alpha(0.5)
    >>> b1, b2 = linear_weights(s, 0.1, 0)
    >>> abs((1 - s.beta * b2) - phi(1, -0.1)) < 1e-16
    True
    """
    _check_step(h)
    _check_lag(lag)
    z = setup.beta * h
    p1, p2 = phi(1, -z), phi(2, -z)
    decay = math.exp(-z * lag)
    return decay * h * (p1 - p2), decay * h * p2


def quadratic_weights(setup: FractionalSetup, h: float, lag: int) -> tuple[float, float, float]:
    """Weights ``(A0, A1, A2)`` on an interior interval ``[t_j, t_{j+1}]``.

    The interpolant passes through ``t_{j-1}, t_j, t_{j+1}``; the weights
    multiply those three values in order.
    """
    _check_step(h)
    _check_lag(lag)
    z = setup.beta * h
    p1, p2, p3 = phi(1, -z), phi(2, -z), phi(3, -z)
    scale = h * math.exp(-z * lag)
    return (scale * (p3 - 0.5 * p2),
            scale * (p1 - 2.0 * p3),
            scale * (p3 + 0.5 * p2))


def first_interval_weights(setup: FractionalSetup, h: float,
                           target_time: float) -> tuple[float, float, float]:
    """Weights ``(A00, A10, A20)`` on ``[t_0, t_1]`` with the half node.

    The interpolant passes through ``t_0, t_{1/2}, t_1``.  ``target_time``
    must not precede ``t_1 = h``.
    """
    _check_step(h)
    if target_time < h * (1.0 - 1e-14):
        raise DomainError(f"target time {target_time!r} precedes t_1 = {h!r}")
    z = setup.beta * h
    p1, p2, p3 = phi(1, -z), phi(2, -z), phi(3, -z)
    scale = h * math.exp(-setup.beta * max(target_time - h, 0.0))
    return (scale * (4.0 * p3 - 3.0 * p2 + p1),
            scale * (4.0 * p2 - 8.0 * p3),
            scale * (4.0 * p3 - p2))


def hat_weight(setup: FractionalSetup, nodes, t_a: float, t_b: float,
               target: float) -> float:
    """Integral of a Lagrange basis times the kernel over ``[t_a, t_b]``.

    ``nodes[0]`` is the node the basis is attached to (value one there);
    the remaining one or two entries are the other interpolation nodes.
    Two nodes give the linear form, three the quadratic one:

        int_{t_a}^{t_b} prod_{d != c} (s - t_d)/(t_c - t_d)
                        * exp(-beta (target - s)) ds
    """
    nodes = [float(t) for t in nodes]
    if len(nodes) not in (2, 3):
        raise DomainError("hat weights take two or three nodes")
    c, others = nodes[0], nodes[1:]
    if any(c == d for d in others) or (len(others) == 2 and others[0] == others[1]):
        raise DomainError(f"coincident interpolation nodes {nodes}")
    if not (0.0 <= t_a <= t_b <= target * (1.0 + 1e-14)):
        raise DomainError(f"[{t_a}, {t_b}] is not inside [0, {target}]")
    width = t_b - t_a
    if width == 0.0:
        return 0.0
    # basis in the scaled variable x in [0, 1]: prod ((t_a - d) + w x)/(c - d)
    poly = np.array([1.0])
    for d in others:
        factor = np.array([t_a - d, width]) / (c - d)
        poly = np.convolve(poly, factor)
    z = setup.beta * width
    moments = [math.factorial(m) * phi(m + 1, -z) for m in range(len(poly))]
    integral = math.fsum(p * q for p, q in zip(poly, moments))
    return width * math.exp(-setup.beta * (target - t_b)) * integral


class WeightTable:
    """Lag-0 weights for one ``(beta, h)`` plus the per-lag decay.

    The solvers build one table per run; ``decay ** k`` rescales a lag-0
    weight to lag ``k``.
    """

    def __init__(self, setup: FractionalSetup, h: float):
        _check_step(h)
        self.setup = setup
        self.h = h
        self.decay = math.exp(-setup.beta * h)
        self.linear = linear_weights(setup, h, 0)
        self.quadratic = quadratic_weights(setup, h, 0)
        # first interval against t_1 (lag 0); later targets scale by decay
        self.first = first_interval_weights(setup, h, h)

    def decay_powers(self, count: int) -> list[float]:
        """``[exp(-beta h k) for k in range(count)]``."""
        z = self.setup.beta * self.h
        return [math.exp(-z * k) for k in range(count)]

    @property
    def linear_denominator(self) -> float:
        return 1.0 - self.setup.beta * self.linear[1]

    @property
    def quadratic_denominator(self) -> float:
        return 1.0 - self.setup.beta * self.quadratic[2]
