import math

import numpy as np
import pytest

from cfpc import (DimensionError, DomainError, EvaluationError, FractionalSetup, OdeProblem,
                  TimeGrid, Trajectory, builtin_problem, g_eval, kernel_transform, make_setup,
                  quadrature_oracle)


def cf_derivative(du, setup, t):
    """M/(1-alpha) int_0^t u'(s) exp(-beta (t - s)) ds, by quadrature."""
    return setup.m_alpha / (1.0 - setup.alpha) * quadrature_oracle(
        lambda s: du(s) * math.exp(-setup.beta * (t - s)), 0.0, t)


DERIVATIVES = {
    "ex1": lambda s: 1.0 - math.exp(-s),
    "ex2": lambda s: math.cos(s) - s * math.sin(s),
}


def test_setup_fields():
    s = FractionalSetup(0.2)
    assert s.beta == pytest.approx(0.25)
    assert s.local_coef == pytest.approx(0.8)
    assert make_setup(0.5, 2.0).local_coef == pytest.approx(0.25)
    assert FractionalSetup.from_alpha(0.8).beta == pytest.approx(4.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_setup_rejects_alpha(alpha):
    with pytest.raises(DomainError):
        FractionalSetup(alpha)


def test_setup_rejects_normalisation():
    with pytest.raises(DomainError):
        FractionalSetup(0.5, 0.0)


def test_time_grid():
    g = TimeGrid.from_step(1.0 / 320)
    assert g.n_steps == 320
    assert g.nodes[-1] == pytest.approx(1.0)
    assert g.time(0.5) == pytest.approx(0.5 / 320)
    with pytest.raises(DomainError):
        TimeGrid.from_step(0.3)
    with pytest.raises(DomainError):
        TimeGrid(1.0, 0)
    with pytest.raises(DomainError):
        TimeGrid(0.0, 10)


@pytest.mark.parametrize("pid", ["ex1", "ex2"])
@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8, 0.37])
@pytest.mark.parametrize("t", [0.05, 0.5, 1.0])
def test_forcing_is_cf_derivative_of_exact(pid, alpha, t):
    # at y = exact the nonlinear terms cancel, leaving D^alpha u
    p = builtin_problem(pid, alpha)
    assert p.rhs(t, p.exact(t)) == pytest.approx(
        cf_derivative(DERIVATIVES[pid], p.setup, t), rel=1e-11, abs=1e-13)


def test_forcing_uses_normalisation():
    p1, p2 = builtin_problem("ex2", 0.3), builtin_problem("ex2", 0.3, m_alpha=2.0)
    t = 0.7
    assert p2.rhs(t, p2.exact(t)) == pytest.approx(2.0 * p1.rhs(t, p1.exact(t)), rel=1e-13)


def test_example1_half_branch_is_continuous():
    t = 0.6
    near = builtin_problem("ex1", 0.5 + 1e-6)
    at = builtin_problem("ex1", 0.5)
    assert at.rhs(t, at.exact(t)) == pytest.approx(near.rhs(t, near.exact(t)), rel=1e-5)


def test_nonlinear_term():
    p = builtin_problem("ex1", 0.4)
    t, y = 0.3, 0.2
    assert p.rhs(t, y) - p.rhs(t, p.exact(t)) == pytest.approx(y * y - p.exact(t) ** 2)


def test_unknown_problem():
    with pytest.raises(DomainError):
        builtin_problem("ex3", 0.5)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("a", [0.0, -1.0, 2.5j, -0.5 + 3j])
def test_kernel_transform(k, a):
    beta, t = 1.7, 0.8
    re = quadrature_oracle(lambda s: (s ** k * np.exp(a * s)).real * math.exp(-beta * (t - s)),
                           0.0, t)
    im = quadrature_oracle(lambda s: (s ** k * np.exp(a * s)).imag * math.exp(-beta * (t - s)),
                           0.0, t) if isinstance(a, complex) else 0.0
    got = kernel_transform(beta, k, a, t)
    assert got.real == pytest.approx(re, rel=1e-12, abs=1e-15)
    assert got.imag == pytest.approx(im, rel=1e-12, abs=1e-15)
    assert kernel_transform(beta, k, a, 0.0) == 0


def test_g_eval():
    p = OdeProblem(make_setup(0.5), 2.0, lambda t, y: y)
    assert g_eval(p, 0.0, 3.0) == pytest.approx(0.5 * 3.0 + 2.0)
    bad = OdeProblem(make_setup(0.5), 1.0, lambda t, y: math.nan)
    with pytest.raises(EvaluationError):
        g_eval(bad, 0.0, 1.0)


def test_trajectory_validation():
    g = TimeGrid(1.0, 4)
    Trajectory(g, np.zeros(5), scheme_tag="CPL")
    with pytest.raises(DimensionError):
        Trajectory(g, np.zeros(4))
    with pytest.raises(EvaluationError):
        Trajectory(g, np.array([0, 1, np.inf, 0, 0]))
    with pytest.raises(DomainError):
        Trajectory(g, np.zeros(5), scheme_tag="RK4")
    assert np.allclose(Trajectory(g, np.zeros(5)).times, g.nodes)
