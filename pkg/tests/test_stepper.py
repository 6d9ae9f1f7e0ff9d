import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfpc import (DomainError, EvaluationError, OdeProblem, TimeGrid, WeightTable,
                  builtin_problem, make_setup, memory_oracle, solve_cpl, solve_cpq, solve_fpl,
                  solve_fpq, startup)

SOLVERS = {"CPL": solve_cpl, "CPQ": solve_cpq, "FPL": solve_fpl, "FPQ": solve_fpq}


def e_max(solver, pid, alpha, n):
    p = builtin_problem(pid, alpha)
    g = TimeGrid(1.0, n)
    tr = solver(p, g)
    return float(np.max(np.abs(tr.values - np.array([p.exact(t) for t in g.nodes]))))


def zero_rhs(t, y):
    return 0.0


@pytest.mark.parametrize("tag", sorted(SOLVERS))
@settings(max_examples=15, deadline=None)
@given(alpha=st.floats(0.05, 0.95), y0=st.floats(-10, 10), n=st.integers(3, 60))
def test_constant_solution_is_exact(tag, alpha, y0, n):
    tr = SOLVERS[tag](OdeProblem(make_setup(alpha), y0, zero_rhs), TimeGrid(1.0, n))
    assert np.allclose(tr.values, y0, rtol=1e-13, atol=1e-13)
    assert tr.scheme_tag == tag


def test_startup_constant():
    s = startup(OdeProblem(make_setup(0.5), 1.0, zero_rhs), 0.1)
    assert np.allclose([s.y_quarter, s.y_half, s.y1, s.y2], 1.0, rtol=1e-15, atol=0.0)


def test_startup_third_order_at_t1():
    # frozen from a reference run: |y_1 - exact| = 5.49e-4 h^3 at h = 1/10
    p = builtin_problem("ex1", 0.5)
    errs = [abs(startup(p, h).y1 - p.exact(h)) for h in (0.1, 0.05)]
    assert errs[0] <= 1e-3 * 0.1 ** 3
    assert errs[0] / errs[1] >= 6.0


def test_startup_all_nodes_accurate():
    # frozen from a reference run at h = 1/10: largest C in |err| = C h^3 is 0.38 (at t_2)
    p = builtin_problem("ex2", 0.3)
    nodes = lambda h, s: ((0.25 * h, s.y_quarter), (0.5 * h, s.y_half),  # noqa: E731
                          (h, s.y1), (2 * h, s.y2))
    coarse, fine = startup(p, 0.1), startup(p, 0.05)
    for (t, v), (tf, vf) in zip(nodes(0.1, coarse), nodes(0.05, fine)):
        err, err_f = abs(v - p.exact(t)), abs(vf - p.exact(tf))
        assert err <= 0.5 * 0.1 ** 3
        assert err / err_f >= 6.0


def test_only_derived_startup_is_third_order():
    # y0 != 0 exposes the printed stage-3/4 bracket weight
    p = OdeProblem(make_setup(0.5), 1.0, zero_rhs)
    derived = [startup(p, h).y1 - 1.0 for h in (0.1, 0.05)]
    printed = [startup(p, h, "printed").y1 - 1.0 for h in (0.1, 0.05)]
    assert derived == [0.0, 0.0]
    assert abs(printed[0]) > 1e-3
    assert abs(printed[0] / printed[1]) < 6.0


def test_startup_rejects_bad_input():
    p = builtin_problem("ex1", 0.5)
    with pytest.raises(DomainError):
        startup(p, 0.0)
    with pytest.raises(DomainError):
        startup(p, 0.1, "other")


class CountingRhs:
    def __init__(self, f):
        self.f, self.calls = f, 0

    def __call__(self, t, y):
        self.calls += 1
        return self.f(t, y)


@pytest.mark.parametrize("tag,extra", [("CPL", 0), ("FPL", 0), ("CPQ", 1), ("FPQ", 1)])
def test_one_evaluation_pair_per_step(tag, extra):
    # start-up makes 9 calls; every later step predicts once and corrects once
    base = builtin_problem("ex2", 0.4)
    rhs = CountingRhs(base.rhs)
    n = 25
    SOLVERS[tag](OdeProblem(base.setup, base.y0, rhs), TimeGrid(1.0, n))
    first = 1 if tag.endswith("L") else 2
    assert rhs.calls == 9 + extra + 2 * (n - first)


@pytest.mark.parametrize("alpha", [0.2, 0.8])
def test_cpq_satisfies_scheme_against_direct_history(alpha):
    # recompute each corrector from absolute-time weights
    p = builtin_problem("ex2", alpha)
    g = TimeGrid(1.0, 30)
    tr = solve_cpq(p, g)
    y, yh = tr.values, tr.half_node_values[0.5]
    s, h = p.setup, g.h
    a0, a1, a2 = WeightTable(s, h).quadratic
    c, beta = s.local_coef, s.beta
    fs = [p.rhs(t, v) for t, v in zip(g.nodes, y)]
    for n in range(3, g.n_steps):
        t = (n + 1) * h
        hist = memory_oracle(y, s, g, n + 1, "quadratic", half_value=yh)
        base = p.y0 * math.exp(-beta * t) + beta * (hist + a0 * y[n - 1] + a1 * y[n])
        den = 1.0 - beta * a2
        pred = (base + c * (fs[n - 2] - 3 * fs[n - 1] + 3 * fs[n])) / den
        assert y[n + 1] == pytest.approx((base + c * p.rhs(t, pred)) / den, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.8])
def test_cpl_satisfies_scheme_against_direct_history(alpha):
    p = builtin_problem("ex1", alpha)
    g = TimeGrid(1.0, 30)
    y = solve_cpl(p, g).values
    s, h = p.setup, g.h
    b1, b2 = WeightTable(s, h).linear
    c, beta = s.local_coef, s.beta
    fs = [p.rhs(t, v) for t, v in zip(g.nodes, y)]
    for n in range(1, g.n_steps):
        t = (n + 1) * h
        hist = memory_oracle(y, s, g, n + 1, "linear")
        base = p.y0 * math.exp(-beta * t) + beta * (hist + b1 * y[n])
        den = 1.0 - beta * b2
        pred = (base + c * (2 * fs[n] - fs[n - 1])) / den
        assert y[n + 1] == pytest.approx((base + c * p.rhs(t, pred)) / den, rel=1e-12,
                                         abs=1e-15)


@pytest.mark.parametrize("tag", sorted(SOLVERS))
def test_bitwise_determinism(tag):
    p = builtin_problem("ex2", 0.37)
    g = TimeGrid(1.0, 64)
    a, b = SOLVERS[tag](p, g), SOLVERS[tag](p, g)
    assert np.array_equal(a.values, b.values)


def test_step_count_preconditions():
    p = builtin_problem("ex1", 0.5)
    with pytest.raises(DomainError):
        solve_cpl(p, TimeGrid(1.0, 1))
    with pytest.raises(DomainError):
        solve_fpl(p, TimeGrid(1.0, 1))
    with pytest.raises(DomainError):
        solve_cpq(p, TimeGrid(1.0, 2))
    with pytest.raises(DomainError):
        solve_fpq(p, TimeGrid(1.0, 2))
    solve_cpl(p, TimeGrid(1.0, 2))
    solve_cpq(p, TimeGrid(1.0, 3))


@pytest.mark.parametrize("tag", sorted(SOLVERS))
def test_non_finite_rhs_raises(tag):
    def rhs(t, y):
        return math.nan if t > 0.5 else 0.0

    with pytest.raises(EvaluationError):
        SOLVERS[tag](OdeProblem(make_setup(0.5), 1.0, rhs), TimeGrid(1.0, 20))


def test_blow_up_raises():
    with pytest.raises(EvaluationError):
        solve_cpq(OdeProblem(make_setup(0.5), 1.0, lambda t, y: y ** 4), TimeGrid(10.0, 40))


@given(st.floats(0.01, 0.99), st.floats(1e-5, 1.0))
def test_denominators_bounded_below(alpha, h):
    t = WeightTable(make_setup(alpha), h)
    assert t.linear_denominator > 0.0
    # quadratic bracket stays at or above 47/72 for beta h <= 1
    if make_setup(alpha).beta * h <= 1.0:
        assert t.quadratic_denominator >= 47.0 / 72.0 - 1e-15


# published cells quoted for the standard solvers
@pytest.mark.parametrize("tag,pid,alpha,n,ref,rel", [
    ("CPL", "ex1", 0.5, 40, 3.29e-5, 0.05),
    ("CPL", "ex1", 0.2, 10, 1.96e-3, 0.05),
    ("CPQ", "ex1", 0.5, 40, 4.55e-6, 0.10),
    ("CPQ", "ex1", 0.8, 320, 2.28e-9, 0.10),
])
def test_published_cells(tag, pid, alpha, n, ref, rel):
    assert e_max(SOLVERS[tag], pid, alpha, n) == pytest.approx(ref, rel=rel)


# observed order bands over h = 1/20 .. 1/160
BANDS = {"CPL": (1.8, 2.2), "CPQ": (2.6, 3.4)}


@pytest.mark.parametrize("tag", sorted(BANDS))
@pytest.mark.parametrize("pid", ["ex1", "ex2"])
@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_order_band(tag, pid, alpha):
    errs = [e_max(SOLVERS[tag], pid, alpha, n) for n in (20, 40, 80, 160)]
    rocs = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    lo, hi = BANDS[tag]
    assert all(lo <= r <= hi for r in rocs), rocs
