import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfpc import (DomainError, MemoryState, StateError, TimeGrid, builtin_problem,
                  first_interval_weights, make_setup, memory_oracle, memory_update, solve_cpl,
                  solve_cpq, solve_fpl, solve_fpq)


def run_linear(values, setup, h):
    state = MemoryState.empty(setup, h)
    out = [state.value]
    for n in range(1, len(values)):
        state = memory_update(state, (values[n - 1], values[n]), setup, h, n)
        out.append(state.value)
    return out  # out[k] targets t_{k+1}


def run_quadratic(values, half, setup, h):
    # Y_mem(t_2) is the first interval at lag 1
    q = first_interval_weights(setup, h, 2 * h)
    state = MemoryState(q[0] * values[0] + q[1] * half + q[2] * values[1], 2,
                        math.exp(-setup.beta * h))
    out = [state.value]
    for n in range(2, len(values)):
        state = memory_update(state, values[n - 2:n + 1], setup, h, n)
        out.append(state.value)
    return out  # out[k] targets t_{k+2}


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("seed", [0, 1])
def test_linear_recurrence_matches_direct_sum(alpha, seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1.0, 1.0, 201)
    s, g = make_setup(alpha), TimeGrid(1.0, 200)
    mem = run_linear(y, s, g.h)
    for target in (2, 3, 17, 100, 201):
        ref = memory_oracle(y, s, g, target, "linear")
        assert mem[target - 1] == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("seed", [0, 1])
def test_quadratic_recurrence_matches_direct_sum(alpha, seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1.0, 1.0, 201)
    half = rng.uniform(-1.0, 1.0)
    s, g = make_setup(alpha), TimeGrid(1.0, 200)
    mem = run_quadratic(y, half, s, g.h)
    for target in (2, 3, 4, 50, 201):
        ref = memory_oracle(y, s, g, target, "quadratic", half_value=half)
        assert mem[target - 2] == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.9])
def test_constant_history_closed_form(alpha):
    s, g, c = make_setup(alpha), TimeGrid(1.0, 50), 1.7
    y = np.full(51, c)
    lin = run_linear(y, s, g.h)
    quad = run_quadratic(y, c, s, g.h)
    for target in (2, 10, 51):
        t_n = (target - 1) * g.h
        ref = c * -math.expm1(-s.beta * t_n) * math.exp(-s.beta * g.h) / s.beta
        assert lin[target - 1] == pytest.approx(ref, rel=1e-13)
        assert quad[target - 2] == pytest.approx(ref, rel=1e-13)


def test_empty_state():
    s = make_setup(0.5)
    st0 = MemoryState.empty(s, 0.1)
    assert st0.value == 0.0 and st0.step_index == 1
    assert st0.decay == pytest.approx(math.exp(-0.1))


def test_state_errors():
    s = make_setup(0.5)
    st0 = MemoryState.empty(s, 0.1)
    with pytest.raises(StateError):
        memory_update(st0, (1.0, 1.0), s, 0.1, 2)
    with pytest.raises(StateError):
        memory_update(st0, (1.0, 1.0, 1.0), s, 0.1, 1)
    with pytest.raises(DomainError):
        memory_update(st0, (1.0,), s, 0.1, 1)
    with pytest.raises(StateError):
        MemoryState(math.nan, 1, 0.9)
    with pytest.raises(StateError):
        MemoryState(0.0, 0, 0.9)


def test_state_is_immutable_value():
    s = make_setup(0.5)
    st0 = MemoryState.empty(s, 0.1)
    st1 = memory_update(st0, (1.0, 2.0), s, 0.1, 1)
    assert st0.step_index == 1 and st1.step_index == 2
    with pytest.raises(AttributeError):
        st1.value = 3.0


def test_array_valued_memory():
    s, h = make_setup(0.4), 0.05
    ys = [np.array([1.0, 2.0]), np.array([3.0, -1.0])]
    vec = memory_update(MemoryState.empty(s, h), ys, s, h, 1).value
    for i in range(2):
        scalar = memory_update(MemoryState.empty(s, h), (ys[0][i], ys[1][i]), s, h, 1).value
        assert vec[i] == pytest.approx(scalar, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=30, max_size=30), st.floats(-100, 100),
       st.floats(0.05, 0.95))
def test_recurrence_is_linear(ys, lam, alpha):
    s, h = make_setup(alpha), 1.0 / 29
    base = run_linear(ys, s, h)[-1]
    scaled = run_linear([lam * v for v in ys], s, h)[-1]
    assert scaled == pytest.approx(lam * base, rel=1e-12, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=40, max_size=40), st.floats(0.05, 0.95))
def test_kernel_integral_bound(ys, alpha):
    s, h = make_setup(alpha), 1.0 / 39
    mem = run_linear(ys, s, h)
    for k, value in enumerate(mem):
        t_n = k * h
        bound = max(abs(v) for v in ys[:k + 1]) * -math.expm1(-s.beta * t_n) / s.beta
        assert abs(value) <= bound * (1 + 1e-12) + 1e-15


PAIRS = [(solve_cpl, solve_fpl), (solve_cpq, solve_fpq)]


@pytest.mark.parametrize("pair", PAIRS, ids=["linear", "quadratic"])
@pytest.mark.parametrize("pid", ["ex1", "ex2"])
@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_fast_equals_standard(pair, pid, alpha):
    p = builtin_problem(pid, alpha)
    g = TimeGrid(1.0, 80)
    std, fast = (solve(p, g).values for solve in pair)
    assert np.allclose(fast, std, rtol=1e-10, atol=1e-300)


def test_fast_tags_and_half_nodes():
    p = builtin_problem("ex1", 0.5)
    g = TimeGrid(1.0, 20)
    a, b = solve_cpq(p, g), solve_fpq(p, g)
    assert b.scheme_tag == "FPQ" and solve_fpl(p, g).scheme_tag == "FPL"
    assert a.half_node_values == b.half_node_values


def e_max(solver, pid, alpha, n):
    p = builtin_problem(pid, alpha)
    g = TimeGrid(1.0, n)
    tr = solver(p, g)
    return float(np.max(np.abs(tr.values - np.array([p.exact(t) for t in g.nodes]))))


@pytest.mark.parametrize("solver,pid,alpha,n,ref,rel", [
    (solve_fpq, "ex2", 0.8, 320, 1.25e-7, 0.10),
    (solve_fpq, "ex1", 0.2, 80, 9.15e-7, 0.10),
    (solve_fpl, "ex1", 0.5, 40, 3.29e-5, 0.05),
    (solve_fpl, "ex2", 0.5, 320, 1.77e-5, 0.05),
])
def test_published_fast_cells(solver, pid, alpha, n, ref, rel):
    assert e_max(solver, pid, alpha, n) == pytest.approx(ref, rel=rel)


def test_fpq_rate_at_fine_steps():
    # published roc 3.02 for ex2, alpha = 0.8, h = 1/320
    r = math.log2(e_max(solve_fpq, "ex2", 0.8, 160) / e_max(solve_fpq, "ex2", 0.8, 320))
    assert r == pytest.approx(3.02, abs=0.15)
