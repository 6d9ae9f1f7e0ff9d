"""
Why the fast schemes are fast
=============================

The kernel exp(-beta (t - s)) factorises across steps, so the history
integral can be carried along with one multiply-add per step instead of being
re-summed.  Here we time both quadratic solvers as N doubles.
"""

import time

from cfpc import MemoryState, TimeGrid, builtin_problem, make_setup, memory_update, solve_cpq, \
    solve_fpq
from cfpc.bench import fit_loglog_slope

problem = builtin_problem("ex1", 0.5)

points = {"C-PC-Q": [], "F-PC-Q": []}
for k in range(2, 9):
    n = 10 * 2 ** k
    grid = TimeGrid(1.0, n)
    for name, solver in [("C-PC-Q", solve_cpq), ("F-PC-Q", solve_fpq)]:
        start = time.perf_counter()
        solver(problem, grid)
        points[name].append((n, time.perf_counter() - start))
    print(f"N={n:5d}  " + "  ".join(f"{k_}: {v[-1][1]:.4f}s" for k_, v in points.items()))

# O(N^2) against O(N): slopes near 2 and 1 once N is large enough
for name, pts in points.items():
    print(f"{name} log-log slope: {fit_loglog_slope(pts):.2f}")

# the running memory value can also be driven by hand
setup, h = make_setup(0.5), 0.1
state = MemoryState.empty(setup, h)
ys = [1.0, 1.0, 1.0, 1.0]
for n in range(1, len(ys)):
    state = memory_update(state, ys[n - 1:n + 1], setup, h, n)
print(f"Y_mem(t_{state.step_index}) for y = 1: {state.value:.6f}")
