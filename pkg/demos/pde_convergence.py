"""
Time-fractional diffusion with the quadratic scheme
====================================================

Example 5 solves D^alpha y + y_xx = f on [0, 1] with exact solution
(1 - t^4) x^2 (x - 1)^2.  Coupling tau = h^(3/2) balances the O(tau^2)
space error against the O(h^3) time error, so E^t_max should fall by about
8x per halving of h.
"""

import math

from cfpc import ErrorTracker, SpaceGrid, TimeGrid, builtin_pde_problem, solve_pde

problem = builtin_pde_problem("ex5", 0.5)

previous = None
for n in (10, 20, 40, 80, 160):
    space = SpaceGrid(0.0, 1.0, round(n ** 1.5))
    # the tracker records the error level by level, no need to keep the field
    tracker = ErrorTracker(problem.exact, space)
    solve_pde(problem, space, TimeGrid(1.0, n), "FPQ", observer=tracker, keep_levels=False)
    roc = "" if previous is None else f"{math.log2(previous / tracker.e_t_max):5.2f}"
    print(f"h=1/{n:<4d} M={space.m_cells:5d}  E^t_max={tracker.e_t_max:.3e}  {roc}")
    previous = tracker.e_t_max

# a single solve keeps every level for inspection
space, grid = SpaceGrid(0.0, 1.0, 40), TimeGrid(1.0, 40)
field = solve_pde(problem, space, grid)
print("field shape:", field.values.shape, " midpoint at t=1:", field.final[20])
