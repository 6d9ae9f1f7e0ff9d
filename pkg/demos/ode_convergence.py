"""
Convergence of the four predictor-corrector schemes
====================================================

Example 1 has the exact solution y(t) = exp(-t) - 1 + t.  We halve h from
1/10 to 1/320 and watch the maximum error drop by about 4x per halving for
the linear schemes and about 8x for the quadratic ones.
"""

import math

import numpy as np

from cfpc import TimeGrid, builtin_problem, solve_cpl, solve_cpq, solve_fpl, solve_fpq

alpha = 0.5
problem = builtin_problem("ex1", alpha)

# each solver returns a Trajectory holding y_0 .. y_N
for name, solver in [("C-PC-L", solve_cpl), ("F-PC-L", solve_fpl),
                     ("C-PC-Q", solve_cpq), ("F-PC-Q", solve_fpq)]:
    print(f"{name}  alpha={alpha}")
    previous = None
    for n in (10, 20, 40, 80, 160, 320):
        grid = TimeGrid(1.0, n)
        traj = solver(problem, grid)
        exact = np.array([problem.exact(t) for t in grid.nodes])
        e_max = np.abs(traj.values - exact).max()
        roc = "" if previous is None else f"{math.log2(previous / e_max):5.2f}"
        print(f"  h=1/{n:<4d} E_max={e_max:.3e}  {roc}")
        previous = e_max

# the fast schemes give the same numbers as the standard ones
grid = TimeGrid(1.0, 320)
gap = np.abs(solve_cpq(problem, grid).values - solve_fpq(problem, grid).values).max()
print(f"max |C-PC-Q - F-PC-Q| at h=1/320: {gap:.1e}")
