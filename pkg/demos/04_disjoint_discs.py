"""
Three discs with no common point
================================

When the discs do not meet, the agents agree on the point minimizing the
summed squared distances to all discs. For these discs it is (0, -1),
at distance 1 from each of them. A constant stepsize leaves a residual
that shrinks with the stepsize.
"""

import numpy as np

from sdop import objective, solve_centralized
from sdop import runner
from sdop.scenario import build_config, load_scenario

family = build_config(load_scenario("empty_sec8.cfg")).family

sol = solve_centralized(family)
print("optimum", sol.x_star.round(12), " f* =", round(sol.f_star, 12), " unique:", sol.unique)
print("f at the origin:", round(objective(family, (0, 0)), 6))

# distributed run with a decaying stepsize (shortened from the bundled horizon)
report = runner.run("empty_sec8.cfg", ["integrator.t_end=300"], write=False)
print("\nt = 300: mean of agents", report.x_bar.round(4), " distance to optimum", f"{report.residual:.4f}")
print("agents:\n", report.trajectory.final.round(4))

# constant stepsizes with exact projections: the residual persists and
# shrinks with the stepsize
rows = runner.sweep("empty_sec8.cfg", "stepsize.value", [0.5, 0.2, 0.05],
                    ["integrator.t_end=300", "angle.kind=constant", "angle.value=0"])
print("\nconstant stepsize   residual")
for r in rows[::-1]:
    print(f"{r.value:17.2f}   {r.residual:.4f}")
