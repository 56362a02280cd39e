"""
Checking the solver
===================

The stage problem is concave, so its optimum is unique. Two slow reference
solvers and a KKT residual check confirm the shadow-price solver reaches it.
"""

import numpy as np

from carrieralloc import (Logarithmic, Participant, Sigmoidal, StageInput, grid_solve, kkt_check,
                          projected_gradient_solve, solve_stage)
from carrieralloc.oracle import stage_objective

stage = StageInput(1, 45.0, (
    Participant(1, Sigmoidal(2, 15), offset=3.0),
    Participant(2, Logarithmic(5, 100)),
    Participant(3, Logarithmic(0.5, 100), reservation=10.0),
))

fast = solve_stage(stage, tolerance=1e-9)
grid = grid_solve(stage, steps=400)
pg = projected_gradient_solve(stage)

obj = stage_objective(stage, [fast.increments[q.user_id] for q in stage.participants])
print(f"bisection          {obj:.8f}  {fast.rates}")
print(f"grid (400 steps)   {grid.objective:.8f}  {grid.rates}")
print(f"projected gradient {pg.objective:.8f}  after {pg.meta['iters']} steps")

#####################################################
#
# KKT residuals
# -------------
#
# Users with a positive increment must sit on the price line; the others must
# not want more at that price.

print(kkt_check(stage, fast.rates, fast.shadow_price, zero_threshold=1e-9))
hist = np.array(pg.meta["history"])
print("gradient ascent never went downhill:", bool(np.all(np.diff(hist) >= -1e-9)))
