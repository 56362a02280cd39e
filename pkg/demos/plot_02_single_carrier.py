"""
One carrier, one price
======================

Four users share a 60-unit carrier. Two of them are VIP users whose minimum
rates are reserved first; the rest is split so that every user's slope of
``ln U`` meets a single shadow price.
"""

from carrieralloc import Logarithmic, Participant, Sigmoidal, StageInput, solve_stage
from carrieralloc.carrier_solver import aggregate_demand

stage = StageInput(1, 60.0, (
    Participant(1, Sigmoidal(3, 20)),
    Participant(2, Sigmoidal(1, 30), reservation=30.0),
    Participant(3, Logarithmic(3, 100)),
    Participant(4, Logarithmic(0.5, 100), reservation=15.0),
))

result = solve_stage(stage, tolerance=1e-3)
print(f"shadow price {result.shadow_price:.6g} after {result.iterations} bisection steps")
for uid, rate in result.rates.items():
    print(f"  user {uid}: {rate:8.4f}  (increment {result.increments[uid]:.4f})")
print(f"total {result.total:.4f} of {stage.capacity}")

#####################################################
#
# Demand against price
# --------------------
#
# Aggregate demand falls as the price rises; bisection finds where it meets
# the 15 units left after reservations.

budget = stage.capacity - stage.reserved
for p in (0.01, 0.1, 1.0, 2.9, 3.0, 3.1):
    print(f"p={p:<5} demand {aggregate_demand(stage.participants, p, budget):8.3f}")

#####################################################
#
# More capacity, lower price
# --------------------------

for R in (60, 80, 100, 150):
    r = solve_stage(StageInput(1, float(R), stage.participants))
    print(f"R={R:4d}  price {r.shadow_price:.5g}")
