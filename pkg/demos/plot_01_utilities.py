"""
Application utilities
=====================

Real-time applications get a sigmoid-shaped utility, delay-tolerant ones a
logarithmic utility. The allocator never works with ``U`` directly but with
``ln U`` and its slope, so this walk-through prints those.
"""

import numpy as np

from carrieralloc import Logarithmic, Sigmoidal, inverse_marginal, log_utility, marginal_log_utility, utility

#####################################################
#
# Shapes
# ------
#
# The sigmoid stays near zero until its inflection point ``b`` and then
# jumps to 1. The logarithmic utility rises fast and keeps rising.

realtime = Sigmoidal(a=3, b=20)
elastic = Logarithmic(k=3, r_max=100)
rates = np.array([1.0, 10.0, 19.0, 20.0, 21.0, 40.0, 100.0])

print(" rate   U_sig    U_log")
for r, us, ul in zip(rates, utility(realtime, rates), utility(elastic, rates)):
    print(f"{r:5.0f}  {us:.4f}  {ul:.4f}")

#####################################################
#
# Slope of ln U
# -------------
#
# Below the inflection point the sigmoid's marginal is almost exactly ``a``;
# this flat stretch is what gives real-time users priority at low capacity.

for r in (1.0, 10.0, 19.0, 20.0, 25.0):
    print(f"r={r:4.0f}  sigmoid {marginal_log_utility(realtime, r):.6f}"
          f"  log {marginal_log_utility(elastic, r):.6f}")

#####################################################
#
# Inverting the slope
# -------------------
#
# A user's best response to a price ``p`` is the rate where the slope of
# ``ln U`` equals ``p``.

for p in (2.9, 1.5, 0.5, 0.05):
    print(f"p={p:<5}  sigmoid buys {inverse_marginal(realtime, p, 1000):8.4f}"
          f"   log buys {inverse_marginal(elastic, p, 1000):8.4f}")

print("ln U is concave:", np.all(np.diff(marginal_log_utility(elastic, rates)) < 0))
print("log-utility at r_max:", log_utility(elastic, 100.0))
