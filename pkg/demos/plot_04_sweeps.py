"""
Capacity sweeps
===============

Re-running the allocation over a range of capacities shows how prices and
regimes move. Rows are written as CSV for any plotting tool; the same sweep
is available as ``carrieralloc sweep``.
"""

import csv
import tempfile
from pathlib import Path

from carrieralloc import load_bundled, run_sweep, write_csv

sc = load_bundled("paper_scenario").with_capacity(1, 60.0)
rows = run_sweep(sc, 2, [10, 20, 30, 40, 45, 50, 60, 80, 100, 150], verify=True)

for row in rows:
    worst = max(k.stationarity for k in row.kkt.values())
    print(f"R2={row.value:5g}  {row.cases[2]}  p2={row.prices[2]:.5g}"
          f"  users 5,7: {row.final_rates[5]:.3f}, {row.final_rates[7]:.3f}  kkt {worst:.1e}")

#####################################################
#
# The price jumps up between 45 and 50: below that the carrier is contested
# by VIP users only, above it the reservations leave a thin remainder for
# everyone.

out = Path(tempfile.mkdtemp()) / "r2_sweep.csv"
write_csv(rows, out)
with open(out, newline="") as fh:
    header = next(csv.reader(fh))
print(f"\nwrote {out} with {len(header)} columns, starting {header[:4]}")
