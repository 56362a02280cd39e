"""
Two carriers, two user classes
==============================

The bundled scenario has eight users. Users 1-4 sit inside the small carrier,
all eight inside the large one. Carriers are served smallest first, and each
carrier picks one of three regimes from the VIP users' remaining deficits:

* Case1: no deficit left, everybody in range shares the carrier.
* Case2: deficits exceed the capacity, only VIP users take part.
* Case3: deficits are reserved first, the remainder is shared by all.
"""

from carrieralloc import allocate, load_bundled

scenario = load_bundled("paper_scenario")

for r2 in (40.0, 100.0):
    sc = scenario.with_capacity(2, r2)
    report = allocate(sc.users, sc.carriers, sc.tolerance)
    print(f"\nsecond carrier capacity {r2:g}")
    for stage in report.stages:
        print(f"  carrier {stage.carrier_id}: {stage.case.case.label}, price {stage.result.shadow_price:.4g},"
              f" deficits {dict((k, v) for k, v in stage.deficits.items() if v)}")
    print("  final:", {u: round(r, 3) for u, r in report.final_rates.items()})

#####################################################
#
# With only 40 units the second carrier cannot cover the 45 units VIP users
# 6 and 8 still need, so regular users 5 and 7 (out of range of the first
# carrier) end with nothing. At 100 units everyone is served and every VIP
# user reaches its minimum.
