"""Single-carrier utility-proportional-fair allocation by shadow-price bisection.

For one carrier with capacity ``R`` and participants ``i`` holding a prior
aggregate rate ``C_i`` and a reservation ``C_i^j``, solve

    max  sum_i log U_i(C_i + C_i^j + r_i)
    s.t. sum_i (C_i^j + r_i) <= R,   r_i >= 0.

Each participant's best response to a price ``p`` is found by inverting its
marginal log-utility; the price is then bisected (geometrically) until the
aggregate demand exhausts the capacity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InfeasibleReservationsError, InvalidParameterError, NoConvergenceError
from .utility import DEFAULT_FLOOR_FRACTION, UtilityFunction, inverse_marginal

DEFAULT_TOLERANCE = 1e-3
DEFAULT_MAX_ITER = 200


class Case(enum.Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3

    @property
    def label(self) -> str:
        return f"Case{self.value}"


@dataclass(frozen=True)
class Participant:
    user_id: int
    utility: UtilityFunction
    offset: float = 0.0
    reservation: float = 0.0

    def __post_init__(self):
        for name in ("offset", "reservation"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameterError(f"participant {self.user_id}: {name} must be finite and >= 0")

    @property
    def base(self) -> float:
        """Total rate already held before any incremental allocation."""
        return self.offset + self.reservation


@dataclass(frozen=True)
class StageInput:
    carrier_id: int
    capacity: float
    participants: tuple[Participant, ...]

    def __post_init__(self):
        object.__setattr__(self, "participants",
                           tuple(sorted(self.participants, key=lambda q: q.user_id)))
        if not (math.isfinite(self.capacity) and self.capacity > 0):
            raise InvalidParameterError(f"carrier {self.carrier_id}: capacity must be > 0")

    @property
    def reserved(self) -> float:
        return sum(q.reservation for q in self.participants)


@dataclass(frozen=True)
class StageResult:
    carrier_id: int
    shadow_price: float
    increments: dict[int, float]
    rates: dict[int, float]
    residual: float
    iterations: int = 0
    case_used: Optional[Case] = None
    bracket: tuple[float, float] = field(default=(math.nan, math.nan))

    @property
    def total(self) -> float:
        return sum(self.rates[uid] for uid in sorted(self.rates))


def demand_at_price(participant: Participant, p: float, budget: float) -> float:
    """Truncated best response ``r_i >= 0`` of one participant to price ``p``."""
    if not (p > 0):
        raise InvalidParameterError(f"price must be > 0, got {p!r}")
    if not (budget > 0):
        raise InvalidParameterError(f"budget must be > 0, got {budget!r}")
    base = participant.base
    hint = base + budget
    floor = base if base > 0 else DEFAULT_FLOOR_FRACTION * hint
    total = inverse_marginal(participant.utility, p, hint, r_floor=floor)
    if total >= hint:
        return budget
    return max(0.0, total - base)


def aggregate_demand(participants: Sequence[Participant], p: float, budget: float) -> float:
    return sum(demand_at_price(q, p, budget) for q in participants)


def _result(inp, p, budget, iterations, bracket, increments=None):
    parts = inp.participants
    if increments is None:
        increments = {q.user_id: demand_at_price(q, p, budget) for q in parts}
        capped = [q for q in parts if increments[q.user_id] >= budget]
        if capped:
            # A participant pinned at the bracket end holds the whole budget; the
            # only price consistent with its stationarity is its marginal there.
            # That price is at least p, so the others only shrink when re-priced;
            # the capped ones absorb what remains.
            p = capped[0].utility.marginal_scalar(capped[0].base + budget)
            ids = {q.user_id for q in capped}
            for q in parts:
                if q.user_id not in ids:
                    increments[q.user_id] = demand_at_price(q, p, budget)
            rest = sum(increments[q.user_id] for q in parts if q.user_id not in ids)
            for q in capped:
                increments[q.user_id] = max(budget - rest, 0.0) / len(capped)
    rates = {q.user_id: q.reservation + increments[q.user_id] for q in parts}
    total = sum(rates[q.user_id] for q in parts)
    return StageResult(inp.carrier_id, p, increments, rates, abs(total - inp.capacity),
                       iterations, bracket=bracket)


def _split_at_jump(inp, lo, hi, budget, iterations):
    """Price bracket has collapsed onto a demand jump: blend the two sides so the budget binds."""
    parts = inp.participants
    d_lo = {q.user_id: demand_at_price(q, lo, budget) for q in parts}
    d_hi = {q.user_id: demand_at_price(q, hi, budget) for q in parts}
    s_lo = sum(d_lo[q.user_id] for q in parts)
    s_hi = sum(d_hi[q.user_id] for q in parts)
    if s_hi > budget:
        # Demand overshoots on both sides: a participant sits on a marginal that is
        # flat to double precision (a sigmoid well below its inflection). Others keep
        # their well-defined demand, the flat ones share what is left.
        flat = [q.user_id for q in parts if d_hi[q.user_id] >= budget]
        if not flat:
            flat = [q.user_id for q in parts]
        fixed = sum(d_hi[q.user_id] for q in parts if q.user_id not in flat)
        left = max(budget - fixed, 0.0)
        scale = 1.0 if left > 0 else budget / fixed
        inc = {i: (left / len(flat) if i in flat else d_hi[i] * scale) for i in d_hi}
        return _result(inp, hi, budget, iterations, (lo, hi), increments=inc)
    theta = (budget - s_hi) / (s_lo - s_hi) if s_lo > s_hi else 0.0
    theta = min(max(theta, 0.0), 1.0)
    inc = {i: d_hi[i] + theta * (d_lo[i] - d_hi[i]) for i in d_hi}
    return _result(inp, hi, budget, iterations, (lo, hi), increments=inc)


def solve_stage(inp: StageInput, tolerance: float = DEFAULT_TOLERANCE,
                max_iter: int = DEFAULT_MAX_ITER) -> StageResult:
    """Solve one carrier's allocation; the budget is met within ``tolerance * capacity``."""
    if not inp.participants:
        raise InvalidParameterError(f"carrier {inp.carrier_id}: no participants")
    if not (tolerance > 0):
        raise InvalidParameterError(f"tolerance must be > 0, got {tolerance!r}")
    reserved = inp.reserved
    if reserved > inp.capacity:
        raise InfeasibleReservationsError(
            f"carrier {inp.carrier_id}: reservations {reserved:g} exceed capacity {inp.capacity:g}")

    budget = inp.capacity - reserved
    parts = inp.participants
    if budget <= 0:
        # every unit is reserved; report the smallest price supporting zero increments
        p = max(q.utility.marginal_scalar(q.base) if q.base > 0 else math.inf for q in parts)
        rates = {q.user_id: q.reservation for q in parts}
        zeros = {q.user_id: 0.0 for q in parts}
        return StageResult(inp.carrier_id, p, zeros, rates, abs(reserved - inp.capacity))

    slack = tolerance * inp.capacity
    n = len(parts)
    # At p_lo some participant wants the whole budget; at p_hi nobody wants more than budget / n.
    tiny = math.ulp(0.0)
    p_lo = max(min(q.utility.marginal_scalar(q.base + budget) for q in parts), tiny)
    p_hi = max(max(q.utility.marginal_scalar(q.base + budget / n) for q in parts), p_lo)

    def excess(p):
        return aggregate_demand(parts, p, budget) - budget

    def settled(p, e):
        if abs(e) > slack:
            return False
        # A participant capped at the whole budget while others still buy is only
        # inside the slack by accident; the true price is higher.
        return e <= 0 or all(demand_at_price(q, p, budget) < budget for q in parts)

    for p in (p_lo, p_hi):
        if settled(p, excess(p)):
            return _result(inp, p, budget, 0, (p_lo, p_hi))

    lo, hi = p_lo, p_hi
    for it in range(1, max_iter + 1):
        mid = math.exp(0.5 * (math.log(lo) + math.log(hi)))
        if not lo < mid < hi:
            return _split_at_jump(inp, lo, hi, budget, it)
        e = excess(mid)
        if settled(mid, e):
            return _result(inp, mid, budget, it, (lo, hi))
        if e > 0:
            lo = mid
        else:
            hi = mid
    raise NoConvergenceError(
        f"carrier {inp.carrier_id}: price bisection did not converge in {max_iter} steps",
        bracket=(lo, hi), residual=excess(math.exp(0.5 * (math.log(lo) + math.log(hi)))))
