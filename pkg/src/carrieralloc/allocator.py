"""Staged multi-carrier allocation with VIP minimum-rate guarantees.

Carriers are processed one at a time in ascending coverage radius. Before each
carrier is solved, every VIP user's remaining deficit ``q_i = max(0, r_req - C_i)``
decides which regime applies:

* Case1: no deficits left, all covered users share the carrier.
* Case2: deficits sum to at least the capacity, only VIP users take part.
* Case3: deficits fit, they are reserved first and the remainder is shared by all.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .carrier_solver import (DEFAULT_MAX_ITER, DEFAULT_TOLERANCE, Case, Participant,
                             StageInput, StageResult, solve_stage)
from .errors import AllocationError, StageError
from .grouping import Carrier, User, UserGroups, build_groups, carrier_order

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageCase:
    case: Case
    eligible: tuple[int, ...]


@dataclass(frozen=True)
class StageRecord:
    """Everything that happened on one carrier; ``case``/``result`` are None for a skipped stage."""

    index: int
    carrier_id: int
    capacity: float
    case: Optional[StageCase]
    deficits: dict[int, float]
    reservations: dict[int, float]
    result: Optional[StageResult]
    cumulative: dict[int, float]
    stage_input: Optional[StageInput] = None

    @property
    def skipped(self) -> bool:
        return self.result is None

    def rate(self, user_id: int) -> float:
        if self.result is None:
            return 0.0
        return self.result.rates.get(user_id, 0.0)


@dataclass(frozen=True)
class AllocationReport:
    users: tuple[User, ...]
    carriers: tuple[Carrier, ...]
    tolerance: float
    groups: UserGroups
    stages: tuple[StageRecord, ...]
    final_rates: dict[int, float]
    unreachable: tuple[int, ...] = field(default=())

    def stage(self, carrier_id: int) -> StageRecord:
        for s in self.stages:
            if s.carrier_id == carrier_id:
                return s
        raise KeyError(carrier_id)

    def carrier_rate(self, user_id: int, carrier_id: int) -> float:
        return self.stage(carrier_id).rate(user_id)

    def to_dict(self) -> dict:
        stages = []
        for s in self.stages:
            stages.append({
                "carrier": s.carrier_id,
                "capacity": s.capacity,
                "case": s.case.case.label if s.case else None,
                "eligible": list(s.case.eligible) if s.case else [],
                "shadow_price": s.result.shadow_price if s.result else None,
                "residual": s.result.residual if s.result else None,
                "deficits": {str(k): v for k, v in sorted(s.deficits.items())},
                "reservations": {str(k): v for k, v in sorted(s.reservations.items())},
                "rates": {str(k): v for k, v in sorted(s.result.rates.items())} if s.result else {},
                "cumulative": {str(k): v for k, v in sorted(s.cumulative.items())},
            })
        return {
            "tolerance": self.tolerance,
            "stages": stages,
            "final_rates": {str(k): v for k, v in sorted(self.final_rates.items())},
            "unreachable": list(self.unreachable),
        }


def compute_deficits(users: Sequence[User], cumulative: Mapping[int, float]) -> dict[int, float]:
    """q_i = max(0, r_req - C_i); always 0 for Regular users."""
    out = {}
    for u in users:
        c = cumulative.get(u.id, 0.0)
        out[u.id] = u.r_req - c if (u.is_vip and c < u.r_req) else 0.0
    return out


def select_case(carrier_id: int, groups: UserGroups, deficits: Mapping[int, float],
                capacity: float) -> Optional[StageCase]:
    members = groups.members[carrier_id]
    if not members:
        return None
    vip = groups.vip[carrier_id]
    # Regular users have r_req = 0, so "any deficit in M_j" is the same as "any VIP deficit".
    if all(deficits.get(i, 0.0) == 0.0 for i in vip):
        return StageCase(Case.CASE1, tuple(sorted(members)))
    need = sum(deficits.get(i, 0.0) for i in sorted(vip))
    if need >= capacity:
        return StageCase(Case.CASE2, tuple(sorted(vip)))
    return StageCase(Case.CASE3, tuple(sorted(members)))


def build_reservations(case: StageCase, deficits: Mapping[int, float]) -> dict[int, float]:
    if case.case is Case.CASE3:
        return {i: deficits.get(i, 0.0) for i in case.eligible}
    return {i: 0.0 for i in case.eligible}


def allocate(users: Sequence[User], carriers: Sequence[Carrier],
             tolerance: float = DEFAULT_TOLERANCE, max_iter: int = DEFAULT_MAX_ITER) -> AllocationReport:
    groups = build_groups(users, carriers)
    by_id = {u.id: u for u in users}
    cap = {c.id: c.capacity for c in carriers}
    cumulative = {u.id: 0.0 for u in users}
    stages = []

    for index, cid in enumerate(carrier_order(carriers)):
        covered = [by_id[i] for i in sorted(groups.members[cid])]
        deficits = compute_deficits(covered, cumulative)
        case = select_case(cid, groups, deficits, cap[cid])
        if case is None:
            log.info("carrier %s covers no users; capacity %g left unallocated", cid, cap[cid])
            stages.append(StageRecord(index, cid, cap[cid], None, deficits, {}, None, dict(cumulative)))
            continue

        reservations = build_reservations(case, deficits)
        participants = [Participant(i, by_id[i].utility, cumulative[i], reservations[i])
                        for i in case.eligible]
        inp = StageInput(cid, cap[cid], tuple(participants))
        try:
            result = solve_stage(inp, tolerance, max_iter)
        except AllocationError as exc:
            raise StageError(index, cid, exc) from exc
        result = replace(result, case_used=case.case)

        for i in case.eligible:
            cumulative[i] = cumulative[i] + result.rates[i]
        stages.append(StageRecord(index, cid, cap[cid], case, deficits, reservations,
                                  result, dict(cumulative), inp))

    # Summed in stage order, so this is bitwise the running cumulative rate.
    final = {}
    for u in users:
        total = 0.0
        for s in stages:
            total = total + s.rate(u.id)
        final[u.id] = total

    return AllocationReport(tuple(users), tuple(carriers), tolerance, groups, tuple(stages),
                            final, tuple(groups.unreachable()))
