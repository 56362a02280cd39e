"""Users, carriers and coverage-based grouping."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DuplicateIdError, InvalidParameterError
from .utility import Logarithmic, Sigmoidal, UtilityFunction


class UserClass(enum.Enum):
    VIP = "VIP"
    REGULAR = "Regular"

    @classmethod
    def parse(cls, text: str) -> "UserClass":
        for member in cls:
            if member.value.lower() == str(text).lower():
                return member
        raise InvalidParameterError(f"unknown user class {text!r} (expected VIP or Regular)")


@dataclass(frozen=True)
class User:
    id: int
    user_class: UserClass
    distance: float
    utility: UtilityFunction
    r_req: float = 0.0

    def __post_init__(self):
        if not isinstance(self.utility, (Sigmoidal, Logarithmic)):
            raise InvalidParameterError(f"user {self.id}: unsupported utility {self.utility!r}")
        if not (math.isfinite(self.distance) and self.distance >= 0):
            raise InvalidParameterError(f"user {self.id}: distance must be >= 0")
        if not (math.isfinite(self.r_req) and self.r_req >= 0):
            raise InvalidParameterError(f"user {self.id}: r_req must be >= 0")
        if self.user_class is UserClass.REGULAR and self.r_req != 0:
            raise InvalidParameterError(f"user {self.id}: Regular users must have r_req = 0")
        if self.user_class is UserClass.VIP and self.r_req <= 0:
            raise InvalidParameterError(f"user {self.id}: VIP users need r_req > 0")

    @property
    def is_vip(self) -> bool:
        return self.user_class is UserClass.VIP


@dataclass(frozen=True)
class Carrier:
    id: int
    coverage_radius: float
    capacity: float

    def __post_init__(self):
        for name in ("coverage_radius", "capacity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"carrier {self.id}: {name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class UserGroups:
    """Per-carrier member sets (M_j and its VIP/Regular split) and per-user K_i."""

    members: dict[int, frozenset[int]]
    vip: dict[int, frozenset[int]]
    regular: dict[int, frozenset[int]]
    in_range: dict[int, frozenset[int]] = field(default_factory=dict)

    def unreachable(self) -> list[int]:
        return sorted(uid for uid, carriers in self.in_range.items() if not carriers)


def _check_unique(ids: Iterable[int], what: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise DuplicateIdError(f"duplicate {what} id {i}")
        seen.add(i)


def build_groups(users: Sequence[User], carriers: Sequence[Carrier]) -> UserGroups:
    _check_unique((u.id for u in users), "user")
    _check_unique((c.id for c in carriers), "carrier")

    members, vip, regular = {}, {}, {}
    in_range = {u.id: set() for u in users}
    for c in carriers:
        # strict inequality: a user sitting exactly on the edge is out of range
        inside = [u for u in users if u.distance < c.coverage_radius]
        members[c.id] = frozenset(u.id for u in inside)
        vip[c.id] = frozenset(u.id for u in inside if u.is_vip)
        regular[c.id] = frozenset(u.id for u in inside if not u.is_vip)
        for u in inside:
            in_range[u.id].add(c.id)
    return UserGroups(members, vip, regular, {k: frozenset(v) for k, v in in_range.items()})


def carrier_order(carriers: Sequence[Carrier]) -> list[int]:
    """Carrier ids by ascending coverage radius, ties broken by id."""
    return [c.id for c in sorted(carriers, key=lambda c: (c.coverage_radius, c.id))]
