"""Scenario files, capacity sweeps and CSV output.

A scenario is a JSON document::

    {
      "tolerance": 0.001,
      "users": [
        {"id": 1, "class": "Regular", "distance": 100,
         "utility": {"type": "sigmoidal", "params": {"a": 3, "b": 20}}, "r_req": 0},
        ...
      ],
      "carriers": [
        {"id": 1, "coverage_radius": 500, "capacity": 60},
        {"id": 2, "coverage_radius": 1000, "sweep": {"from": 10, "to": 150, "step": 10}}
      ]
    }

Each user hands over exactly the parameters a UE would report to the base
station: its utility parameters and its minimum required rate.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .allocator import allocate
from .carrier_solver import DEFAULT_TOLERANCE
from .errors import AllocationError, ScenarioError
from .grouping import Carrier, User, UserClass
from .oracle import KKTReport, kkt_check
from .utility import Logarithmic, Sigmoidal

BUNDLED = ("paper_scenario", "paper_scenario_m1")


@dataclass(frozen=True)
class SweepSpec:
    carrier_id: int
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        return sweep_values(self.start, self.stop, self.step)


@dataclass(frozen=True)
class Scenario:
    users: tuple[User, ...]
    carriers: tuple[Carrier, ...]
    tolerance: float = DEFAULT_TOLERANCE
    sweep: Optional[SweepSpec] = None
    # carriers whose capacity came only from a sweep block
    unfixed: frozenset[int] = frozenset()

    def with_capacity(self, carrier_id: int, capacity: float) -> "Scenario":
        if carrier_id not in {c.id for c in self.carriers}:
            raise ScenarioError(f"no carrier with id {carrier_id}")
        carriers = tuple(replace(c, capacity=float(capacity)) if c.id == carrier_id else c
                         for c in self.carriers)
        return replace(self, carriers=carriers, unfixed=self.unfixed - {carrier_id})

    @property
    def user_ids(self) -> list[int]:
        return sorted(u.id for u in self.users)

    @property
    def carrier_ids(self) -> list[int]:
        return sorted(c.id for c in self.carriers)


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic range; empty when ``start > stop``."""
    if not step > 0:
        raise ScenarioError(f"sweep step must be > 0, got {step!r}")
    if start > stop:
        return []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def _get(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError(f"{where}: missing field '{key}'")
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool)):
        raise ScenarioError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def _number(obj, key, where):
    return float(_get(obj, key, where, (int, float)))


def _parse_utility(spec, where):
    kind = str(_get(spec, "type", where, str)).lower()
    params = _get(spec, "params", where, dict)
    try:
        if kind == "sigmoidal":
            return Sigmoidal(_number(params, "a", where + ".params"), _number(params, "b", where + ".params"))
        if kind == "logarithmic":
            return Logarithmic(_number(params, "k", where + ".params"),
                               _number(params, "r_max", where + ".params"))
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc
    raise ScenarioError(f"{where}.type: expected 'sigmoidal' or 'logarithmic', got {kind!r}")


def _parse_user(raw, where):
    try:
        uid = _get(raw, "id", where, int)
        cls = UserClass.parse(_get(raw, "class", where, str))
        return User(uid, cls, _number(raw, "distance", where),
                    _parse_utility(_get(raw, "utility", where, dict), where + ".utility"),
                    _number(raw, "r_req", where))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def parse_scenario(data: dict, source: str = "<scenario>") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    tolerance = float(data.get("tolerance", DEFAULT_TOLERANCE))
    if not (math.isfinite(tolerance) and tolerance > 0):
        raise ScenarioError(f"{source}: tolerance must be > 0")

    users = tuple(_parse_user(u, f"{source}: users[{n}]")
                  for n, u in enumerate(_get(data, "users", source, list)))
    carriers, sweep, unfixed = [], None, set()
    for n, raw in enumerate(_get(data, "carriers", source, list)):
        where = f"{source}: carriers[{n}]"
        cid = _get(raw, "id", where, int)
        radius = _number(raw, "coverage_radius", where)
        capacity = _number(raw, "capacity", where) if "capacity" in raw else None
        if "sweep" in raw:
            if sweep is not None:
                raise ScenarioError(f"{where}: only one carrier may carry a sweep block")
            block = _get(raw, "sweep", where, dict)
            sweep = SweepSpec(cid, _number(block, "from", where + ".sweep"),
                              _number(block, "to", where + ".sweep"), _number(block, "step", where + ".sweep"))
            if not sweep.step > 0:
                raise ScenarioError(f"{where}.sweep.step: must be > 0")
            if capacity is None:
                capacity = sweep.start if sweep.start > 0 else sweep.step
                unfixed.add(cid)
        if capacity is None:
            raise ScenarioError(f"{where}: needs 'capacity' or 'sweep'")
        try:
            carriers.append(Carrier(cid, radius, capacity))
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc

    for what, ids in (("user", [u.id for u in users]), ("carrier", [c.id for c in carriers])):
        if len(set(ids)) != len(ids):
            raise ScenarioError(f"{source}: duplicate {what} ids")
    return Scenario(users, tuple(carriers), tolerance, sweep, frozenset(unfixed))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_scenario(data, str(path))


def load_bundled(name: str = "paper_scenario") -> Scenario:
    """Load one of the scenarios shipped with the package (see ``BUNDLED``)."""
    if name not in BUNDLED:
        raise ScenarioError(f"unknown bundled scenario {name!r}; choose from {BUNDLED}")
    ref = resources.files("carrieralloc").joinpath("data", f"{name}.json")
    return parse_scenario(json.loads(ref.read_text(encoding="utf-8")), name)


def scenario_to_dict(sc: Scenario) -> dict:
    users = []
    for u in sorted(sc.users, key=lambda u: u.id):
        if isinstance(u.utility, Sigmoidal):
            util = {"type": "sigmoidal", "params": {"a": u.utility.a, "b": u.utility.b}}
        else:
            util = {"type": "logarithmic", "params": {"k": u.utility.k, "r_max": u.utility.r_max}}
        users.append({"id": u.id, "class": u.user_class.value, "distance": u.distance,
                      "utility": util, "r_req": u.r_req})
    carriers = []
    for c in sorted(sc.carriers, key=lambda c: c.id):
        entry = {"id": c.id, "coverage_radius": c.coverage_radius}
        if c.id not in sc.unfixed:
            entry["capacity"] = c.capacity
        if sc.sweep is not None and sc.sweep.carrier_id == c.id:
            entry["sweep"] = {"from": sc.sweep.start, "to": sc.sweep.stop, "step": sc.sweep.step}
        carriers.append(entry)
    return {"tolerance": sc.tolerance, "users": users, "carriers": carriers}


def dump_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SweepRow:
    value: float
    user_ids: tuple[int, ...]
    carrier_ids: tuple[int, ...]
    carrier_rates: dict[tuple[int, int], float] = field(default_factory=dict)
    final_rates: dict[int, float] = field(default_factory=dict)
    prices: dict[int, Optional[float]] = field(default_factory=dict)
    cases: dict[int, str] = field(default_factory=dict)
    error: Optional[str] = None
    kkt: dict[int, KKTReport] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None


def _sweep_point(sc: Scenario, carrier_id: int, verify: bool, value: float) -> SweepRow:
    uids, cids = tuple(sc.user_ids), tuple(sc.carrier_ids)
    try:
        point = sc.with_capacity(carrier_id, value)
        report = allocate(point.users, point.carriers, point.tolerance)
    except (AllocationError, ValueError) as exc:
        return SweepRow(value, uids, cids, error=str(exc))

    rates = {(u, c): report.carrier_rate(u, c) for u in uids for c in cids}
    prices, cases, certs = {}, {}, {}
    for c in cids:
        st = report.stage(c)
        prices[c] = st.result.shadow_price if st.result else None
        cases[c] = st.case.case.label if st.case else "skip"
        if verify and st.result is not None:
            certs[c] = kkt_check(st.stage_input, st.result.rates, st.result.shadow_price,
                                 zero_threshold=point.tolerance)
    return SweepRow(value, uids, cids, rates, dict(report.final_rates), prices, cases, kkt=certs)


def run_sweep(sc: Scenario, carrier_id: int, values: Iterable[float], workers: int = 1,
              verify: bool = False) -> list[SweepRow]:
    """Re-run the allocation once per capacity value of ``carrier_id``.

    A solver failure only marks its own row. Rows come back sorted by value
    whatever the worker count.
    """
    if carrier_id not in sc.carrier_ids:
        raise ScenarioError(f"no carrier with id {carrier_id}")
    values = sorted(float(v) for v in values)
    job = partial(_sweep_point, sc, carrier_id, verify)
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, values))
    else:
        rows = [job(v) for v in values]
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(x, ".6g")


def csv_header(user_ids: Sequence[int], carrier_ids: Sequence[int]) -> list[str]:
    uids, cids = sorted(user_ids), sorted(carrier_ids)
    return (["sweep_value"]
            + [f"r_{u}_c{c}" for u in uids for c in cids]
            + [f"r_{u}_final" for u in uids]
            + [f"p_c{c}" for c in cids]
            + [f"case_c{c}" for c in cids])


def write_csv(rows: Sequence[SweepRow], path, user_ids: Sequence[int] = (),
              carrier_ids: Sequence[int] = ()) -> None:
    if rows:
        user_ids, carrier_ids = rows[0].user_ids, rows[0].carrier_ids
    uids, cids = sorted(user_ids), sorted(carrier_ids)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(csv_header(uids, cids))
            for row in sorted(rows, key=lambda r: r.value):
                if row.error is not None:
                    blank = [""] * (len(uids) * len(cids) + len(uids) + len(cids))
                    w.writerow([_fmt(row.value)] + blank + ["error"] * len(cids))
                    continue
                w.writerow([_fmt(row.value)]
                           + [_fmt(row.carrier_rates[(u, c)]) for u in uids for c in cids]
                           + [_fmt(row.final_rates[u]) for u in uids]
                           + [_fmt(row.prices[c]) for c in cids]
                           + [row.cases[c] for c in cids])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV: {exc.strerror}", str(path)) from exc
