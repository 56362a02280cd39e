"""Independent reference solvers and optimality certificates for one carrier stage.

These are deliberately simple and slow. None of them call into the dual
solver; they only share the utility evaluators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .carrier_solver import StageInput
from .errors import InvalidParameterError, NonFiniteGradientError, TooManyParticipantsError
from .utility import DEFAULT_FLOOR_FRACTION

# Smallest total rate an iterate may reach; keeps log U finite.
TOTAL_FLOOR = 1e-9


@dataclass(frozen=True)
class OracleResult:
    method: str
    increments: dict[int, float]
    rates: dict[int, float]
    objective: float
    meta: dict = field(default_factory=dict)


def stage_objective(inp: StageInput, increments) -> float:
    """sum_i log U_i(C_i + C_i^j + r_i) for increments given in participant order."""
    total = 0.0
    for q, r in zip(inp.participants, increments):
        with np.errstate(divide="ignore"):
            total += float(q.utility.log_value(q.base + r))
    return total


def _pack(inp, method, x, meta):
    inc = {q.user_id: float(v) for q, v in zip(inp.participants, x)}
    rates = {q.user_id: q.reservation + inc[q.user_id] for q in inp.participants}
    return OracleResult(method, inc, rates, stage_objective(inp, x), meta)


def grid_solve(inp: StageInput, steps: int = 400) -> OracleResult:
    """Exhaustive search over increments on a lattice of spacing ``capacity / steps``.

    The last participant takes whatever budget is left, so every grid point
    exhausts the capacity exactly.
    """
    n = len(inp.participants)
    if n > 3:
        raise TooManyParticipantsError(f"grid_solve handles at most 3 participants, got {n}")
    if n == 0:
        raise InvalidParameterError("no participants")
    if steps < 50:
        raise InvalidParameterError(f"steps must be >= 50, got {steps}")

    budget = inp.capacity - inp.reserved
    if budget < 0:
        raise InvalidParameterError("reservations exceed capacity")
    h = inp.capacity / steps
    m = int(math.floor(budget / h + 1e-9))
    ticks = np.arange(m + 1) * h
    parts = inp.participants

    def logu(q, r):
        with np.errstate(divide="ignore", invalid="ignore"):
            return q.utility.log_value(q.base + np.maximum(r, 0.0))

    if n == 1:
        x = np.array([budget])
    elif n == 2:
        last = budget - ticks
        f = logu(parts[0], ticks) + logu(parts[1], last)
        k = int(np.argmax(f))
        x = np.array([ticks[k], max(last[k], 0.0)])
    else:
        r1, r2 = np.meshgrid(ticks, ticks, indexing="ij")
        ok = (r1 + r2) <= budget + 1e-12
        last = budget - r1 - r2
        f = logu(parts[0], r1) + logu(parts[1], r2) + logu(parts[2], last)
        f = np.where(ok, f, -np.inf)
        k = np.unravel_index(int(np.argmax(f)), f.shape)
        x = np.array([r1[k], r2[k], max(last[k], 0.0)])
    return _pack(inp, "grid", x, {"steps": steps, "spacing": h})


def project_capped_simplex(y: np.ndarray, lower: np.ndarray, mass: float) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``{x >= lower, sum(x) = mass}`` (sort-based)."""
    z = y - lower
    s = mass - lower.sum()
    if s < 0:
        raise InvalidParameterError("lower bounds exceed the mass")
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - s
    idx = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return lower + np.maximum(z - tau, 0.0)


def _first_order_gap(g, x, lower):
    """Relative spread of the gradient over free coordinates, plus any bound-side violation.

    Zero exactly at a KKT point of the budget-simplex problem; scale free, so it
    also works where the objective is numerically flat.
    """
    free = x > lower
    if not free.any():
        return 0.0
    top = np.max(g[free])
    gap = (top - np.min(g[free])) / top
    if (~free).any():
        gap = max(gap, (np.max(g[~free]) - top) / top)
    return float(gap)


def projected_gradient_solve(inp: StageInput, iters: int = 10000, step: float = 0.1,
                             tol: float = 1e-6) -> OracleResult:
    """Projected gradient ascent on the stage objective.

    ``step`` is the initial step; it is halved whenever a trial point would
    lower the objective and grown by 25% after each accepted step, so the
    recorded objective sequence never decreases.
    """
    if iters < 1:
        raise InvalidParameterError("iters must be >= 1")
    if not (step > 0):
        raise InvalidParameterError("step must be > 0")
    parts = inp.participants
    n = len(parts)
    if n == 0:
        raise InvalidParameterError("no participants")
    budget = inp.capacity - inp.reserved
    base = np.array([q.base for q in parts])
    lower = np.maximum(0.0, TOTAL_FLOOR - base)
    x = project_capped_simplex(np.full(n, budget / n), lower, budget)

    def grad(x):
        g = np.array([q.utility.marginal_scalar(b + r) for q, b, r in zip(parts, base, x)])
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient at {x!r}")
        return g

    f = stage_objective(inp, x)
    history = [f]
    t = step
    done = 0
    for done in range(1, iters + 1):
        g = grad(x)
        while True:
            trial = project_capped_simplex(x + t * g, lower, budget)
            ft = stage_objective(inp, trial)
            if ft >= f or t < 1e-300:
                break
            t *= 0.5
        if ft >= f:
            x, f = trial, ft
        history.append(f)
        if _first_order_gap(grad(x), x, lower) <= tol:
            break
        t *= 1.25
    return _pack(inp, "projected-gradient", x, {"iters": done, "step": step, "history": history})


@dataclass(frozen=True)
class KKTReport:
    stationarity: float
    slackness: float
    budget_residual: float
    reservation_violation: float

    def passes(self, stationarity_tol: float = 1e-3, budget_tol: float = math.inf) -> bool:
        return (self.stationarity <= stationarity_tol
                and self.slackness <= stationarity_tol
                and self.budget_residual <= budget_tol
                and self.reservation_violation == 0.0)


def kkt_check(inp: StageInput, rates: Mapping[int, float], price: float,
              zero_threshold: float = 1e-3) -> KKTReport:
    """Re-evaluate the optimality conditions of a stage allocation.

    ``rates`` are carrier rates (reservation included). Participants whose
    increment exceeds ``zero_threshold`` must sit on the price line; the others
    must not want more at that price.
    """
    if not (price > 0):
        raise InvalidParameterError(f"price must be > 0, got {price!r}")
    budget = max(inp.capacity - inp.reserved, 0.0)
    stationarity = 0.0
    slackness = 0.0
    reservation = 0.0
    total = 0.0
    for q in inp.participants:
        rate = rates[q.user_id]
        total += rate
        reservation = max(reservation, q.reservation - rate)
        inc = rate - q.reservation
        at = q.base + max(inc, 0.0)
        if inc > zero_threshold:
            m = q.utility.marginal_scalar(at)
            stationarity = max(stationarity, abs(m - price) / price)
        else:
            # the solver never resolves totals below this floor
            at = max(at, DEFAULT_FLOOR_FRACTION * (q.base + budget))
            m = q.utility.marginal_scalar(at)
            slackness = max(slackness, m / price - 1.0)
    return KKTReport(stationarity, max(slackness, 0.0), abs(total - inp.capacity), max(reservation, 0.0))
