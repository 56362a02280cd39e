"""Application utility functions and the derived quantities the dual solver needs.

Two families are supported:

* ``Sigmoidal(a, b)``: real-time traffic, ``U(r) = c * (1 / (1 + exp(-a (r - b))) - d)``
  with ``c = (1 + e^{ab}) / e^{ab}`` and ``d = 1 / (1 + e^{ab})``.
* ``Logarithmic(k, r_max)``: delay-tolerant traffic,
  ``U(r) = log(1 + k r) / log(1 + k r_max)``.

The sigmoidal form simplifies exactly to ``U(r) = sigma(a (r - b)) * (1 - e^{-a r})``,
which is what is evaluated here; ``e^{ab}`` is never formed, so large ``a*b``
does not overflow.

All evaluators accept floats or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, InvalidParameterError

ArrayLike = Union[float, np.ndarray]

# Lower end of the inverse-marginal bracket, as a fraction of the upper end.
DEFAULT_FLOOR_FRACTION = 1e-6
INVERSE_WIDTH = 1e-10
INVERSE_MAX_ITER = 200


def _log1mexp(x):
    """log(1 - exp(-x)) for x > 0, accurate on both tails."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x < math.log(2.0), np.log(-np.expm1(-x)), np.log1p(-np.exp(-x)))


def _check_positive(**params):
    for name, value in params.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be a finite positive number, got {value!r}")


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Sigmoidal:
    a: float
    b: float

    def __post_init__(self):
        _check_positive(a=self.a, b=self.b)

    @property
    def c(self) -> float:
        # (1 + e^{ab}) / e^{ab}
        return 1.0 + math.exp(-self.a * self.b)

    @property
    def d(self) -> float:
        # 1 / (1 + e^{ab}), via the logistic of -ab
        return math.exp(-np.logaddexp(0.0, self.a * self.b))

    @property
    def scale(self) -> float:
        """Characteristic rate (the inflection point)."""
        return self.b

    def value(self, r):
        r = np.asarray(r, dtype=float)
        s = self.a * (r - self.b)
        sig = np.exp(-np.logaddexp(0.0, -s))
        return sig * -np.expm1(-self.a * r)

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        s = self.a * (r - self.b)
        return -np.logaddexp(0.0, -s) + _log1mexp(self.a * r)

    def marginal(self, r):
        # a * sigma(-s) + a / (e^{ar} - 1); the second term equals the
        # a d e^{-s} / (1 - d (1 + e^{-s})) term of the direct derivative.
        r = np.asarray(r, dtype=float)
        s = self.a * (r - self.b)
        with np.errstate(over="ignore"):
            return self.a * np.exp(-np.logaddexp(0.0, s)) + self.a / np.expm1(self.a * r)

    def marginal_scalar(self, r: float) -> float:
        s = self.a * (r - self.b)
        tail = math.exp(-s) / (1.0 + math.exp(-s)) if s >= 0 else 1.0 / (1.0 + math.exp(s))
        ar = self.a * r
        return self.a * tail + (self.a / math.expm1(ar) if ar < 700.0 else 0.0)


@dataclass(frozen=True)
class Logarithmic:
    k: float
    r_max: float

    def __post_init__(self):
        _check_positive(k=self.k, r_max=self.r_max)

    @property
    def scale(self) -> float:
        return self.r_max

    @property
    def _norm(self) -> float:
        return math.log1p(self.k * self.r_max)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return np.log1p(self.k * r) / self._norm

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        return np.log(np.log1p(self.k * r)) - math.log(self._norm)

    def marginal(self, r):
        r = np.asarray(r, dtype=float)
        kr = self.k * r
        return self.k / ((1.0 + kr) * np.log1p(kr))

    def marginal_scalar(self, r: float) -> float:
        kr = self.k * r
        return self.k / ((1.0 + kr) * math.log1p(kr))


UtilityFunction = Union[Sigmoidal, Logarithmic]


def _require_valid(u):
    if not isinstance(u, (Sigmoidal, Logarithmic)):
        raise InvalidParameterError(f"unsupported utility {u!r}")


def utility(u: UtilityFunction, r: ArrayLike) -> ArrayLike:
    """U(r) for r >= 0. Logarithmic utilities may exceed 1 past r_max."""
    _require_valid(u)
    if np.any(np.asarray(r) < 0):
        raise DomainError("utility is defined for r >= 0")
    return _scalar_or_array(u.value(r))


def log_utility(u: UtilityFunction, r: ArrayLike) -> ArrayLike:
    _require_valid(u)
    if np.any(np.asarray(r) <= 0):
        raise DomainError("log-utility needs r > 0 (U(0) = 0)")
    return _scalar_or_array(u.log_value(r))


def marginal_log_utility(u: UtilityFunction, r: ArrayLike) -> ArrayLike:
    """d/dr ln U(r); strictly positive and strictly decreasing on r > 0."""
    _require_valid(u)
    if np.any(np.asarray(r) <= 0):
        raise DomainError("marginal log-utility needs r > 0")
    return _scalar_or_array(u.marginal(r))


def inverse_marginal(u: UtilityFunction, p: float, r_hint_max: float,
                     r_floor: float | None = None) -> float:
    """Rate at which the marginal log-utility equals ``p``.

    The search runs by bisection on ``[r_floor, r_hint_max]``. If the marginal
    at ``r_hint_max`` still exceeds ``p`` the upper end is returned; if it is
    already below ``p`` at ``r_floor`` the demand is truncated to 0.
    ``r_floor`` defaults to ``1e-6 * r_hint_max``.
    """
    _require_valid(u)
    _check_positive(p=p, r_hint_max=r_hint_max)
    lo = DEFAULT_FLOOR_FRACTION * r_hint_max if r_floor is None else float(r_floor)
    hi = float(r_hint_max)
    if not 0 < lo < hi:
        raise InvalidParameterError(f"need 0 < r_floor < r_hint_max, got {lo!r}, {hi!r}")

    marginal = u.marginal_scalar
    if marginal(hi) >= p:
        return hi
    if marginal(lo) <= p:
        return 0.0

    for _ in range(INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        # no early exit on the residual: below the inflection point the sigmoid
        # marginal is flat to ~1e-11, so only the bracket width pins the rate
        if marginal(mid) > p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= INVERSE_WIDTH:
            break
    return 0.5 * (lo + hi)
