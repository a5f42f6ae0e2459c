"""Forward error bounds, theta thresholds and backward error series.

For an approximant with Taylor coefficients alpha_k of a target with
coefficients a_k, the forward bound is

    eps(x) = sum_{k > s} |a_k - alpha_k| x^k,

a majorant for ||f(B) - r(B)|| when x = ||B||.  The sum is accumulated in
60-digit arithmetic until an explicit tail majorant is negligible; the tail
is then added, so the returned float never underestimates eps(x).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .baselines import resolve, taylor
from .exceptions import InvalidFunction, NonUnitConstant, OutOfConvergenceRadius, ValidationError
from .methods import FractionMethod
from .series import EXP, CoeffSeries, Function, coefficient, radius, tail_bound

__all__ = [
    "WORKING_DPS",
    "forward_bound",
    "Threshold",
    "theta_info",
    "theta",
    "theta_taylor",
    "BackwardSeries",
    "backward_series_exp",
    "BoundTable",
    "bound_table",
    "default_x_grid",
]

WORKING_DPS = 60
_STOP_RATIO = mpmath.mpf(10) ** -40
_MAX_TERMS = 6000
_THETA_RTOL = 1e-6


def _mp(v):
    return mpmath.mpf(v.numerator) / v.denominator


def _target(series, approx) -> Function:
    if series is None:
        return approx.function
    if isinstance(series, CoeffSeries):
        return series.function
    if isinstance(series, Function):
        return series
    raise TypeError("series must be a Function or CoeffSeries")


class _BoundSeries:
    """Cached coefficients |a_k - alpha_k| plus a geometric tail majorant."""

    def __init__(self, approx, function: Function):
        self.approx = approx
        self.function = function
        self.start = approx.order + 1
        self.x_conv = min(approx.x_conv, radius(function))
        self._diffs = []
        self._lock = threading.Lock()
        with mpmath.workdps(WORKING_DPS):
            if isinstance(approx, FractionMethod):
                terms = [(_mp(b), _mp(c)) for b, c in zip(approx.weights, approx.shifts) if c != 0]
                self._weights = [b for b, _ in terms]
                self._powers = [mpmath.mpf(1) for _ in terms]
                self._shifts = [c for _, c in terms]
                self._majorant = [(abs(b), abs(c)) for b, c in terms]
                self._majorant_start = 3
            else:
                self._majorant = approx.majorant()
                self._majorant_start = approx.majorant_start
                self._num = [_mp(v) for v in approx.numerator]
                self._den = [_mp(v) for v in approx.denominator]
                self._alphas = []

    def _alpha(self, k):
        a = self.approx
        if isinstance(a, FractionMethod):
            # k increases by one per call; keep running powers c_i^k
            if k > 0:
                self._powers = [p * c for p, c in zip(self._powers, self._shifts)]
            if k < 3:
                return _mp(a.taylor_coeff(k))
            return sum((b * p for b, p in zip(self._weights, self._powers)), mpmath.mpf(0))
        acc = self._num[k] if k < len(self._num) else mpmath.mpf(0)
        for j in range(1, min(k, len(self._den) - 1) + 1):
            acc -= self._den[j] * self._alphas[k - j]
        acc /= self._den[0]
        self._alphas.append(acc)
        return acc

    def diff(self, k):
        while len(self._diffs) <= k:
            n = len(self._diffs)
            alpha = self._alpha(n)
            self._diffs.append(abs(_mp(coefficient(self.function, n)) - alpha) if n >= self.start else mpmath.mpf(0))
        return self._diffs[k]

    def tail(self, K, x):
        """Upper bound of sum_{k>K} |a_k - alpha_k| x^k."""
        if K + 1 < self._majorant_start:
            return mpmath.inf
        total = tail_bound(self.function, K, x)
        for w, rho in self._majorant:
            q = rho * x
            if q >= 1:
                return mpmath.inf
            total += w * q ** (K + 1) / (1 - q)
        return total

    def value(self, x):
        # the coefficient cache and running powers are shared state
        with self._lock, mpmath.workdps(WORKING_DPS):
            x = mpmath.mpf(x)
            if x == 0:
                return mpmath.mpf(0)
            partial = mpmath.mpf(0)
            k = self.start
            xk = x**k
            while True:
                partial += self.diff(k) * xk
                tail = self.tail(k, x)
                if tail <= _STOP_RATIO * partial or k >= self.start + _MAX_TERMS:
                    return partial + tail
                k += 1
                xk *= x


@lru_cache(maxsize=256)
def _bound_series(approx, function: Function) -> _BoundSeries:
    return _BoundSeries(approx, function)


def _round_up(value) -> float:
    v = float(value)
    if mpmath.mpf(v) < value:
        v = math.nextafter(v, math.inf)
    return v


def forward_bound(approx, series=None, x: float = 0.0) -> float:
    """Certified forward error bound eps(x) of ``approx`` for its target series.

    ``approx`` is a :class:`FractionMethod`, a :class:`RationalBaseline` or a
    method name.  Raises :class:`OutOfConvergenceRadius` for x at or beyond
    the radius where the bound converges.
    """
    approx = resolve(approx) if isinstance(approx, str) else approx
    bs = _bound_series(approx, _target(series, approx))
    if x < 0:
        raise ValidationError("x must be non-negative")
    if x >= bs.x_conv:
        raise OutOfConvergenceRadius(f"x={x} is outside the convergence radius {bs.x_conv}", bs.x_conv)
    return _round_up(bs.value(x))


@dataclass(frozen=True)
class Threshold:
    value: float
    saturated: bool
    x_conv: float


@lru_cache(maxsize=512)
def _theta_cached(approx, function: Function, tol: float) -> Threshold:
    bs = _bound_series(approx, function)
    bound = lambda x: bs.value(x) <= tol
    lo, hi = 0.0, bs.x_conv
    edge = bs.x_conv * (1 - 2 * _THETA_RTOL)
    if not math.isinf(hi) and bound(edge):
        return Threshold(bs.x_conv, True, bs.x_conv)
    if math.isinf(hi):
        hi = 1.0
        while bound(hi):
            lo, hi = hi, 2 * hi
    for _ in range(400):
        if hi - lo <= _THETA_RTOL * lo:
            break
        mid = 0.5 * (lo + hi)
        if bound(mid):
            lo = mid
        else:
            hi = mid
    return Threshold(lo, False, bs.x_conv)


def theta_info(approx, series=None, tol: float = 2.0**-24) -> Threshold:
    """Largest x with eps(x) <= tol, with a flag telling whether it hit the radius."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    approx = resolve(approx) if isinstance(approx, str) else approx
    return _theta_cached(approx, _target(series, approx), float(tol))


def theta(approx, series=None, tol: float = 2.0**-24) -> float:
    """Largest x with forward_bound(x) <= tol (bisection to relative width 1e-6).

    Raises :class:`OutOfConvergenceRadius` (carrying ``x_conv``) when the
    tolerance is not reached anywhere below the convergence radius.
    """
    info = theta_info(approx, series, tol)
    if info.saturated:
        raise OutOfConvergenceRadius(f"tolerance {tol} is not reached below x_conv={info.x_conv}", info.x_conv)
    return info.value


def theta_taylor(m: int, tol: float = 2.0**-24) -> float:
    """theta for the degree-m Taylor polynomial of exp, bound sum_{k>m} x^k/k!."""
    if m < 1:
        raise ValidationError("Taylor degree must be >= 1")
    return theta(taylor(m), EXP, tol)


@dataclass(frozen=True)
class BackwardSeries:
    """Coefficients beta_k of h(x) = log(r(x)) - x for an exponential approximant."""

    beta: tuple
    order: int

    def majorant(self, x):
        """Truncated sum_k |beta_k| x^k."""
        with mpmath.workdps(WORKING_DPS):
            x = mpmath.mpf(x)
            return mpmath.fsum(abs(b) * x**k for k, b in enumerate(self.beta))

    def relative_bound(self, x):
        """||Delta B|| / ||B|| estimate h~(x)/x."""
        with mpmath.workdps(WORKING_DPS):
            return self.majorant(x) / mpmath.mpf(x)


def backward_series_exp(approx, k_max: int, dps: int = WORKING_DPS) -> BackwardSeries:
    """Formal series of log(r(x)) - x up to x^k_max.

    Uses the recurrence k g_k = k alpha_k - sum_{j<k} j g_j alpha_{k-j}
    for g = log(r), valid because alpha_0 = 1.
    """
    approx = resolve(approx) if isinstance(approx, str) else approx
    if approx.function != EXP:
        raise InvalidFunction(f"{approx.name} approximates {approx.function}, not exp")
    if k_max < approx.order + 1:
        raise ValidationError("k_max must exceed the method order")
    if approx.taylor_coeff(0) != 1:
        raise NonUnitConstant(f"{approx.name}: r(0) = {approx.taylor_coeff(0)} != 1")
    with mpmath.workdps(dps):
        alpha = [_mp(approx.taylor_coeff(k)) for k in range(k_max + 1)]
        g = [mpmath.mpf(0)] * (k_max + 1)
        for k in range(1, k_max + 1):
            acc = k * alpha[k]
            for j in range(1, k):
                acc -= j * g[j] * alpha[k - j]
            g[k] = acc / k
        g[1] -= 1
    return BackwardSeries(tuple(g), approx.order)


@dataclass
class BoundTable:
    curves: list  # (method, x, epsilon)
    thetas: list  # (method, tol, theta, saturated)


def default_x_grid(n: int = 60, lo: float = 1e-2, hi: float = 2.0):
    return list(np.logspace(np.log10(lo), np.log10(hi), n))


def bound_table(methods, tols, x_grid=None) -> BoundTable:
    """Forward-bound curves on ``x_grid`` and theta per tolerance.

    Grid points outside a method's convergence radius are skipped.
    """
    grid = default_x_grid() if x_grid is None else list(x_grid)
    table = BoundTable([], [])
    for m in methods:
        approx = resolve(m) if isinstance(m, str) else m
        x_conv = _bound_series(approx, approx.function).x_conv
        for x in grid:
            if x < x_conv:
                table.curves.append((approx.name, float(x), forward_bound(approx, None, x)))
        for tol in tols:
            info = theta_info(approx, None, tol)
            table.thetas.append((approx.name, float(tol), info.value, info.saturated))
    return table
