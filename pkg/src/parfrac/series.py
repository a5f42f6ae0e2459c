"""Exact Taylor coefficients of the target functions.

Every coefficient is a :class:`fractions.Fraction`, so the weight systems
built on top of them can be solved without rounding.  Coefficients are
generated lazily and cached per function; the error-bound summation asks for
hundreds of them.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath

__all__ = [
    "Function",
    "EXP",
    "LOG_ONE_MINUS",
    "COS",
    "SIN",
    "phi",
    "parse_function",
    "CoeffSeries",
    "coefficient",
    "taylor_coeffs",
    "radius",
    "tail_bound",
    "evaluate_mp",
]

_KINDS = ("exp", "phi", "log1m", "cos", "sin")


@dataclass(frozen=True)
class Function:
    """Identifier of a supported target function.

    ``kind`` is one of ``exp``, ``phi``, ``log1m`` (for log(1 - x)), ``cos``
    and ``sin``.  ``m`` is the index of a phi-function; ``phi`` with ``m=0``
    is normalised to ``exp``.
    """

    kind: str
    m: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.kind == "phi":
            if self.m < 0:
                raise ValueError("phi index must be non-negative")
            if self.m == 0:
                object.__setattr__(self, "kind", "exp")
        elif self.m != 0:
            raise ValueError(f"{self.kind} takes no index")

    def __str__(self):
        return f"phi{self.m}" if self.kind == "phi" else self.kind


EXP = Function("exp")
LOG_ONE_MINUS = Function("log1m")
COS = Function("cos")
SIN = Function("sin")


def phi(m: int) -> Function:
    return Function("phi", m)


def parse_function(text: str) -> Function:
    """Parse ``exp``, ``phiN``, ``log1m``, ``cos`` or ``sin``."""
    t = text.strip().lower()
    if t.startswith("phi"):
        digits = t[3:] or "1"
        if not digits.isdigit():
            raise ValueError(f"bad phi index in {text!r}")
        return phi(int(digits))
    if t in ("log1m", "log(1-x)", "log1minus"):
        return LOG_ONE_MINUS
    return Function(t)


def _exact(function: Function, k: int) -> Fraction:
    kind = function.kind
    if kind == "exp":
        return Fraction(1, math.factorial(k))
    if kind == "phi":
        return Fraction(1, math.factorial(k + function.m))
    if kind == "log1m":
        return Fraction(0) if k == 0 else Fraction(-1, k)
    if kind == "cos":
        if k % 2:
            return Fraction(0)
        return Fraction((-1) ** (k // 2), math.factorial(k))
    # sin
    if k % 2 == 0:
        return Fraction(0)
    return Fraction((-1) ** (k // 2), math.factorial(k))


class _Cache:
    def __init__(self, function):
        self.function = function
        self.values = []
        self._fact = 1  # running factorial, exact
        self._lock = threading.Lock()

    def get(self, k):
        if k < len(self.values):
            return self.values[k]
        with self._lock:
            while len(self.values) <= k:
                self.values.append(self._next())
        return self.values[k]

    def _next(self):
        n = len(self.values)
        kind = self.function.kind
        if kind in ("exp", "cos", "sin"):
            if n > 0:
                self._fact *= n
            if kind == "exp":
                return Fraction(1, self._fact)
            if (kind == "cos") == (n % 2 == 0):
                return Fraction((-1) ** (n // 2), self._fact)
            return Fraction(0)
        if kind == "phi":
            if n == 0:
                self._fact = math.factorial(self.function.m)
            else:
                self._fact *= n + self.function.m
            return Fraction(1, self._fact)
        return _exact(self.function, n)


_caches: dict[Function, _Cache] = {}
_caches_lock = threading.Lock()


def _cache_for(function: Function) -> _Cache:
    cache = _caches.get(function)
    if cache is None:
        with _caches_lock:
            cache = _caches.setdefault(function, _Cache(function))
    return cache


def coefficient(function: Function, k: int) -> Fraction:
    """Exact Taylor coefficient a_k of ``function`` at the origin."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _cache_for(function).get(k)


@dataclass(frozen=True)
class CoeffSeries:
    """Taylor coefficients of one function, exact.

    ``coeffs`` holds the terms computed eagerly; indexing past its end
    extends on demand.
    """

    function: Function
    coeffs: tuple

    def __getitem__(self, k: int) -> Fraction:
        if k < len(self.coeffs):
            return self.coeffs[k]
        return coefficient(self.function, k)

    def __len__(self):
        return len(self.coeffs)

    def extended(self, k_max: int) -> "CoeffSeries":
        return taylor_coeffs(self.function, k_max)


def taylor_coeffs(function: Function, k_max: int) -> CoeffSeries:
    """Return a_0 .. a_{k_max} of ``function`` as exact rationals."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    cache = _cache_for(function)
    cache.get(k_max)
    return CoeffSeries(function, tuple(cache.values[: k_max + 1]))


def radius(function: Function) -> float:
    """Radius of convergence of the Taylor series at 0."""
    return 1.0 if function.kind == "log1m" else math.inf


def tail_bound(function: Function, K: int, x) -> mpmath.mpf:
    """Upper bound on sum_{k>K} |a_k| x^k for x >= 0 (mpmath value).

    Returns ``+inf`` when the majorant used here does not apply yet; the
    caller should increase ``K``.
    """
    x = mpmath.mpf(x)
    if x == 0:
        return mpmath.mpf(0)
    if function.kind == "log1m":
        if x >= 1:
            return mpmath.inf
        return x ** (K + 1) / ((K + 1) * (1 - x))
    shift = function.m if function.kind == "phi" else 0
    ratio = x / (K + 2 + shift)
    if ratio >= 1:
        return mpmath.inf
    return x ** (K + 1) / mpmath.factorial(K + 1 + shift) / (1 - ratio)


def evaluate_mp(function: Function, x) -> mpmath.mpf:
    """High-precision value of ``function`` at ``x`` in the current mpmath context."""
    x = mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
    kind = function.kind
    if kind == "exp":
        return mpmath.exp(x)
    if kind == "cos":
        return mpmath.cos(x)
    if kind == "sin":
        return mpmath.sin(x)
    if kind == "log1m":
        return mpmath.log1p(-x)
    m = function.m
    if x == 0:
        return mpmath.mpf(1) / mpmath.factorial(m)
    # (e^x - p_{m-1}(x)) / x^m cancels about m*log10(1/|x|) digits
    guard = 10 + int(m * max(0.0, -float(mpmath.log10(abs(x)))))
    with mpmath.extradps(guard):
        head = mpmath.fsum(x**j / mpmath.factorial(j) for j in range(m))
        val = (mpmath.exp(x) - head) / x**m
    return +val
