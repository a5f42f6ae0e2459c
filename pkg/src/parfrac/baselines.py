"""Serial reference schemes as exact scalar rational functions.

The diagonal Pade approximants and truncated Taylor polynomials are
described by exact numerator/denominator coefficients.  That is all the
error-bound machinery needs: their Taylor coefficients follow from exact
series division and their tails from the (complex) poles of the denominator.
Matrix evaluators for these schemes live in :mod:`parfrac.dense` and
:mod:`parfrac.action`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .exceptions import UnknownMethod
from .methods import CATALOG_NAMES, catalog
from .series import EXP, Function, phi

__all__ = [
    "RationalBaseline",
    "pade4",
    "pade4_phi1",
    "pade10",
    "taylor",
    "PADE10_COEFFS",
    "resolve",
    "BASELINE_NAMES",
]


@dataclass(frozen=True)
class RationalBaseline:
    """r(x) = p(x) / q(x) with exact coefficients, q(0) = 1."""

    name: str
    numerator: tuple
    denominator: tuple
    order: int
    function: Function = EXP
    _coeffs: list = field(default_factory=list, compare=False, repr=False)
    _pole_cache: list = field(default_factory=list, compare=False, repr=False)

    def taylor_coeff(self, k: int) -> Fraction:
        p, q, out = self.numerator, self.denominator, self._coeffs
        while len(out) <= k:
            n = len(out)
            acc = p[n] if n < len(p) else Fraction(0)
            for j in range(1, min(n, len(q) - 1) + 1):
                acc -= q[j] * out[n - j]
            out.append(acc / q[0])
        return out[k]

    def _poles(self):
        """Roots r_j of q and residues w_j of p/q at them (mpmath complex)."""
        q = self.denominator
        if len(q) == 1:
            return []
        if not self._pole_cache:
            with mpmath.workdps(60):
                to_mp = lambda v: mpmath.mpf(v.numerator) / v.denominator
                qc = [to_mp(v) for v in reversed(q)]
                pc = [to_mp(v) for v in reversed(self.numerator)]
                dq = [c * (len(qc) - 1 - i) for i, c in enumerate(qc[:-1])]
                roots = mpmath.polyroots(qc, maxsteps=200, extraprec=200)
                self._pole_cache.extend(
                    (r, mpmath.polyval(pc, r) / mpmath.polyval(dq, r)) for r in roots
                )
        return self._pole_cache

    def majorant(self):
        """Pairs (W, rho) with |taylor_coeff(k)| <= sum W rho^k beyond the polynomial part."""
        pairs = []
        for r, w in self._poles():
            rho = 1 / abs(r)
            # 1e-30 relative inflation absorbs root-finding error
            pairs.append((abs(w) * rho * (1 + mpmath.mpf(10) ** -30), rho))
        return pairs

    @property
    def majorant_start(self) -> int:
        """First k from which :meth:`majorant` holds."""
        return max(1, len(self.numerator) - len(self.denominator) + 1)

    @property
    def x_conv(self) -> float:
        poles = self._poles()
        if not poles:
            return math.inf
        return float(min(abs(r) for r, _ in poles))

    @property
    def processors(self) -> int:
        return 1

    def evaluate_exact(self, x) -> Fraction:
        x = Fraction(x)
        return _horner(self.numerator, x) / _horner(self.denominator, x)

    def evaluate_mp(self, x):
        x = mpmath.mpf(x)
        conv = lambda v: mpmath.mpf(v.numerator) / v.denominator
        return _horner([conv(v) for v in self.numerator], x) / _horner([conv(v) for v in self.denominator], x)

    def __call__(self, x: float) -> float:
        return _horner([float(v) for v in self.numerator], x) / _horner([float(v) for v in self.denominator], x)


def _horner(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


F = Fraction

PADE10_COEFFS = (F(1), F(1, 2), F(1, 9), F(1, 72), F(1, 1008), F(1, 30240))


@lru_cache(maxsize=None)
def pade4() -> RationalBaseline:
    return RationalBaseline("pade4", (F(1), F(1, 2), F(1, 12)), (F(1), F(-1, 2), F(1, 12)), 4)


@lru_cache(maxsize=None)
def pade4_phi1() -> RationalBaseline:
    return RationalBaseline(
        "pade4_phi1", (F(1), F(1, 10), F(1, 60)), (F(1), F(-2, 5), F(1, 20)), 4, phi(1)
    )


@lru_cache(maxsize=None)
def pade10() -> RationalBaseline:
    den = tuple(c if k % 2 == 0 else -c for k, c in enumerate(PADE10_COEFFS))
    return RationalBaseline("pade10", PADE10_COEFFS, den, 10)


@lru_cache(maxsize=None)
def taylor(m: int, function: Function = EXP) -> RationalBaseline:
    from .series import coefficient

    if m < 1:
        raise ValueError("Taylor degree must be >= 1")
    num = tuple(coefficient(function, k) for k in range(m + 1))
    return RationalBaseline(f"taylor{m}", num, (F(1),), m, function)


_FIXED = {"pade4": pade4, "pade4_phi1": pade4_phi1, "pade10": pade10}
BASELINE_NAMES = tuple(_FIXED) + ("taylor<m>",)
_TAYLOR = re.compile(r"^(?:taylor|T)(\d+)$")


def resolve(name: str):
    """Look up a catalog method (``R4``, ``R10'`` ...) or a baseline (``pade4``, ``taylor10`` ...)."""
    base = name[:-1] if name.endswith("'") else name
    if base in CATALOG_NAMES:
        return catalog(name)
    if name in _FIXED:
        return _FIXED[name]()
    m = _TAYLOR.match(name)
    if m:
        return taylor(int(m.group(1)))
    raise UnknownMethod(
        f"unknown method {name!r}; choose from {', '.join(CATALOG_NAMES + BASELINE_NAMES)}"
    )
