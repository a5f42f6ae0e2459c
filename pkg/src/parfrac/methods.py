"""Partial-fraction approximants r(x) = d0 + d1 x + d2 x^2 + sum_i b_i / (1 - c_i x).

A :class:`FractionMethod` is fully described by exact rational shifts ``c_i``,
weights ``b_i`` and an optional quadratic part.  Weights are obtained from
the moment equations sum_i b_i c_i^k = a_k, solved by Gaussian elimination
over the rationals.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import mpmath

from .exceptions import (
    DuplicateShift,
    InvalidShift,
    LengthMismatch,
    SumRuleViolation,
    UnderDetermined,
    UnknownMethod,
    ValidationError,
)
from .series import EXP, CoeffSeries, Function, coefficient, parse_function, phi

__all__ = [
    "FractionMethod",
    "MethodTemplate",
    "FRAC4_TEMPLATE",
    "FRAC8_TEMPLATE",
    "CATALOG_NAMES",
    "as_fraction",
    "solve_rational",
    "solve_weights",
    "build_plain",
    "build_hybrid",
    "catalog",
    "optimize_alpha",
    "to_residual_form",
    "taylor_expansion_of_method",
    "to_card",
    "from_card",
]

PLAIN = "plain"
RESIDUAL = "residual"


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` strings or floats (exactly) to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def _power(c: Fraction, k: int) -> Fraction:
    # 0**0 == 1 so a zero shift carries the constant term
    return Fraction(1) if k == 0 else c**k


def _coeff_source(series) -> Callable[[int], Fraction]:
    if isinstance(series, Function):
        return lambda k: coefficient(series, k)
    if isinstance(series, CoeffSeries):
        return series.__getitem__
    raise TypeError("series must be a Function or CoeffSeries")


def _function_of(series) -> Function:
    return series if isinstance(series, Function) else series.function


def _check_distinct(shifts):
    seen = {}
    for i, c in enumerate(shifts):
        if c in seen:
            raise DuplicateShift(f"shifts {seen[c]} and {i} are both equal to {c}")
        seen[c] = i


@dataclass(frozen=True)
class FractionMethod:
    """One partial-fraction approximant with exact coefficients.

    ``poly`` is empty or holds ``(d0, d1, d2)``.  ``form`` selects how
    evaluators assemble the result: ``"plain"`` sums b_i (1 - c_i x)^-1,
    ``"residual"`` uses the algebraically equal a0 + sum b_i c_i x (1 - c_i x)^-1,
    which loses less to round-off when |c_i x| is small.
    """

    name: str
    shifts: tuple
    weights: tuple
    poly: tuple = ()
    order: int = 0
    function: Function = EXP
    form: str = PLAIN
    discrepancies: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.shifts) != len(self.weights):
            raise LengthMismatch("shifts and weights differ in length")
        if len(self.poly) not in (0, 3):
            raise LengthMismatch("poly must have 0 or 3 coefficients")
        if self.form not in (PLAIN, RESIDUAL):
            raise ValidationError(f"unknown form {self.form!r}")
        _check_distinct(self.shifts)

    @property
    def processors(self) -> int:
        """Fraction terms that need a solve, plus one if a polynomial part needs products."""
        solves = sum(1 for c in self.shifts if c != 0)
        return solves + (1 if self.poly_degree > 0 else 0)

    @property
    def poly_degree(self) -> int:
        for k in (2, 1):
            if self.poly and self.poly[k] != 0:
                return k
        return 0

    @property
    def is_residual(self) -> bool:
        return self.form == RESIDUAL

    def poly_coeff(self, k: int) -> Fraction:
        if self.poly and k < 3:
            return self.poly[k]
        return Fraction(0)

    @property
    def constant(self) -> Fraction:
        """r(0) = d0 + sum b_i."""
        return self.poly_coeff(0) + sum(self.weights, Fraction(0))

    @property
    def max_abs_shift(self) -> Fraction:
        return max((abs(c) for c in self.shifts), default=Fraction(0))

    @property
    def x_conv(self) -> float:
        """Radius inside which every (1 - c_i x)^-1 has a convergent series."""
        m = self.max_abs_shift
        return float("inf") if m == 0 else float(1 / m)

    @property
    def max_coefficient(self) -> Fraction:
        return max(abs(v) for v in (*self.weights, *self.poly))

    def taylor_coeff(self, k: int) -> Fraction:
        return self.poly_coeff(k) + sum((b * _power(c, k) for b, c in zip(self.weights, self.shifts)), Fraction(0))

    def sum_rule_residuals(self, series=None):
        source = _coeff_source(series or self.function)
        return [self.taylor_coeff(k) - source(k) for k in range(self.order + 1)]

    def check_sum_rules(self, series=None):
        bad = [k for k, r in enumerate(self.sum_rule_residuals(series)) if r != 0]
        if bad:
            raise SumRuleViolation(f"{self.name}: Taylor match fails at k={bad}")

    def _evaluate(self, x, conv):
        # same operation order as the matrix evaluators: fraction terms in
        # ascending index, then the polynomial part
        b = [conv(v) for v in self.weights]
        c = [conv(v) for v in self.shifts]
        d = [conv(self.poly_coeff(k)) for k in range(3)]
        total = 0 * x
        if self.form == PLAIN:
            for bi, ci in zip(b, c):
                total = total + bi * (1 / (1 - ci * x))
            poly = d[0]
        else:
            for bi, ci in zip(b, c):
                if ci != 0:
                    total = total + bi * ((ci * x) * (1 / (1 - ci * x)))
            poly = conv(self.constant)
        if d[1]:
            poly = poly + d[1] * x
        if d[2]:
            poly = poly + d[2] * (x * x)
        return total + poly

    def evaluate_exact(self, x) -> Fraction:
        return self._evaluate(as_fraction(x), lambda v: v)

    def evaluate_mp(self, x):
        """Value at ``x`` in the current mpmath precision."""
        to_mp = lambda v: mpmath.mpf(v.numerator) / v.denominator
        return self._evaluate(to_mp(x) if isinstance(x, Fraction) else mpmath.mpf(x), to_mp)

    def __call__(self, x: float) -> float:
        return self._evaluate(float(x), float)


@dataclass(frozen=True)
class MethodTemplate:
    """A family of shift sequences parametrised by a positive scalar alpha."""

    name: str
    pattern: Callable[[Fraction], tuple]

    def shifts(self, alpha) -> tuple:
        return tuple(self.pattern(as_fraction(alpha)))


FRAC4_TEMPLATE = MethodTemplate(
    "frac4", lambda a: (Fraction(0), 1 / a, -1 / a, 1 / (2 * a), -1 / (2 * a))
)
FRAC8_TEMPLATE = MethodTemplate(
    "frac8",
    lambda a: (
        Fraction(0),
        1 / a,
        -1 / a,
        Fraction(2, 3) / a,
        -Fraction(2, 3) / a,
        1 / (2 * a),
        -1 / (2 * a),
        Fraction(2, 5) / a,
        -Fraction(2, 5) / a,
    ),
)
TEMPLATES = {t.name: t for t in (FRAC4_TEMPLATE, FRAC8_TEMPLATE)}


def solve_rational(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list:
    """Solve a square linear system exactly by Gaussian elimination.

    Partial pivoting picks the entry of largest magnitude; in exact
    arithmetic that only matters for zero pivots, but it keeps
    intermediate numbers small.
    """
    n = len(rhs)
    rows = [list(map(Fraction, row)) + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    if any(len(r) != n + 1 for r in rows):
        raise LengthMismatch("matrix must be square and match the right-hand side")
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(rows[r][col]))
        if rows[piv][col] == 0:
            raise ValidationError("singular system")
        rows[col], rows[piv] = rows[piv], rows[col]
        pivot_row = rows[col]
        for r in range(col + 1, n):
            factor = rows[r][col] / pivot_row[col]
            if factor:
                row = rows[r]
                for j in range(col, n + 1):
                    row[j] -= factor * pivot_row[j]
    x = [Fraction(0)] * n
    for i in reversed(range(n)):
        acc = rows[i][n] - sum((rows[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        x[i] = acc / rows[i][i]
    return x


def solve_weights(shifts, series, order: int) -> tuple:
    """Weights b with sum_i b_i c_i^k = a_k for k = 0..order, exactly.

    ``series`` is a :class:`Function` or :class:`CoeffSeries`.
    """
    shifts = tuple(as_fraction(c) for c in shifts)
    if len(shifts) != order + 1:
        raise LengthMismatch(f"need order + 1 = {order + 1} shifts, got {len(shifts)}")
    _check_distinct(shifts)
    source = _coeff_source(series)
    matrix = [[_power(c, k) for c in shifts] for k in range(order + 1)]
    return tuple(solve_rational(matrix, [source(k) for k in range(order + 1)]))


def build_plain(shifts, series, order: int, name: str | None = None) -> FractionMethod:
    shifts = tuple(as_fraction(c) for c in shifts)
    weights = solve_weights(shifts, series, order)
    function = _function_of(series)
    method = FractionMethod(
        name=name or f"frac{order}_{function}",
        shifts=shifts,
        weights=weights,
        order=order,
        function=function,
    )
    method.check_sum_rules(series)
    return method


def build_hybrid(
    shifts,
    free_weights: Mapping[int, object],
    series,
    order: int,
    name: str | None = None,
) -> FractionMethod:
    """Fraction method with a quadratic part d0 + d1 x + d2 x^2.

    The weights not fixed by ``free_weights`` (keys are 0-based indices into
    ``shifts``) solve sum_i b_i c_i^k = a_k for k = 3..order; the quadratic
    part then absorbs k = 0, 1, 2.
    """
    shifts = tuple(as_fraction(c) for c in shifts)
    _check_distinct(shifts)
    if any(c == 0 for c in shifts):
        raise InvalidShift("hybrid methods need nonzero shifts")
    free = {int(i): as_fraction(v) for i, v in free_weights.items()}
    if any(i < 0 or i >= len(shifts) for i in free):
        raise UnderDetermined("free weight index out of range")
    constrained = [i for i in range(len(shifts)) if i not in free]
    if order < 2 or len(constrained) != order - 2:
        raise UnderDetermined(
            f"order {order} needs {max(order - 2, 0)} constrained weights, "
            f"got {len(constrained)} ({len(shifts)} shifts, {len(free)} free)"
        )
    source = _coeff_source(series)
    ks = range(3, order + 1)
    matrix = [[_power(shifts[i], k) for i in constrained] for k in ks]
    rhs = [source(k) - sum((free[i] * _power(shifts[i], k) for i in free), Fraction(0)) for k in ks]
    weights = [Fraction(0)] * len(shifts)
    for i, v in zip(constrained, solve_rational(matrix, rhs) if constrained else []):
        weights[i] = v
    for i, v in free.items():
        weights[i] = v
    poly = tuple(
        source(k) - sum((b * _power(c, k) for b, c in zip(weights, shifts)), Fraction(0)) for k in range(3)
    )
    function = _function_of(series)
    method = FractionMethod(
        name=name or f"hybrid{order}_{function}",
        shifts=shifts,
        weights=tuple(weights),
        poly=poly,
        order=order,
        function=function,
    )
    method.check_sum_rules(series)
    return method


def to_residual_form(method: FractionMethod) -> FractionMethod:
    """Same approximant, evaluated as a0 + sum b_i c_i x / (1 - c_i x) (+ d1 x + d2 x^2)."""
    if method.is_residual:
        return method
    return dataclasses.replace(method, name=method.name + "'", form=RESIDUAL)


def taylor_expansion_of_method(method: FractionMethod, k_max: int) -> tuple:
    """Exact Taylor coefficients d_k + sum_i b_i c_i^k for k = 0..k_max."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    return tuple(method.taylor_coeff(k) for k in range(k_max + 1))


# Published coefficient sets.  Each entry is rebuilt from its shifts and
# compared; the rebuilt values win if the two disagree.
_F = Fraction
_PUBLISHED = {
    "R4": dict(
        weights=(_F(128, 3), _F(85, 3), _F(20, 9), _F(-515, 9), _F(-15)),
    ),
    "R4_phi1": dict(
        weights=(_F(71, 5), _F(117, 10), _F(7, 10), _F(-104, 5), _F(-24, 5)),
    ),
    "R5": dict(
        weights=(_F(-43, 12), _F(81, 32), _F(-704, 9), _F(23125, 48), _F(-810), _F(117649, 288)),
    ),
    "R8": dict(
        weights=(
            _F(-9979069, 32256),
            _F(-1995521, 254016),
            _F(-392009, 254016),
            _F(520866369, 802816),
            _F(48898161, 802816),
            _F(-26686735, 11907),
            _F(-3892615, 11907),
            _F(353067578125, 195084288),
            _F(71873828125, 195084288),
        ),
    ),
    "R10star": dict(
        weights=(
            _F(-2385751622325187262153, 1585084524134400000),
            _F(3752603696192081, 82668600000),
            _F(-87230538798639033213, 187904819200000),
            _F(14789110319838821875, 6934744793088),
            _F(-10558563753676365149296981, 2219118333788160000),
            _F(3520134037769971, 716800000),
            _F(-2263057299714115181019509, 1585084524134400000),
            _F(-2275831141003773874927, 3095868211200000),
            _F(-50000),
            _F(350000),
        ),
        # coefficients of 1, x, x^2 in that order
        poly=(
            _F(-34244933704346617, 14676708556800),
            _F(-18541933026870559, 428070666240000),
            _F(-6798371473106351, 15410543984640000),
        ),
    ),
    "R10": dict(
        weights=(
            _F(-57383239, 760320),
            _F(-115498838729, 239500800),
            _F(1648441938671875, 1255673954304),
            _F(56790060546875, 4227858432),
            _F(-1476772203681, 298188800),
            _F(-31012455666807, 656015360),
            _F(4891212112962371, 1295536619520),
            _F(171190903245297593, 3886609858560),
            _F(2000),
            _F(-3500),
        ),
        poly=(
            _F(-781562376863, 94371840),
            _F(-54849495983, 330301440),
            _F(-8034429391, 587202560),
        ),
    ),
}

CATALOG_NAMES = tuple(_PUBLISHED)


def _r10_shifts():
    out = []
    for i in range(1, 6):
        out += [_F(-1, 6 + 2 * i), _F(1, 6 + 2 * i)]
    return tuple(out)


def _rebuild(name: str) -> FractionMethod:
    if name == "R4":
        return build_plain(FRAC4_TEMPLATE.shifts(5), EXP, 4, name)
    if name == "R4_phi1":
        return build_plain(FRAC4_TEMPLATE.shifts(6), phi(1), 4, name)
    if name == "R5":
        return build_plain((_F(0),) + tuple(_F(1, i + 1) for i in range(2, 7)), EXP, 5, name)
    if name == "R8":
        return build_plain(FRAC8_TEMPLATE.shifts(5), EXP, 8, name)
    if name == "R10star":
        shifts = tuple(_F(1, 6 + i) for i in range(1, 11))
        return build_hybrid(shifts, {8: -50000, 9: 350000}, EXP, 10, name)
    return build_hybrid(_r10_shifts(), {8: 2000, 9: -3500}, EXP, 10, name)


@lru_cache(maxsize=None)
def _catalog_entry(name: str) -> FractionMethod:
    method = _rebuild(name)
    published = _PUBLISHED[name]
    notes = []
    for label, ours, theirs in (
        ("b", method.weights, published["weights"]),
        ("d", method.poly, published.get("poly", ())),
    ):
        for i, (x, y) in enumerate(zip(ours, theirs)):
            if x != y:
                notes.append(f"{name}: {label}[{i}] recomputed {x} differs from published {y}")
    return dataclasses.replace(method, discrepancies=tuple(notes))


def catalog(name: str) -> FractionMethod:
    """Return a published method by name; a trailing ``'`` selects the residual form."""
    base = name[:-1] if name.endswith("'") else name
    if base not in _PUBLISHED:
        raise UnknownMethod(f"unknown method {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    method = _catalog_entry(base)
    return to_residual_form(method) if name.endswith("'") else method


def optimize_alpha(template: MethodTemplate, series, order: int, tol: float, alpha_grid):
    """Grid scan for the alpha whose method has the largest theta at ``tol``.

    Ties go to the smaller alpha.  Returns ``(alpha, method)``.
    """
    from .errors import theta_info

    alphas = sorted(alpha_grid)
    if not alphas:
        raise ValidationError("alpha grid is empty")
    best = None
    for alpha in alphas:
        method = build_plain(template.shifts(alpha), series, order, f"{template.name}(alpha={alpha})")
        th = theta_info(method, _function_of(series), tol).value
        if best is None or th > best[0]:
            best = (th, alpha, method)
    return best[1], best[2]


# --- method cards -----------------------------------------------------------

def _dec(v: Fraction) -> str:
    return f"{float(v):.16e}"


def to_card(method: FractionMethod) -> str:
    """Plain-text description with exact ``num/den`` values and 17-digit decimals."""
    lines = [
        f"name: {method.name}",
        f"function: {method.function}",
        f"order: {method.order}",
        f"form: {method.form}",
        f"processors: {method.processors}",
        f"terms: {len(method.shifts)}",
    ]
    for i, (c, b) in enumerate(zip(method.shifts, method.weights), start=1):
        lines.append(f"c[{i}] = {c.numerator}/{c.denominator}  {_dec(c)}")
        lines.append(f"b[{i}] = {b.numerator}/{b.denominator}  {_dec(b)}")
    for k, d in enumerate(method.poly):
        lines.append(f"d[{k}] = {d.numerator}/{d.denominator}  {_dec(d)}")
    for note in method.discrepancies:
        lines.append(f"# discrepancy: {note}")
    return "\n".join(lines) + "\n"


_ENTRY = re.compile(r"^([cbd])\[(\d+)\]\s*=\s*(-?\d+/\d+)")


def from_card(text: str) -> FractionMethod:
    header, entries = {}, {"c": {}, "b": {}, "d": {}}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _ENTRY.match(line)
        if m:
            entries[m.group(1)][int(m.group(2))] = Fraction(m.group(3))
            continue
        key, _, value = line.partition(":")
        header[key.strip()] = value.strip()
    try:
        n = len(entries["c"])
        shifts = tuple(entries["c"][i] for i in range(1, n + 1))
        weights = tuple(entries["b"][i] for i in range(1, n + 1))
        poly = tuple(entries["d"][k] for k in range(len(entries["d"])))
        return FractionMethod(
            name=header["name"],
            shifts=shifts,
            weights=weights,
            poly=poly,
            order=int(header["order"]),
            function=parse_function(header.get("function", "exp")),
            form=header.get("form", PLAIN),
        )
    except KeyError as exc:
        raise ValidationError(f"incomplete method card: missing {exc}") from None
