"""f(A) v for tridiagonal and banded A through shifted banded solves.

Each fraction term needs one solve with I - c_i A, which stays banded.
Factorizations are computed once per shift and reused for every vector
(and every substep).  Costs follow the flop model used for the tables:
a tridiagonal matvec is 5d flops and a solve 8d (pentadiagonal: 9d / 15d).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dense import EvalOptions
from .errors import theta_info
from .exceptions import ValidationError, ZeroPivot
from .methods import PLAIN, RESIDUAL, FractionMethod, catalog
from .series import EXP

__all__ = [
    "TridiagMatrix",
    "BandedMatrix",
    "ThomasFactorization",
    "BandedLU",
    "thomas_solve",
    "banded_solve",
    "FractionAction",
    "action_eval",
    "substep_action",
    "taylor_action",
    "CostModel",
    "TRIDIAGONAL",
    "PENTADIAGONAL",
    "method_cost",
    "SelectionPlan",
    "select_method",
    "expm_action",
    "CostRow",
    "cost_curve",
    "taylor_degree_for",
    "ZERO_PIVOT",
]

ZERO_PIVOT = 1e-300


def _vector(v, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValidationError(f"vector must have shape ({n},), got {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class TridiagMatrix:
    """Compact tridiagonal matrix: ``sub`` (d-1), ``main`` (d), ``sup`` (d-1)."""

    sub: np.ndarray
    main: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        main = np.asarray(self.main, dtype=float)
        sub = np.asarray(self.sub, dtype=float)
        sup = np.asarray(self.sup, dtype=float)
        n = main.shape[0]
        if main.ndim != 1 or sub.shape != (max(n - 1, 0),) or sup.shape != (max(n - 1, 0),):
            raise ValidationError("diagonals must have lengths d-1, d, d-1")
        for arr in (sub, main, sup):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("tridiagonal matrix has non-finite entries")
        object.__setattr__(self, "main", main)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "sup", sup)

    @classmethod
    def constant(cls, d: int, lower: float, diag: float, upper: float) -> "TridiagMatrix":
        """trid{lower, diag, upper} of dimension d."""
        return cls(np.full(d - 1, lower), np.full(d, diag), np.full(d - 1, upper))

    @classmethod
    def from_dense(cls, A) -> "TridiagMatrix":
        A = np.asarray(A, dtype=float)
        return cls(np.diagonal(A, -1).copy(), np.diagonal(A).copy(), np.diagonal(A, 1).copy())

    @property
    def dim(self) -> int:
        return self.main.shape[0]

    def bands(self) -> dict:
        out = {0: self.main}
        if self.dim > 1:
            out[-1] = self.sub
            out[1] = self.sup
        return out

    def matvec(self, v) -> np.ndarray:
        v = _vector(v, self.dim)
        y = self.main * v
        y[1:] += self.sub * v[:-1]
        y[:-1] += self.sup * v[1:]
        return y

    def to_dense(self) -> np.ndarray:
        return np.diag(self.main) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def scaled(self, h: float) -> "TridiagMatrix":
        return TridiagMatrix(h * self.sub, h * self.main, h * self.sup)

    def shifted(self, c: float) -> "TridiagMatrix":
        """I - c A."""
        return TridiagMatrix(-c * self.sub, 1.0 - c * self.main, -c * self.sup)

    def norm1(self) -> float:
        col = np.abs(self.main).copy()
        col[:-1] += np.abs(self.sub)
        col[1:] += np.abs(self.sup)
        return float(col.max()) if self.dim else 0.0

    def norm2(self) -> float:
        import scipy.linalg

        if np.array_equal(self.sub, self.sup):
            ev = scipy.linalg.eigvalsh_tridiagonal(self.main, self.sub)
            return float(np.max(np.abs(ev)))
        return float(np.linalg.norm(self.to_dense(), 2))

    def factor_shifted(self, c: float) -> "ThomasFactorization":
        return ThomasFactorization(self.shifted(c), shift=c)


class ThomasFactorization:
    """LU factors of a tridiagonal matrix without pivoting (Thomas algorithm).

    Factoring costs 3d flops and each solve 5d, the 8d of a one-shot solve.
    """

    def __init__(self, T: TridiagMatrix, shift=None):
        n = T.dim
        a = T.sub.tolist()
        b = T.main.tolist()
        self._sup = T.sup.tolist()
        piv = [0.0] * n
        mult = [0.0] * n
        if n:
            piv[0] = b[0]
            _check_pivot(piv[0], 0, shift)
        for i in range(1, n):
            m = a[i - 1] / piv[i - 1]
            mult[i] = m
            piv[i] = b[i] - m * self._sup[i - 1]
            _check_pivot(piv[i], i, shift)
        self.n = n
        self._piv = piv
        self._mult = mult

    def solve(self, v) -> np.ndarray:
        y = _vector(v, self.n).tolist()
        mult, piv, sup = self._mult, self._piv, self._sup
        for i in range(1, self.n):
            y[i] -= mult[i] * y[i - 1]
        x = y
        if self.n:
            x[-1] = y[-1] / piv[-1]
        for i in range(self.n - 2, -1, -1):
            x[i] = (y[i] - sup[i] * x[i + 1]) / piv[i]
        return np.array(x)


def _check_pivot(p, i, shift):
    if not abs(p) > ZERO_PIVOT:
        where = "" if shift is None else f" for shift {shift!r}"
        raise ZeroPivot(f"zero pivot at row {i}{where}", index=i, shift=shift)


def thomas_solve(T: TridiagMatrix, v) -> np.ndarray:
    """Solve T x = v by forward elimination and back substitution."""
    return ThomasFactorization(T).solve(v)


@dataclass(frozen=True, eq=False)
class BandedMatrix:
    """Square band matrix given by ``diagonals[k]`` for offsets k in [-lower, upper]."""

    diagonals: dict

    def __post_init__(self):
        if 0 not in self.diagonals:
            raise ValidationError("main diagonal is required")
        n = len(self.diagonals[0])
        clean = {}
        for k, d in self.diagonals.items():
            d = np.asarray(d, dtype=float)
            if d.shape != (n - abs(k),):
                raise ValidationError(f"diagonal {k} must have length {n - abs(k)}")
            if not np.all(np.isfinite(d)):
                raise ValidationError("banded matrix has non-finite entries")
            clean[int(k)] = d
        object.__setattr__(self, "diagonals", clean)

    @classmethod
    def from_dense(cls, A, lower: int, upper: int) -> "BandedMatrix":
        A = np.asarray(A, dtype=float)
        return cls({k: np.diagonal(A, k).copy() for k in range(-lower, upper + 1)})

    @classmethod
    def constant(cls, d: int, values: dict) -> "BandedMatrix":
        return cls({k: np.full(d - abs(k), v) for k, v in values.items()})

    @property
    def dim(self) -> int:
        return len(self.diagonals[0])

    @property
    def lower(self) -> int:
        return max(0, -min(self.diagonals))

    @property
    def upper(self) -> int:
        return max(0, max(self.diagonals))

    def bands(self) -> dict:
        return dict(self.diagonals)

    def matvec(self, v) -> np.ndarray:
        v = _vector(v, self.dim)
        n = self.dim
        y = np.zeros(n)
        for k, d in self.diagonals.items():
            if k >= 0:
                y[: n - k] += d * v[k:]
            else:
                y[-k:] += d * v[: n + k]
        return y

    def to_dense(self) -> np.ndarray:
        return sum(np.diag(d, k) for k, d in self.diagonals.items())

    def scaled(self, h: float) -> "BandedMatrix":
        return BandedMatrix({k: h * d for k, d in self.diagonals.items()})

    def shifted(self, c: float) -> "BandedMatrix":
        out = {k: -c * d for k, d in self.diagonals.items()}
        out[0] = 1.0 - c * self.diagonals[0]
        return BandedMatrix(out)

    def norm1(self) -> float:
        return float(np.abs(self.to_dense()).sum(axis=0).max()) if self.dim else 0.0

    def norm2(self) -> float:
        return float(np.linalg.norm(self.to_dense(), 2))

    def factor_shifted(self, c: float) -> "BandedLU":
        return BandedLU(self.shifted(c), shift=c)


class BandedLU:
    """Band LU without pivoting; fill-in stays inside the band.

    Stable for diagonally dominant matrices, which covers I - cA whenever
    |c| ||A||_inf < 1.
    """

    def __init__(self, M: BandedMatrix, shift=None):
        n, l, u = M.dim, M.lower, M.upper
        width = l + u + 1
        # rows[i][l + j - i] holds entry (i, j)
        rows = [[0.0] * width for _ in range(n)]
        for k, d in M.diagonals.items():
            for t, val in enumerate(d.tolist()):
                i = t - k if k < 0 else t
                rows[i][l + k] = val
        for j in range(n):
            piv = rows[j][l]
            _check_pivot(piv, j, shift)
            pivot_row = rows[j]
            for i in range(j + 1, min(n, j + l + 1)):
                row = rows[i]
                f = row[l + j - i] / piv
                row[l + j - i] = f
                for k in range(1, u + 1):
                    if j + k < n:
                        row[l + j + k - i] -= f * pivot_row[l + k]
        self.n, self.l, self.u = n, l, u
        self._rows = rows

    def solve(self, v) -> np.ndarray:
        n, l, u, rows = self.n, self.l, self.u, self._rows
        y = _vector(v, n).tolist()
        for i in range(n):
            row = rows[i]
            for j in range(max(0, i - l), i):
                y[i] -= row[l + j - i] * y[j]
        for i in range(n - 1, -1, -1):
            row = rows[i]
            acc = y[i]
            for k in range(1, u + 1):
                if i + k < n:
                    acc -= row[l + k] * y[i + k]
            y[i] = acc / row[l]
        return np.array(y)


def banded_solve(M: BandedMatrix, v) -> np.ndarray:
    return BandedLU(M).solve(v)


def _matrix_of(A):
    if isinstance(A, (TridiagMatrix, BandedMatrix)):
        return A
    raise ValidationError("A must be a TridiagMatrix or BandedMatrix")


class FractionAction:
    """A fraction method bound to one banded matrix, ready to act on vectors.

    The shifted factorizations are built once (concurrently when
    ``workers > 1``) and are read-only afterwards.
    """

    def __init__(self, method: FractionMethod, A, opts: EvalOptions | None = None):
        self.method = method
        self.A = _matrix_of(A)
        self.opts = opts or EvalOptions()
        self.form = self.opts.form or method.form
        self.shifts = [float(c) for c in method.shifts]
        self.weights = [float(b) for b in method.weights]
        self._factors = self._map(
            lambda c: None if c == 0.0 else self.A.factor_shifted(c), self.shifts
        )

    def _map(self, fn, items):
        if self.opts.workers == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.opts.workers) as pool:
            return list(pool.map(fn, items))

    def apply(self, v) -> np.ndarray:
        A, m = self.A, self.method
        v = _vector(v, A.dim)
        d1, d2 = float(m.poly_coeff(1)), float(m.poly_coeff(2))
        Av = A.matvec(v) if (self.form == RESIDUAL or d1 or d2) else None

        if self.form == PLAIN:
            def term(i):
                f = self._factors[i]
                return v if f is None else f.solve(v)
        else:
            def term(i):
                f = self._factors[i]
                return None if f is None else f.solve(self.shifts[i] * Av)

        terms = self._map(term, range(len(self.shifts)))
        out = np.zeros(A.dim)
        for b, t in zip(self.weights, terms):
            if t is not None:
                out = out + b * t
        d0 = float(m.poly_coeff(0)) if self.form == PLAIN else float(m.constant)
        out = out + d0 * v
        if d1:
            out = out + d1 * Av
        if d2:
            out = out + d2 * A.matvec(Av)
        return out


def action_eval(method: FractionMethod, A, v, opts: EvalOptions | None = None) -> np.ndarray:
    """r(A) v using one banded solve per nonzero shift."""
    return FractionAction(method, A, opts).apply(v)


def substep_action(method: FractionMethod, A, v, steps: int, opts: EvalOptions | None = None) -> np.ndarray:
    """v_n = r(A/N) v_{n-1}, n = 1..N, factorizing once."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    A = _matrix_of(A)
    plan = FractionAction(method, A.scaled(1.0 / steps) if steps > 1 else A, opts)
    x = np.asarray(v, dtype=float)
    for _ in range(steps):
        x = plan.apply(x)
    return x


def taylor_action(m: int, A, v) -> np.ndarray:
    """sum_{k<=m} A^k v / k! with m matvecs."""
    if m < 1:
        raise ValidationError("Taylor degree must be >= 1")
    A = _matrix_of(A)
    w = _vector(v, A.dim).copy()
    out = w.copy()
    for k in range(1, m + 1):
        w = A.matvec(w) / k
        out = out + w
    return out


@dataclass(frozen=True)
class CostModel:
    """Flops per unit dimension for one matvec and one shifted solve."""

    name: str
    matvec_flops: int
    solve_flops: int


TRIDIAGONAL = CostModel("tridiagonal", 5, 8)
PENTADIAGONAL = CostModel("pentadiagonal", 9, 15)


def method_cost(method: FractionMethod, model: CostModel = TRIDIAGONAL, form: str | None = None):
    """(parallel, serial) cost of one application in matvec-equivalents.

    Every nonzero shift is one processor doing a solve (plus a matvec in the
    residual form); the quadratic part is one processor doing up to two
    matvecs.  Serial cost adds them up, parallel cost takes the slowest.
    The final linear combination is not counted.
    """
    form = form or method.form
    per_solve = model.solve_flops + (model.matvec_flops if form == RESIDUAL else 0)
    loads = [per_solve for c in method.shifts if c != 0]
    if method.poly_degree:
        loads.append(model.matvec_flops * method.poly_degree)
    if not loads:
        return Fraction(0), Fraction(0)
    unit = model.matvec_flops
    return Fraction(max(loads), unit), Fraction(sum(loads), unit)


@dataclass(frozen=True)
class SelectionPlan:
    method: str
    substeps: int
    serial_cost: Fraction
    parallel_cost: Fraction
    theta: float
    extended: bool = False  # substepping beyond the tabulated range


def _theta(name, tol):
    return theta_info(catalog(name), EXP, tol).value


def select_method(norm: float, tol: float = 2.0**-24, model: CostModel = TRIDIAGONAL, low_roundoff: bool = False) -> SelectionPlan:
    """Cheapest fraction scheme whose forward bound meets ``tol`` at ``norm``.

    R5 when norm <= theta_5, else the 10th-order scheme (R10star, or R10
    with ``low_roundoff``), substepping uniformly past its theta.
    """
    if norm < 0 or not tol > 0:
        raise ValidationError("norm must be >= 0 and tol > 0")
    high = "R10" if low_roundoff else "R10star"
    th5, th10 = _theta("R5", tol), _theta(high, tol)
    if norm <= th5:
        name, steps, th = "R5", 1, th5
    elif norm <= th10:
        name, steps, th = high, 1, th10
    else:
        name, steps, th = high, math.ceil(norm / th10), th10
    par, ser = method_cost(catalog(name), model)
    return SelectionPlan(name, steps, ser * steps, par * steps, th, extended=steps > 1)


def expm_action(A, v, tol: float = 2.0**-24, opts: EvalOptions | None = None, low_roundoff: bool = False):
    """exp(A) v with the method picked by :func:`select_method` from ||A||_1."""
    A = _matrix_of(A)
    plan = select_method(A.norm1(), tol, low_roundoff=low_roundoff)
    return substep_action(catalog(plan.method), A, v, plan.substeps, opts), plan


TAYLOR_DEGREES = (5, 10, 15)


def _taylor_theta(m, tol):
    from .baselines import taylor

    return theta_info(taylor(m), EXP, tol).value


def taylor_degree_for(norm: float, tol: float = 2.0**-24):
    """(degree, substeps) for the lowest Taylor degree in 5, 10, 15 that meets ``tol``."""
    for m in TAYLOR_DEGREES:
        if norm <= _taylor_theta(m, tol):
            return m, 1
    top = TAYLOR_DEGREES[-1]
    return top, math.ceil(norm / _taylor_theta(top, tol))


@dataclass(frozen=True)
class CostRow:
    norm: float
    taylor_cost: Fraction
    frac_serial_cost: Fraction
    frac_parallel_cost: Fraction


def cost_curve(norm_grid, tol: float = 2.0**-24, model: CostModel = TRIDIAGONAL) -> list:
    """Cost in matvec-equivalents of the Taylor selector and the fraction selector."""
    rows = []
    for norm in norm_grid:
        m, steps = taylor_degree_for(norm, tol)
        plan = select_method(norm, tol, model)
        rows.append(CostRow(float(norm), Fraction(m * steps), plan.serial_cost, plan.parallel_cost))
    return rows
