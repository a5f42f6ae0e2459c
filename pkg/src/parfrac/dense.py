"""Dense-matrix evaluators.

Fraction methods need one shifted inverse (I - c_i B)^-1 per nonzero shift.
The inverses are independent and run on a thread pool; the weighted sum is
always accumulated in ascending shift index followed by the polynomial part,
so the result does not depend on the number of workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .baselines import PADE10_COEFFS, RationalBaseline
from .exceptions import SingularShift, ValidationError
from .methods import PLAIN, RESIDUAL, FractionMethod

__all__ = [
    "EvalOptions",
    "as_matrix",
    "solve_shifted",
    "eval_dense",
    "pade4",
    "pade4_phi1",
    "taylor8",
    "taylor_dense",
    "pade10",
    "evaluate_dense",
    "PIVOT_THRESHOLD",
]

PIVOT_THRESHOLD = 1e-14


@dataclass(frozen=True)
class EvalOptions:
    """Evaluation controls.

    ``form`` overrides the method's own plain/residual tag when given.
    Accumulation order is always fixed, whatever ``workers`` is.
    """

    workers: int = 1
    form: Optional[str] = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValidationError("workers must be positive")
        if self.form not in (None, PLAIN, RESIDUAL):
            raise ValidationError(f"unknown form {self.form!r}")


def as_matrix(B) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError("matrix must be square")
    if not np.all(np.isfinite(B)):
        raise ValidationError("matrix has non-finite entries")
    return B


def _lu_solve(M, rhs, shift=None, what="shifted system"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    worst = float(pivots.min()) if pivots.size else 1.0
    if not worst > PIVOT_THRESHOLD * scale:
        raise SingularShift(f"{what} is numerically singular (pivot {worst:.3e})", shift=shift, pivot=worst)
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def solve_shifted(B, c: float, rhs=None) -> np.ndarray:
    """(I - c B)^-1 rhs by LU with partial pivoting; ``rhs`` defaults to I."""
    B = as_matrix(B)
    n = B.shape[0]
    eye = np.eye(n)
    M = eye - c * B
    return _lu_solve(M, eye if rhs is None else rhs, shift=c, what=f"I - ({c!r}) B")


def _poly_part(B, B2, d1, d2, d0):
    n = B.shape[0]
    out = d0 * np.eye(n)
    if d1:
        out = out + d1 * B
    if d2:
        out = out + d2 * B2
    return out


def eval_dense(method: FractionMethod, B, opts: EvalOptions | None = None) -> np.ndarray:
    """r(B) for a fraction method, one independent solve per nonzero shift."""
    opts = opts or EvalOptions()
    B = as_matrix(B)
    n = B.shape[0]
    form = opts.form or method.form
    shifts = [float(c) for c in method.shifts]
    weights = [float(b) for b in method.weights]
    rhs = None if form == PLAIN else B

    def term(i):
        c = shifts[i]
        if c == 0.0:
            return None
        return solve_shifted(B, c, None if rhs is None else c * rhs)

    if opts.workers == 1:
        terms = [term(i) for i in range(len(shifts))]
    else:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            terms = list(pool.map(term, range(len(shifts))))

    result = np.zeros((n, n))
    for b, c, X in zip(weights, shifts, terms):
        if X is None:
            if form == PLAIN:
                result = result + b * np.eye(n)
            continue
        result = result + b * X
    d1, d2 = float(method.poly_coeff(1)), float(method.poly_coeff(2))
    B2 = B @ B if d2 else None
    d0 = float(method.poly_coeff(0)) if form == PLAIN else float(method.constant)
    return result + _poly_part(B, B2, d1, d2, d0)


def pade4(B) -> np.ndarray:
    """(1 + x/2 + x^2/12) / (1 - x/2 + x^2/12): one product, one solve."""
    B = as_matrix(B)
    I = np.eye(B.shape[0])
    B2 = B @ B
    return _lu_solve(I - B / 2 + B2 / 12, I + B / 2 + B2 / 12, what="Pade-4 denominator")


def pade4_phi1(B) -> np.ndarray:
    """(1 + x/10 + x^2/60) / (1 - 2x/5 + x^2/20), 4th order for phi1."""
    B = as_matrix(B)
    I = np.eye(B.shape[0])
    B2 = B @ B
    return _lu_solve(I - 0.4 * B + B2 / 20, I + B / 10 + B2 / 60, what="Pade-4 phi1 denominator")


_S = math.sqrt(177.0)
_X3 = 2.0 / 3.0
_X1 = _X3 * (1 + _S) / 88
_X2 = (1 + _S) / 352 * _X3
_X4 = (-271 + 29 * _S) / (315 * _X3)
_X5 = 11 * (-1 + _S) / (1260 * _X3)
_X6 = 11 * (-9 + _S) / (5040 * _X3)
_X7 = (89 - _S) / (5040 * _X3**2)
_Y2 = (857 - 58 * _S) / 630
TAYLOR8_CONSTANTS = dict(x1=_X1, x2=_X2, x3=_X3, x4=_X4, x5=_X5, x6=_X6, x7=_X7, y0=1.0, y1=1.0, y2=_Y2)


def taylor8(B) -> np.ndarray:
    """Degree-8 Taylor polynomial of exp with three matrix products."""
    B = as_matrix(B)
    I = np.eye(B.shape[0])
    B2 = B @ B
    B4 = B2 @ (_X1 * B + _X2 * B2)
    B8 = (_X3 * B2 + B4) @ (_X4 * I + _X5 * B + _X6 * B2 + _X7 * B4)
    return I + B + _Y2 * B2 + B8


def taylor_dense(m: int, B) -> np.ndarray:
    """Plain Horner evaluation of sum_{k<=m} B^k / k!."""
    B = as_matrix(B)
    I = np.eye(B.shape[0])
    out = I.copy()
    for k in range(m, 0, -1):
        out = I + (B @ out) / k
    return out


def pade10(B) -> np.ndarray:
    """Diagonal (5,5) Pade approximant: three products and one solve."""
    B = as_matrix(B)
    b0, b1, b2, b3, b4, b5 = (float(v) for v in PADE10_COEFFS)
    I = np.eye(B.shape[0])
    A2 = B @ B
    A4 = A2 @ A2
    u = B @ (b5 * A4 + b3 * A2 + b1 * I)
    v = b4 * A4 + b2 * A2 + b0 * I
    return _lu_solve(v - u, u + v, what="Pade-10 denominator")


_BASELINE_DENSE = {"pade4": pade4, "pade4_phi1": pade4_phi1, "pade10": pade10, "taylor8": taylor8}


def evaluate_dense(approx, B, opts: EvalOptions | None = None) -> np.ndarray:
    """Dispatch a fraction method or a named serial baseline on a dense matrix."""
    if isinstance(approx, FractionMethod):
        return eval_dense(approx, B, opts)
    if isinstance(approx, RationalBaseline):
        fn = _BASELINE_DENSE.get(approx.name)
        if fn is not None:
            return fn(B)
        if approx.name.startswith("taylor"):
            return taylor_dense(approx.order, B)
    raise ValidationError(f"no dense evaluator for {getattr(approx, 'name', approx)!r}")
