"""Benchmark experiments: matrix generators, seeded RNG and error sweeps.

Random numbers come from numpy's PCG64 bit generator (64-bit output,
128-bit state) seeded with the user's seed; normal variates are produced by
the Box-Muller transform on its uniform doubles so the stream is fully
specified here rather than by numpy's ziggurat.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .action import FractionAction, TridiagMatrix, method_cost, taylor_action
from .baselines import RationalBaseline, resolve
from .dense import EvalOptions, evaluate_dense
from .exceptions import ValidationError
from .methods import FractionMethod
from .oracle import action_oracle, error_2norm, expm_oracle, phi1_oracle
from .series import EXP, phi

__all__ = [
    "box_muller_normals",
    "MatrixSpec",
    "make_matrix",
    "random_unit_vector",
    "default_h_grid",
    "BenchRecord",
    "dense_cost",
    "bench_dense",
    "bench_action",
    "ORACLE_DIGITS",
]

ORACLE_DIGITS = 40
MATRIX_KINDS = ("randn", "cauchy", "trid121")


def box_muller_normals(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """n standard normal variates from PCG64(seed) via Box-Muller.

    ``stream`` selects an independent substream (PCG64 jumped ``stream``
    times), so a matrix and a vector drawn with the same seed don't overlap.
    """
    bitgen = np.random.PCG64(seed)
    if stream:
        bitgen = bitgen.jumped(stream)
    gen = np.random.Generator(bitgen)
    pairs = (n + 1) // 2
    u = gen.random((pairs, 2))
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    t = 2.0 * np.pi * u[:, 1]
    return np.column_stack((r * np.cos(t), r * np.sin(t))).ravel()[:n]


@dataclass(frozen=True)
class MatrixSpec:
    kind: str
    dim: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MATRIX_KINDS:
            raise ValidationError(f"matrix kind must be one of {', '.join(MATRIX_KINDS)}")
        if self.dim < 1:
            raise ValidationError("dimension must be positive")


def make_matrix(spec: MatrixSpec):
    """Dense array for ``randn`` and ``cauchy``, :class:`TridiagMatrix` for ``trid121``."""
    d = spec.dim
    if spec.kind == "randn":
        return box_muller_normals(spec.seed, d * d).reshape(d, d)
    if spec.kind == "cauchy":
        i = np.arange(d)
        return 1.0 / (1.0 + (i[:, None] - i[None, :]) ** 2.0)
    return TridiagMatrix.constant(d, -1.0, 2.0, -1.0)


def random_unit_vector(seed: int, d: int) -> np.ndarray:
    w = box_muller_normals(seed, d, stream=1)
    return w / np.linalg.norm(w)


def default_h_grid(n: int = 40, lo: float = 1e-2, hi: float = 4.0) -> list:
    """Values of h * ||A||_2, log-spaced."""
    if n == 0:
        return []
    return list(np.logspace(np.log10(lo), np.log10(hi), n))


@dataclass(frozen=True)
class BenchRecord:
    method: str
    h_norm: float
    error: float
    serial_cost: Fraction
    parallel_cost: Fraction


# dense inverse or solve with a full right-hand side, in matrix products
_INVERSE = Fraction(4, 3)


def dense_cost(approx):
    """(parallel, serial) cost in matrix-product equivalents."""
    if isinstance(approx, FractionMethod):
        loads = [_INVERSE for c in approx.shifts if c != 0]
        if approx.poly_coeff(2):
            loads.append(Fraction(1))
        if not loads:
            return Fraction(0), Fraction(0)
        return max(loads), sum(loads)
    name = approx.name
    fixed = {
        "pade4": 1 + _INVERSE,
        "pade4_phi1": 1 + _INVERSE,
        "taylor8": Fraction(3),
        "pade10": 3 + _INVERSE,
    }
    if name in fixed:
        cost = fixed[name]
    elif name.startswith("taylor"):
        cost = Fraction(approx.order - 1)
    else:
        raise ValidationError(f"no dense cost for {name}")
    return cost, cost


def _resolve_all(names):
    out = []
    for name in names:
        approx = resolve(name)
        if approx.function not in (EXP, phi(1)):
            raise ValidationError(f"{name} approximates {approx.function}; benchmarks cover exp and phi1")
        out.append((name, approx))
    return out


def _grid_map(fn, items, workers):
    # results come back in grid order whatever the pool does
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def bench_dense(spec: MatrixSpec, methods, h_norms=None, workers: int = 1, digits: int = ORACLE_DIGITS) -> list:
    """Two-norm error of each method on exp(hA) (or phi1(hA)) over a grid of h ||A||_2."""
    if workers < 1:
        raise ValidationError("workers must be positive")
    A = make_matrix(spec)
    if isinstance(A, TridiagMatrix):
        A = A.to_dense()
    grid = default_h_grid() if h_norms is None else [float(t) for t in h_norms]
    if any(not t > 0 for t in grid):
        raise ValidationError("h grid values must be positive")
    approxs = _resolve_all(methods)
    norm2 = float(np.linalg.norm(A, 2))
    costs = {name: dense_cost(a) for name, a in approxs}
    need_phi1 = any(a.function == phi(1) for _, a in approxs)
    need_exp = any(a.function == EXP for _, a in approxs)

    def point(t):
        h = t / norm2 if norm2 > 0 else t
        B = h * A
        refs = {}
        if need_exp:
            refs[EXP] = expm_oracle(B, digits)
        if need_phi1:
            refs[phi(1)] = phi1_oracle(B, digits)
        rows = []
        for name, approx in approxs:
            err = error_2norm(refs[approx.function], evaluate_dense(approx, B, EvalOptions()))
            par, ser = costs[name]
            rows.append(BenchRecord(name, t, err, ser, par))
        return rows

    return [rec for rows in _grid_map(point, grid, workers) for rec in rows]


def bench_action(spec: MatrixSpec, methods, h_norms=None, workers: int = 1, digits: int = ORACLE_DIGITS) -> list:
    """Two-norm error of exp(hA) v for a tridiagonal A and a random unit vector v."""
    if workers < 1:
        raise ValidationError("workers must be positive")
    if spec.kind != "trid121":
        raise ValidationError("action benchmarks need a tridiagonal matrix (trid121)")
    A = make_matrix(spec)
    v = random_unit_vector(spec.seed, spec.dim)
    grid = default_h_grid() if h_norms is None else [float(t) for t in h_norms]
    if any(not t > 0 for t in grid):
        raise ValidationError("h grid values must be positive")
    approxs = _resolve_all(methods)
    for name, approx in approxs:
        if approx.function != EXP:
            raise ValidationError(f"{name}: action benchmarks compute exp(hA) v")
        if isinstance(approx, RationalBaseline) and not approx.name.startswith("taylor"):
            raise ValidationError(f"{name}: only Taylor baselines act on vectors")
    norm2 = A.norm2()

    def cost(approx):
        if isinstance(approx, FractionMethod):
            return method_cost(approx)
        return Fraction(approx.order), Fraction(approx.order)

    costs = {name: cost(a) for name, a in approxs}

    def point(t):
        Ah = A.scaled(t / norm2)
        ref = action_oracle(Ah, v, digits)
        rows = []
        for name, approx in approxs:
            if isinstance(approx, FractionMethod):
                y = FractionAction(approx, Ah).apply(v)
            else:
                y = taylor_action(approx.order, Ah, v)
            par, ser = costs[name]
            rows.append(BenchRecord(name, t, error_2norm(ref, y), ser, par))
        return rows

    return [rec for rows in _grid_map(point, grid, workers) for rec in rows]
