"""High-precision reference values for exp(B), phi1(B) and exp(A) v.

Dense references use scaling and squaring of a long Taylor series on
multiprecision ball matrices (python-flint ``arb_mat``).  The action
reference works on banded matrices with fixed-point Python integers, doing
substeps of a Taylor series; no squaring is possible there.

Results are numpy object arrays of :class:`mpmath.mpf`.  Use
:func:`to_float` or :func:`error_2norm` to compare against double-precision
output.
"""

from __future__ import annotations

import math
import threading

import flint
import mpmath
import numpy as np

from .exceptions import ValidationError

__all__ = [
    "expm_oracle",
    "phi1_oracle",
    "action_oracle",
    "to_float",
    "error_2norm",
    "bits_for",
]

# flint's working precision is process-global
_FLINT_LOCK = threading.Lock()


def bits_for(digits: int) -> int:
    return int(math.ceil(digits * math.log2(10))) + 64


def _check_digits(digits):
    if digits < 30:
        raise ValidationError("oracle precision must be at least 30 digits")


def _to_arb(B: np.ndarray) -> "flint.arb_mat":
    n = B.shape[0]
    return flint.arb_mat(n, n, [flint.arb(float(x)) for x in B.ravel()])


def _from_arb(M, n, digits) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    with mpmath.workdps(digits + 10):
        for idx, e in enumerate(M.entries()):
            man, exp = e.mid().man_exp()
            out.flat[idx] = mpmath.ldexp(mpmath.mpf(int(man)), int(exp))
    return out


def _scaled_taylor(B, digits, want_phi1):
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError("matrix must be square")
    _check_digits(digits)
    n = B.shape[0]
    norm = float(np.abs(B).sum(axis=0).max()) if n else 0.0
    squarings = max(0, math.ceil(math.log2(norm / 0.25))) if norm > 0.25 else 0
    # (1/4)^K / K! below 10^-(digits + 10) relative
    K = 1
    while K * math.log10(4) + math.lgamma(K + 1) / math.log(10) < digits + 10:
        K += 1
    with _FLINT_LOCK:
        old = flint.ctx.prec
        flint.ctx.prec = bits_for(digits) + 4 * squarings
        try:
            X = _to_arb(B) * flint.arb(2) ** (-squarings)
            I = flint.arb_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])
            # Horner: E = I + X/1 (I + X/2 (I + ...)), P = sum X^k/(k+1)!
            E = I
            for k in range(K, 0, -1):
                E = I + (X * E) * (flint.arb(1) / k)
            P = None
            if want_phi1:
                P = I
                for k in range(K, 0, -1):
                    P = I + (X * P) * (flint.arb(1) / (k + 1))
            for _ in range(squarings):
                if want_phi1:
                    P = ((E + I) * P) * flint.arb(0.5)
                E = E * E
            E_mp = _from_arb(E, n, digits)
            P_mp = _from_arb(P, n, digits) if want_phi1 else None
        finally:
            flint.ctx.prec = old
    return E_mp, P_mp


def expm_oracle(B, digits: int = 40) -> np.ndarray:
    """exp(B) to about ``digits`` significant digits."""
    return _scaled_taylor(B, digits, False)[0]


def phi1_oracle(B, digits: int = 40) -> np.ndarray:
    """phi1(B) = sum_k B^k / (k+1)! via phi1(2X) = (exp(X) + I) phi1(X) / 2."""
    return _scaled_taylor(B, digits, True)[1]


def _bands_of(A):
    if hasattr(A, "bands"):
        return A.bands()
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("matrix must be square")
    n = A.shape[0]
    return {k: np.diagonal(A, k).copy() for k in range(-(n - 1), n) if np.any(np.diagonal(A, k))}


def _fixed(values, P):
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        num, den = float(v).as_integer_ratio()
        out[i] = (num << P) // den
    return out


def _div_toward_zero(x, m):
    # floor division would leave -1 residues that never underflow
    return np.where(x < 0, -((-x) // m), x // m)


def action_oracle(A, v, digits: int = 40) -> np.ndarray:
    """exp(A) v in fixed-point arithmetic with 2^-bits resolution.

    ``A`` is a banded matrix object (anything with ``bands()``) or a dense
    array.  The Taylor series is applied over N substeps with
    ||A/N||_1 <= 1, each truncated once its terms underflow.
    """
    _check_digits(digits)
    bands = _bands_of(A)
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    P = bits_for(digits)
    norm = 0.0
    col = np.zeros(n)
    for k, diag in bands.items():
        idx = np.arange(len(diag)) + max(k, 0)  # column index of each band entry
        np.add.at(col, idx, np.abs(diag))
    norm = float(col.max()) if n else 0.0
    steps = max(1, math.ceil(norm))
    fixed_bands = {k: _fixed(d, P) for k, d in bands.items()}

    def matvec(x):
        y = np.zeros(n, dtype=object)
        for k, d in fixed_bands.items():
            if k >= 0:
                y[: n - k] += (d * x[k:]) >> P
            else:
                y[-k:] += (d * x[: n + k]) >> P
        return y

    x = _fixed(v, P)
    for _ in range(steps):
        term = x
        total = x.copy()
        k = 1
        while True:
            term = _div_toward_zero(matvec(term), k * steps)
            if not any(term):
                break
            total = total + term
            k += 1
        x = total
    with mpmath.workdps(digits + 10):
        return np.array([mpmath.ldexp(mpmath.mpf(int(t)), -P) for t in x], dtype=object)


def to_float(M) -> np.ndarray:
    return np.vectorize(float, otypes=[float])(M)


def error_2norm(reference, approx) -> float:
    """||reference - approx||_2 with the difference formed in high precision."""
    approx = np.asarray(approx, dtype=float)
    diff = np.empty(approx.shape, dtype=float)
    ref_flat = reference.ravel()
    flat = diff.ravel()
    for i, a in enumerate(approx.ravel()):
        flat[i] = float(ref_flat[i] - mpmath.mpf(a))
    if diff.ndim == 1:
        return float(np.linalg.norm(diff))
    return float(np.linalg.norm(diff, 2))
