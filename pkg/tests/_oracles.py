"""Independent reference computations shared by the tests."""

import mpmath

from parfrac.methods import FractionMethod
from parfrac.series import coefficient


def mp(v):
    return mpmath.mpf(v.numerator) / v.denominator


def brute_force_bound(approx, x, terms=500, dps=200):
    """sum_{k=s+1}^{s+terms} |a_k - alpha_k| x^k by plain summation."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        if isinstance(approx, FractionMethod):
            b = [mp(v) for v in approx.weights]
            c = [mp(v) for v in approx.shifts]
            for k in range(approx.order + 1, approx.order + 1 + terms):
                alpha = mp(approx.poly_coeff(k)) + mpmath.fsum(bi * ci**k for bi, ci in zip(b, c))
                total += abs(mp(coefficient(approx.function, k)) - alpha) * x**k
        else:
            for k in range(approx.order + 1, approx.order + 1 + terms):
                total += abs(mp(coefficient(approx.function, k) - approx.taylor_coeff(k))) * x**k
        return total
