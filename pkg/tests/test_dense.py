import math
import zlib
from fractions import Fraction as F

import numpy as np
import pytest
import sympy

from parfrac.baselines import resolve
from parfrac.dense import (
    TAYLOR8_CONSTANTS,
    EvalOptions,
    eval_dense,
    evaluate_dense,
    pade4,
    pade4_phi1,
    pade10,
    solve_shifted,
    taylor8,
    taylor_dense,
)
from parfrac.errors import forward_bound, theta
from parfrac.exceptions import SingularShift, ValidationError
from parfrac.methods import CATALOG_NAMES, build_plain, catalog
from parfrac.oracle import error_2norm, expm_oracle, phi1_oracle
from parfrac.series import EXP

ALL_METHODS = CATALOG_NAMES + tuple(n + "'" for n in CATALOG_NAMES)


def scaled_randn(d, norm, seed, ord=1):
    B = np.random.default_rng(seed).standard_normal((d, d))
    return B * (norm / np.linalg.norm(B, ord))


def test_solve_shifted_zero_matrix():
    assert np.array_equal(solve_shifted(np.zeros((4, 4)), 0.7), np.eye(4))


def test_solve_shifted_diagonal():
    lam = np.array([0.5, -1.0, 2.0])
    X = solve_shifted(np.diag(lam), 0.2)
    np.testing.assert_allclose(X, np.diag(1 / (1 - 0.2 * lam)), rtol=1e-15)


def test_solve_shifted_residual():
    B = np.random.default_rng(3).standard_normal((8, 8))
    X = solve_shifted(B, 0.2)
    resid = np.linalg.norm((np.eye(8) - 0.2 * B) @ X - np.eye(8), 1)
    assert resid <= 1e-13 * np.linalg.norm(X, 1)


def test_solve_shifted_singular():
    with pytest.raises(SingularShift) as exc:
        solve_shifted(5 * np.eye(3), 0.2)
    assert exc.value.shift == 0.2 and exc.value.pivot == 0.0


def test_eval_dense_reports_failing_shift():
    m = build_plain([0, F(1, 2), F(1, 4)], EXP, 2)
    with pytest.raises(SingularShift) as exc:
        eval_dense(m, 4 * np.eye(3))
    assert exc.value.shift == 0.25


def test_input_validation():
    with pytest.raises(ValidationError):
        eval_dense(catalog("R4"), np.ones((2, 3)))
    with pytest.raises(ValidationError):
        pade4(np.array([[np.nan]]))
    with pytest.raises(ValidationError):
        EvalOptions(workers=0)
    with pytest.raises(ValidationError):
        EvalOptions(form="other")


@pytest.mark.parametrize("name", ALL_METHODS)
def test_zero_matrix_gives_constant(name):
    m = catalog(name)
    out = eval_dense(m, np.zeros((5, 5)))
    # the plain form sums the weights in floating point
    slack = 4 * np.finfo(float).eps * float(sum(abs(b) for b in m.weights) + sum(abs(d) for d in m.poly))
    np.testing.assert_allclose(out, float(m.taylor_coeff(0)) * np.eye(5), rtol=0, atol=slack)


@pytest.mark.parametrize("name", ["pade4", "pade4_phi1", "taylor8", "pade10", "taylor12"])
def test_baselines_at_zero(name):
    assert np.array_equal(evaluate_dense(resolve(name), np.zeros((4, 4))), np.eye(4))


def test_r4_diagonal_scalar():
    m = catalog("R4")
    out = eval_dense(m, np.diag([0.1] * 3))
    np.testing.assert_allclose(np.diag(out), m(0.1), rtol=1e-15)
    assert m(0.1) == pytest.approx(float(m.evaluate_exact(F(1, 10))), rel=1e-13)
    assert np.count_nonzero(out - np.diag(np.diag(out))) == 0


@pytest.mark.parametrize("name", ALL_METHODS + ("pade4", "pade4_phi1", "taylor8", "pade10"))
def test_diagonal_consistency(name):
    approx = resolve(name)
    xs = np.linspace(-0.9, 0.9, 37)
    D = np.diag(evaluate_dense(approx, np.diag(xs)))
    S = np.array([approx(x) for x in xs])
    assert np.all(np.abs(D - S) <= 10 * np.spacing(np.abs(S)))


def test_r8_within_bound_at_unit_norm():
    B = scaled_randn(100, 1.0, 11)
    err = error_2norm(expm_oracle(B), eval_dense(catalog("R8"), B))
    assert err <= forward_bound(catalog("R8"), EXP, 1.0)


def test_pade4_scalar():
    x = 0.1
    ref = (1 + 0.05 + 0.01 / 12) / (1 - 0.05 + 0.01 / 12)
    assert pade4(np.array([[x]]))[0, 0] == pytest.approx(ref, rel=1e-15)


def test_pade4_within_bound():
    B = scaled_randn(50, 0.5, 5)
    assert error_2norm(expm_oracle(B), pade4(B)) <= forward_bound("pade4", None, 0.5)


def test_pade4_phi1_scalar():
    x = 0.2
    ref = (1 + x / 10 + x * x / 60) / (1 - 2 * x / 5 + x * x / 20)
    assert pade4_phi1(np.array([[x]]))[0, 0] == pytest.approx(ref, rel=1e-15)


def test_pade4_phi1_within_bound():
    B = scaled_randn(50, 0.5, 6)
    assert error_2norm(phi1_oracle(B), pade4_phi1(B)) <= forward_bound("pade4_phi1", None, 0.5)


def test_taylor8_is_exact_taylor_polynomial():
    s = sympy.sqrt(177)
    x = sympy.Symbol("x")
    x3 = sympy.Rational(2, 3)
    x1 = x3 * (1 + s) / 88
    x2 = (1 + s) / 352 * x3
    x4 = (-271 + 29 * s) / (315 * x3)
    x5 = 11 * (-1 + s) / (1260 * x3)
    x6 = 11 * (-9 + s) / (5040 * x3)
    x7 = (89 - s) / (5040 * x3**2)
    y2 = (857 - 58 * s) / 630
    A2 = x**2
    A4 = A2 * (x1 * x + x2 * A2)
    A8 = (x3 * A2 + A4) * (x4 + x5 * x + x6 * A2 + x7 * A4)
    poly = sympy.Poly(sympy.expand(1 + x + y2 * A2 + A8), x)
    for k in range(9):
        assert sympy.simplify(poly.coeff_monomial(x**k) - sympy.Rational(1, math.factorial(k))) == 0
    for name, value in (("x1", x1), ("x4", x4), ("x7", x7), ("y2", y2)):
        assert TAYLOR8_CONSTANTS[name] == pytest.approx(float(value), rel=1e-15)


def test_taylor8_scalar():
    x = 0.3
    ref = sum(x**k / math.factorial(k) for k in range(9))
    assert taylor8(np.array([[x]]))[0, 0] == pytest.approx(ref, rel=1e-15)


def test_taylor8_matches_horner():
    B = scaled_randn(30, 1.0, 8)
    T, H = taylor8(B), taylor_dense(8, B)
    assert np.linalg.norm(T - H, 1) <= 1e-12 * np.linalg.norm(H, 1)


def test_pade10_scalar():
    x = F(1, 2)
    num = sum(F(math.factorial(10 - j) * math.factorial(5), math.factorial(10) * math.factorial(j) * math.factorial(5 - j)) * x**j for j in range(6))
    den = sum(F(math.factorial(10 - j) * math.factorial(5), math.factorial(10) * math.factorial(j) * math.factorial(5 - j)) * (-x) ** j for j in range(6))
    assert pade10(np.array([[0.5]]))[0, 0] == pytest.approx(float(num / den), rel=1e-15)


def test_pade10_within_bound():
    B = scaled_randn(100, 1.0, 12)
    assert error_2norm(expm_oracle(B), pade10(B)) <= forward_bound("pade10", None, 1.0)


@pytest.mark.parametrize("name", ["R4", "R8", "R10", "R10star'"])
def test_workers_bit_identical(name):
    B = scaled_randn(40, 1.2, 21)
    m = catalog(name)
    ref = eval_dense(m, B, EvalOptions(workers=1))
    for w in (2, 8):
        assert np.array_equal(eval_dense(m, B, EvalOptions(workers=w)), ref)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_plain_and_residual_agree(name):
    B = scaled_randn(30, 1.0, 4)
    m = catalog(name)
    plain = eval_dense(m, B, EvalOptions(form="plain"))
    resid = eval_dense(m, B, EvalOptions(form="residual"))
    assert np.linalg.norm(plain - resid, 2) <= 1e-8
    assert np.array_equal(eval_dense(catalog(name + "'"), B), resid)


@pytest.mark.parametrize("name", ["R4", "R4_phi1", "R5", "R8", "R10star", "R10", "pade4", "pade10", "taylor8"])
def test_bound_compliance(name):
    approx = resolve(name)
    th = theta(approx, None, 2.0**-24)
    oracle = phi1_oracle if approx.function != EXP else expm_oracle
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    worst = 0.0
    for _ in range(4):
        B = rng.standard_normal((20, 20))
        B *= th * rng.uniform(0.5, 1.0) / np.linalg.norm(B, 1)
        worst = max(worst, error_2norm(oracle(B), evaluate_dense(approx, B)))
    assert worst <= 10 * 2.0**-24
