import math

import mpmath
import numpy as np
import pytest
import scipy.linalg

from parfrac.action import TridiagMatrix
from parfrac.exceptions import ValidationError
from parfrac.oracle import action_oracle, bits_for, error_2norm, expm_oracle, phi1_oracle, to_float


def test_expm_zero():
    assert np.array_equal(to_float(expm_oracle(np.zeros((3, 3)))), np.eye(3))


def test_expm_identity_to_requested_digits():
    E = expm_oracle(np.eye(2), digits=50)
    with mpmath.workdps(60):
        assert abs(E[0, 0] - mpmath.e) < mpmath.mpf(10) ** -50
        assert E[0, 1] == 0


def test_expm_self_consistent():
    B = np.random.default_rng(0).standard_normal((12, 12))
    a, b = expm_oracle(B, 40), expm_oracle(B, 60)
    with mpmath.workdps(60):
        scale = max(abs(x) for x in b.ravel())
        assert max(abs(x - y) for x, y in zip(a.ravel(), b.ravel())) <= scale * mpmath.mpf(10) ** -35


def test_expm_agrees_with_scipy():
    B = np.random.default_rng(1).standard_normal((10, 10))
    np.testing.assert_allclose(to_float(expm_oracle(B)), scipy.linalg.expm(B), rtol=1e-12, atol=1e-13)


def test_phi1_against_block_exponential():
    # phi1(B) is the top-right block of exp([[B, I], [0, 0]])
    B = np.random.default_rng(2).standard_normal((6, 6)) * 0.7
    big = np.zeros((12, 12))
    big[:6, :6] = B
    big[:6, 6:] = np.eye(6)
    ref = expm_oracle(big, 50)[:6, 6:]
    got = phi1_oracle(B, 50)
    with mpmath.workdps(60):
        assert max(abs(x - y) for x, y in zip(got.ravel(), ref.ravel())) < mpmath.mpf(10) ** -45


def test_phi1_scalar():
    with mpmath.workdps(50):
        got = phi1_oracle(np.array([[0.5]]), 40)[0, 0]
        assert abs(got - mpmath.expm1(mpmath.mpf(0.5)) / mpmath.mpf(0.5)) < mpmath.mpf(10) ** -38


def test_action_zero_matrix():
    v = np.array([1.0, -2.0, 0.25])
    assert np.array_equal(to_float(action_oracle(np.zeros((3, 3)), v)), v)


def test_action_diagonal():
    lam = np.array([-3.5, 0.0, 0.75, 2.0])
    v = np.array([1.0, 2.0, -1.0, 0.5])
    got = action_oracle(np.diag(lam), v, 40)
    with mpmath.workdps(50):
        for g, l, x in zip(got, lam, v):
            assert abs(g - mpmath.exp(l) * x) < mpmath.mpf(10) ** -38


def test_action_matches_dense_oracle():
    T = TridiagMatrix.constant(40, -1.0, 2.0, -1.0).scaled(0.7)
    v = np.random.default_rng(4).standard_normal(40)
    got = action_oracle(T, v, 50)
    with mpmath.workdps(60):
        ref = expm_oracle(T.to_dense(), 50).dot(v)
        assert max(abs(a - b) for a, b in zip(got, ref)) < mpmath.mpf(10) ** -40


def test_action_self_consistent():
    T = TridiagMatrix.constant(200, -1.0, 2.0, -1.0).scaled(0.8)
    v = np.random.default_rng(5).standard_normal(200)
    a, b = action_oracle(T, v, 40), action_oracle(T, v, 60)
    with mpmath.workdps(60):
        assert max(abs(x - y) for x, y in zip(a, b)) < mpmath.mpf(10) ** -35


def test_digits_validated():
    with pytest.raises(ValidationError):
        expm_oracle(np.eye(2), 20)
    with pytest.raises(ValidationError):
        expm_oracle(np.ones((2, 3)))


def test_bits_for():
    assert bits_for(40) == math.ceil(40 * math.log2(10)) + 64


def test_error_2norm():
    ref = expm_oracle(np.zeros((2, 2)))
    assert error_2norm(ref, np.eye(2)) == 0.0
    assert error_2norm(ref, np.diag([1.0, 1.5])) == pytest.approx(0.5)
    vec = action_oracle(np.zeros((2, 2)), np.array([3.0, 4.0]))
    assert error_2norm(vec, np.zeros(2)) == pytest.approx(5.0)
