import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from selftrig import reactor
from selftrig.linops import (ConvergenceError, DimensionError, dlqr, inf_norm_mat, inf_norm_vec,
                             mat_mul, mat_pow, mat_vec, spectral_radius, zoh_discretize)

from .conftest import schur_stable


def row_sum_oracle(m):
    best = 0.0
    for row in np.asarray(m).tolist():
        s = 0.0
        for v in row:
            s += abs(v)
        best = max(best, s)
    return best


def naive_matmul(a, b):
    n, k = len(a), len(b)
    m = len(b[0])
    out = [[0.0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            for p in range(k):
                out[i][j] += a[i][p] * b[p][j]
    return np.array(out)


@pytest.mark.parametrize("v, expected", [
    ([1, -3, 2], 3.0),
    ([0.0] * 7, 0.0),
    (reactor.X0, 1.0),
])
def test_inf_norm_vec(v, expected):
    assert inf_norm_vec(v) == expected


def test_inf_norm_mat_examples():
    assert inf_norm_mat(np.eye(5)) == 1.0
    assert inf_norm_mat(reactor.PRINTED_K) == pytest.approx(12.8803, abs=5e-4)
    assert inf_norm_mat(reactor.PRINTED_B) == pytest.approx(row_sum_oracle(reactor.PRINTED_B), abs=1e-15)
    assert inf_norm_mat(reactor.PRINTED_B) == pytest.approx(0.055631, abs=5e-6)


def test_products_and_powers(plant):
    assert np.array_equal(mat_pow(plant.A_cl, 0), np.eye(4))
    assert np.array_equal(mat_pow(np.diag([2.0, 3.0]), 3), np.diag([8.0, 27.0]))
    oracle = naive_matmul(plant.A_cl.tolist(), plant.A_cl.tolist())
    np.testing.assert_allclose(mat_pow(plant.A_cl, 2), oracle, rtol=1e-14, atol=1e-15)
    m = np.arange(12.0).reshape(3, 4) / 7
    s = schur_stable(np.random.default_rng(1), 4)
    np.testing.assert_allclose(mat_pow(s, 7), np.linalg.matrix_power(s, 7), rtol=1e-12, atol=1e-15)
    assert mat_vec(m, np.ones(4)).shape == (3,)
    with pytest.raises(DimensionError):
        mat_mul(m, m)
    with pytest.raises(DimensionError):
        mat_vec(m, np.ones(3))
    with pytest.raises(DimensionError):
        mat_pow(m, 2)


def test_spectral_radius_examples(plant):
    assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9, rel=1e-6)
    assert spectral_radius(plant.A_cl) == pytest.approx(0.9402, abs=5e-4)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert spectral_radius(rot) == pytest.approx(1.0, rel=1e-6)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == 0.0


def test_spectral_radius_errors():
    with pytest.raises(DimensionError):
        spectral_radius(np.ones((2, 3)))
    a = np.array([[0.5, 100.0], [0.0, 0.4]])
    with pytest.raises(ConvergenceError) as info:
        spectral_radius(a, rel_tol=1e-12, max_squarings=2)
    assert info.value.bracket[0] is not None


def test_spectral_radius_matches_eigensolver(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        a = rng.normal(size=(n, n))
        exact = max(abs(np.linalg.eigvals(a)))
        est = spectral_radius(a, rel_tol=1e-6)
        assert abs(est - exact) <= 1e-6 * exact
        assert est >= exact * (1 - 1e-6)


def test_zoh_nilpotent_and_scalar():
    b_c = np.array([[1.0, 2.0], [3.0, -4.0]])
    a, b = zoh_discretize(np.zeros((2, 2)), b_c, 0.3)
    np.testing.assert_allclose(a, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(b, 0.3 * b_c, rtol=1e-14)

    a, b = zoh_discretize([[-1.0]], [[2.0]], 0.1)
    assert a[0, 0] == pytest.approx(math.exp(-0.1), rel=1e-14)
    assert b[0, 0] == pytest.approx(2 * (1 - math.exp(-0.1)), rel=1e-13)


def test_zoh_scalar_taylor_oracle():
    ac, bc, h = 0.7, 1.3, 0.01
    # e^{ah} = sum (ah)^k/k!,  int_0^h e^{at} dt = sum a^k h^{k+1}/(k+1)!
    phi = sum((ac * h) ** k / math.factorial(k) for k in range(40))
    gam = sum(ac**k * h ** (k + 1) / math.factorial(k + 1) for k in range(40)) * bc
    a, b = zoh_discretize([[ac]], [[bc]], h)
    assert a[0, 0] == pytest.approx(phi, rel=1e-14)
    assert b[0, 0] == pytest.approx(gam, rel=1e-13)


def test_zoh_reactor_matches_tabulated_values():
    a, b = zoh_discretize(reactor.A_C, reactor.B_C, reactor.H)
    np.testing.assert_allclose(a, scipy.linalg.expm(reactor.A_C * reactor.H), rtol=1e-13, atol=1e-15)
    np.testing.assert_array_equal(np.round(a, 4), reactor.PRINTED_A)
    np.testing.assert_allclose(np.round(b * 100, 4) / 100, reactor.PRINTED_B, atol=1e-12)


def test_zoh_doubling(rng):
    for _ in range(20):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 3))
        ac = rng.normal(size=(n, n))
        bc = rng.normal(size=(n, m))
        h = float(rng.uniform(0.01, 0.5))
        phi, psi = zoh_discretize(ac, bc, h)
        phi2, psi2 = zoh_discretize(ac, bc, 2 * h)
        np.testing.assert_allclose(phi2, phi @ phi, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(psi2, (phi + np.eye(n)) @ psi, rtol=1e-10, atol=1e-12)


def test_dlqr_examples():
    assert dlqr([[0.0]], [[1.0]], [[1.0]], [[1.0]])[0, 0] == 0.0

    a = 1.1
    p = (a**2 + math.sqrt(a**4 + 4)) / 2  # root of p^2 - a^2 p - 1 = 0
    assert dlqr([[a]], [[1.0]], [[1.0]], [[1.0]])[0, 0] == pytest.approx(-p * a / (1 + p), rel=1e-9)

    A, B = zoh_discretize(reactor.A_C, reactor.B_C, reactor.H)
    K = dlqr(A, B, reactor.Q, reactor.R)
    np.testing.assert_allclose(K, reactor.PRINTED_K, atol=1e-3)


def test_dlqr_against_scipy_and_stabilizes(rng):
    for _ in range(20):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 3))
        a = rng.uniform(-1, 1, (n, n)) * 1.2
        b = rng.uniform(-1, 1, (n, m))
        q, r = np.eye(n), 0.5 * np.eye(m)
        k = dlqr(a, b, q, r, tol=1e-11)
        p = scipy.linalg.solve_discrete_are(a, b, q, r)
        k_ref = -np.linalg.solve(r + b.T @ p @ b, b.T @ p @ a)
        np.testing.assert_allclose(k, k_ref, rtol=1e-6, atol=1e-8)
        assert spectral_radius(a + b @ k) < 1


def test_dlqr_iteration_cap():
    with pytest.raises(ConvergenceError):
        dlqr(reactor.PRINTED_A, reactor.PRINTED_B, reactor.Q, reactor.R, max_iter=3)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_submultiplicative(data):
    n = data.draw(st.integers(1, 5))
    el = st.floats(-3, 3, allow_nan=False)
    a = data.draw(arrays(np.float64, (n, n), elements=el))
    b = data.draw(arrays(np.float64, (n, n), elements=el))
    assert inf_norm_mat(a @ b) <= inf_norm_mat(a) * inf_norm_mat(b) * (1 + 1e-12) + 1e-300


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_gelfand_sandwich(seed, n):
    a = schur_stable(np.random.default_rng(seed), n)
    rho = spectral_radius(a)
    for k in (1, 2, 3, 5, 10, 40):
        assert rho <= inf_norm_mat(mat_pow(a, k)) ** (1 / k) * (1 + 1e-9)
