import math

import numpy as np
import pytest

from selftrig import reactor
from selftrig.certify import (CertificateError, check_design, choose_gamma, compute_certificate,
                              contraction_norm, phi)
from selftrig.linops import DimensionError, inf_norm_mat, mat_pow, spectral_radius
from selftrig.simkit import PlantModel

from .conftest import schur_stable


def brute_force_norm(cert, xi, kmax=2000):
    f = cert.A_cl / cert.gamma
    v = np.asarray(xi, dtype=float)
    best = np.max(np.abs(v))
    for _ in range(kmax):
        v = f @ v
        best = max(best, np.max(np.abs(v)))
    return best


def test_scalar_certificates():
    c = compute_certificate(np.diag([0.5]), 0.6)
    assert c.Gamma == 1.0
    assert c.m_cut == 1
    with pytest.raises(CertificateError, match="too close"):
        compute_certificate(np.diag([0.5]), 0.5, cap=1000)
    with pytest.raises(CertificateError):
        compute_certificate(np.diag([0.5]), 1.2)


def test_nilpotent_certificate():
    c = compute_certificate(np.zeros((3, 3)), 0.9)
    assert (c.Gamma, c.m_cut) == (1.0, 1)


def test_reactor_certificate(plant, cert):
    assert choose_gamma(plant.A_cl) == reactor.GAMMA
    assert cert.Gamma == pytest.approx(2.6012, abs=1e-3)
    assert cert.contraction < 1 - 1e-12
    power = np.eye(4)
    for k in range(1001):
        assert inf_norm_mat(power) <= cert.Gamma * cert.gamma**k * (1 + 1e-12)
        power = power @ plant.A_cl


def test_certificate_validity_random(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        a = schur_stable(rng, n, 0.3, 0.97)
        gamma = 1.01 * spectral_radius(a)
        c = compute_certificate(a, gamma)
        power = np.eye(n)
        for k in range(1001):
            assert inf_norm_mat(power) <= c.Gamma * gamma**k * (1 + 1e-9)
            power = power @ a


def test_gamma_truncation_is_exact(cert):
    # the finite max already equals the sup over a much longer range
    f = cert.A_cl / cert.gamma
    brute = max(inf_norm_mat(mat_pow(f, k)) for k in range(3000))
    assert cert.Gamma == pytest.approx(brute, rel=1e-12)


def test_contraction_norm_examples(cert):
    assert contraction_norm(cert, np.zeros(4)) == 0.0
    zero = compute_certificate(np.zeros((3, 3)), 0.9)
    xi = np.array([0.3, -2.0, 1.0])
    assert contraction_norm(zero, xi) == 2.0
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    v = contraction_norm(cert, e1)
    assert 1.0 <= v <= cert.Gamma
    assert v == pytest.approx(brute_force_norm(cert, e1), abs=1e-12)
    with pytest.raises(DimensionError):
        contraction_norm(cert, np.ones(3))


def test_contraction_iterated(cert, rng):
    for _ in range(50):
        xi = rng.uniform(-1, 1, 4)
        base = contraction_norm(cert, xi)
        v = xi
        for k in range(1, 21):
            v = cert.A_cl @ v
            assert contraction_norm(cert, v) <= cert.gamma**k * base + 1e-10


def test_design_reactor(plant, cert):
    rep = check_design(plant, cert, 61, 0.28, 20)
    assert rep.feasible
    assert rep.sigma_upper == pytest.approx(0.3482, abs=5e-4)
    assert rep.K_inf == pytest.approx(12.8803, abs=5e-4)
    assert rep.delta == pytest.approx(cert.Gamma * inf_norm_mat(plant.B) / (1 - cert.gamma))
    ds = rep.delta * rep.sigma
    assert cert.gamma * (1 - ds) ** (1 / 20) < rep.omega < 1
    assert rep.window_text().endswith("< 0.3483")

    low = check_design(plant, cert, 10, 0.28, 20)
    assert not low.feasible and low.omega is None
    assert low.K_inf_over_N > 0.28

    high = check_design(plant, cert, 61, 0.4, 20)
    assert not high.feasible


def test_design_decoupled():
    plant = PlantModel(np.diag([0.5, 0.2]), np.zeros((2, 1)), np.zeros((1, 2)))
    c = compute_certificate(plant.A_cl, 0.6)
    for sigma in (1e-3, 1.0, 1e6):
        rep = check_design(plant, c, 3, sigma, 20)
        assert rep.feasible
        assert math.isinf(rep.sigma_upper)
        assert rep.omega == pytest.approx(0.6, rel=1e-14)
    assert rep.to_dict()["sigma_upper"] is None


def test_design_boundary_delta_sigma_one(plant, cert):
    rep = check_design(plant, cert, 61, 0.28, 20)
    edge = check_design(plant, cert, 61, 1.0 / rep.delta, 20)
    assert not edge.feasible


def test_phi_examples():
    for tau in (1, 2.5, 10, 100):
        assert phi(0.9, 0.0, tau) == pytest.approx(0.9, rel=1e-14)
    assert phi(0.8, 0.3, 1) == pytest.approx(0.8 * 0.7 + 0.3, rel=1e-15)
    seq = [phi(0.9, 0.5, t) for t in range(1, 101)]
    assert all(a < b for a, b in zip(seq, seq[1:]))


def test_omega_is_max_phi(rng):
    for _ in range(100):
        g, ds = rng.uniform(0.05, 0.999), rng.uniform(0.001, 0.999)
        tau_max = int(rng.integers(1, 60))
        assert phi(g, ds, tau_max) == max(phi(g, ds, t) for t in range(1, tau_max + 1))
