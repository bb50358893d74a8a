"""Decay certificates, the associated contraction norm, and the design check.

A certificate is a pair ``(gamma, Gamma)`` with ``||A_cl^k|| <= Gamma gamma^k``
for every ``k >= 0``. ``Gamma`` is the supremum of ``||(A_cl/gamma)^k||``; it is
computed exactly by stopping at the first power ``m_cut`` whose norm drops
below one, since every later power is a product of earlier ones with a
factor of norm less than one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linops import DimensionError, as_mat, inf_norm_mat, inf_norm_vec, spectral_radius

# ||(A_cl/gamma)^m|| must clear 1 by this margin to count as a contraction
STRICT_MARGIN = 1e-12
DEFAULT_CAP = 1_000_000


class CertificateError(ValueError):
    """No finite certificate exists for the requested decay rate."""


@dataclass(frozen=True)
class StabilityCertificate:
    gamma: float
    Gamma: float
    m_cut: int
    A_cl: np.ndarray = field(repr=False, compare=False)
    # ||(A_cl/gamma)^m_cut||, strictly below one
    contraction: float = 0.0


@dataclass(frozen=True)
class DesignReport:
    K_inf: float
    B_inf: float
    N: int
    K_inf_over_N: float
    sigma: float
    gamma: float
    Gamma: float
    tau_max: int
    delta: float
    sigma_upper: float  # math.inf when B = 0
    feasible: bool
    omega: float | None

    def window_text(self) -> str:
        upper = "inf" if math.isinf(self.sigma_upper) else f"{self.sigma_upper:.4f}"
        return f"{self.K_inf:.4f}/N <= sigma < {upper}"

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if math.isinf(self.sigma_upper):
            d["sigma_upper"] = None
        return d


def choose_gamma(A_cl, factor: float = 1.01, decimals: int = 4) -> float:
    """``factor`` times the spectral radius, rounded to ``decimals`` places."""
    return round(factor * spectral_radius(A_cl), decimals)


def compute_certificate(A_cl, gamma: float, cap: int = DEFAULT_CAP) -> StabilityCertificate:
    A_cl = as_mat(A_cl, "A_cl")
    if A_cl.shape[0] != A_cl.shape[1]:
        raise DimensionError("A_cl must be square")
    if not 0.0 < gamma < 1.0:
        raise CertificateError(f"gamma must lie in (0, 1), got {gamma}")

    f = A_cl / gamma
    power = np.eye(A_cl.shape[0])
    gamma_max = 1.0  # k = 0 term
    for m in range(1, cap + 1):
        power = power @ f
        nrm = inf_norm_mat(power)
        if nrm < 1.0 - STRICT_MARGIN:
            return StabilityCertificate(gamma, gamma_max, m, A_cl, nrm)
        if not math.isfinite(nrm):
            break
        gamma_max = max(gamma_max, nrm)
    raise CertificateError(
        f"gamma too close to or below spectral radius: no contracting power of "
        f"A_cl/gamma found within {cap} steps (gamma={gamma})"
    )


def contraction_norm(cert: StabilityCertificate, xi) -> float:
    """``sup_k ||gamma^-k A_cl^k xi||_inf``, evaluated exactly.

    Terms are accumulated until a rigorous bound on every remaining term
    falls to or below the running maximum. Two bounds are available after
    ``k`` terms: ``c^floor(k/m_cut) * Gamma * ||xi||`` from the certificate,
    and ``Gamma * ||v_k||`` from the current iterate; the smaller is used.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.shape[0] != cert.A_cl.shape[0]:
        raise DimensionError(f"xi has shape {xi.shape}, A_cl is {cert.A_cl.shape}")
    base = inf_norm_vec(xi)
    if base == 0.0:
        return 0.0
    f = cert.A_cl / cert.gamma
    v = xi
    best = base
    k = 0
    while True:
        v = f @ v
        k += 1
        cur = inf_norm_vec(v)
        best = max(best, cur)
        tail = min(cert.contraction ** (k // cert.m_cut) * cert.Gamma * base, cert.Gamma * cur)
        if tail <= best:
            return best


def phi(gamma: float, delta_sigma: float, tau: float) -> float:
    """Per-step decay factor ``(gamma^tau (1 - ds) + ds)^(1/tau)``."""
    return (gamma**tau * (1.0 - delta_sigma) + delta_sigma) ** (1.0 / tau)


def check_design(plant, cert: StabilityCertificate, N: int, sigma: float, tau_max: int) -> DesignReport:
    """Evaluate ``||K||/N <= sigma < (1 - gamma)/(Gamma ||B||)`` and the rate ``omega``.

    Infeasibility is reported, never raised.
    """
    k_inf = inf_norm_mat(plant.K)
    b_inf = inf_norm_mat(plant.B)
    delta = cert.Gamma * b_inf / (1.0 - cert.gamma)
    sigma_upper = math.inf if delta == 0.0 else 1.0 / delta
    k_over_n = k_inf / N
    ds = delta * sigma
    feasible = k_over_n <= sigma and ds < 1.0
    omega = phi(cert.gamma, ds, tau_max) if feasible else None
    return DesignReport(
        K_inf=k_inf, B_inf=b_inf, N=N, K_inf_over_N=k_over_n, sigma=sigma,
        gamma=cert.gamma, Gamma=cert.Gamma, tau_max=tau_max, delta=delta,
        sigma_upper=sigma_upper, feasible=feasible, omega=omega,
    )
