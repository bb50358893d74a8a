"""Self-triggering rule: pick the next sampling instant from the quantized state.

The controller side only knows ``q`` and the bound ``E``. For a candidate
gap ``tau`` it bounds the input error by

    g(q, E, tau) = ||K (I - A^tau - sum_{p<tau} A^p B K) q|| + ||K A^tau|| E / N

and samples again at the first ``tau`` where ``g > sigma E`` (or at
``tau_max``). Comparisons are raw floating point, strict ``>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import DimensionError, inf_norm_mat, inf_norm_vec


class ZenoError(ValueError):
    """The threshold is already exceeded right after sampling."""


@dataclass(frozen=True)
class TriggerConfig:
    sigma: float
    tau_max: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if int(self.tau_max) != self.tau_max or self.tau_max < 1:
            raise ValueError(f"tau_max must be a positive integer, got {self.tau_max}")

    @property
    def gap_bits(self) -> int:
        """Bits needed to send an inter-sample time in ``1..tau_max``."""
        return math.ceil(math.log2(self.tau_max)) if self.tau_max > 1 else 0


@dataclass(frozen=True)
class TriggerDecision:
    inter_sample: int
    g_values: tuple[float, ...]  # g at tau = 0..inter_sample
    capped: bool


def _check(plant, q):
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.shape[0] != plant.A.shape[0]:
        raise DimensionError(f"q has shape {q.shape}, plant state has dimension {plant.A.shape[0]}")
    return q


def g_eval(plant, q, E: float, N: int, tau: int) -> float:
    """Input-error bound for a gap of ``tau`` steps, built from scratch."""
    q = _check(plant, q)
    n = plant.A.shape[0]
    a_tau = np.linalg.matrix_power(plant.A, tau)
    partial = np.zeros((n, n))
    a_p = np.eye(n)
    for _ in range(tau):
        partial = partial + a_p @ plant.B @ plant.K
        a_p = a_p @ plant.A
    first = inf_norm_vec(plant.K @ ((np.eye(n) - a_tau - partial) @ q))
    return first + inf_norm_mat(plant.K @ a_tau) * E / N


def next_sample(plant, q, E: float, N: int, cfg: TriggerConfig) -> TriggerDecision:
    q = _check(plant, q)
    A, B, K = plant.A, plant.B, plant.K
    n = A.shape[0]
    threshold = cfg.sigma * E
    eye = np.eye(n)

    g0 = inf_norm_mat(K) * E / N
    if g0 > threshold:
        raise ZenoError(
            f"Zeno-like configuration: ||K||/N = {inf_norm_mat(K) / N:.6g} exceeds "
            f"sigma = {cfg.sigma:.6g}, so the threshold is crossed at tau = 0"
        )
    values = [g0]
    a_tau = eye
    partial = np.zeros((n, n))
    bk = B @ K
    for tau in range(1, cfg.tau_max + 1):
        partial = partial + a_tau @ bk
        a_tau = a_tau @ A
        g = inf_norm_vec(K @ ((eye - a_tau - partial) @ q)) + inf_norm_mat(K @ a_tau) * E / N
        values.append(g)
        if g > threshold:
            return TriggerDecision(tau, tuple(values), False)
    return TriggerDecision(cfg.tau_max, tuple(values), True)
