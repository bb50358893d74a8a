"""Shared state-bound sequence.

Encoders, the trigger and the controller each hold a copy and advance it
with the same inter-sample times, so the arithmetic order below is fixed
to keep the copies bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class BoundState:
    ell: int
    E_tilde: float
    E: float
    delta: float
    sigma: float
    gamma: float

    @property
    def delta_sigma(self) -> float:
        return self.delta * self.sigma


def init(E0: float, cert, B_norm: float, sigma: float) -> BoundState:
    # the first sample uses E0 itself; the recursion starts from Gamma * E0
    if not E0 > 0:
        raise ValueError(f"E0 must be positive, got {E0}")
    delta = cert.Gamma * B_norm / (1.0 - cert.gamma)
    return BoundState(0, cert.Gamma * E0, E0, delta, sigma, cert.gamma)


def advance(s: BoundState, inter_sample: int) -> BoundState:
    if inter_sample < 1:
        raise ValueError(f"inter_sample must be at least 1, got {inter_sample}")
    ds = s.delta * s.sigma
    factor = pow(s.gamma, inter_sample)
    factor = factor * (1.0 - ds)
    factor = factor + ds
    e_next = factor * s.E_tilde
    return replace(s, ell=s.ell + 1, E_tilde=e_next, E=e_next)
