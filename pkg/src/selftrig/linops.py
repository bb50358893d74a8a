"""Dense linear-algebra kernel.

Matrices are plain 2-D float64 numpy arrays and vectors are 1-D arrays.
Everything here is a pure function; nothing is cached between calls.

Functions
---------
inf_norm_vec, inf_norm_mat : maximum norm and its induced matrix norm
mat_mul, mat_vec, mat_pow  : products with dimension checks
spectral_radius            : Gelfand estimate by repeated squaring
zoh_discretize             : exact sampling of (A_c, B_c) with period h
dlqr                       : discrete LQR gain by Riccati iteration
"""

from __future__ import annotations

import math

import numpy as np


class DimensionError(ValueError):
    """Operands have non-conformable shapes."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap.

    ``bracket`` holds the last two iterates (or a lower/upper pair) so the
    caller can still see how far the routine got.
    """

    def __init__(self, message: str, bracket=None):
        super().__init__(message)
        self.bracket = bracket


def as_mat(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_vec(v, name: str = "vector") -> np.ndarray:
    x = np.array(v, dtype=float)
    if x.ndim != 1 or x.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def inf_norm_vec(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


def inf_norm_mat(a) -> float:
    """Maximum absolute row sum."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def mat_mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_vec(a, v) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot apply {a.shape} to vector of shape {v.shape}")
    return a @ v


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def mat_pow(a, k: int) -> np.ndarray:
    """``a**k`` by binary exponentiation; ``mat_pow(a, 0)`` is the identity."""
    a = np.asarray(a, dtype=float)
    _require_square(a)
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    result = np.eye(a.shape[0])
    base = a
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def spectral_radius(a, rel_tol: float = 1e-6, max_squarings: int = 64) -> float:
    """Estimate the spectral radius from ``||A^(2^j)||^(1/2^j)``.

    The matrix is renormalized before each squaring so the iterates stay
    near unit size; the logarithm of the discarded scale is carried along.
    Each estimate is an upper bound on the true radius and the sequence is
    nonincreasing, so stopping early errs on the safe (large) side.
    """
    a = as_mat(a)
    _require_square(a)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")

    m = a.copy()
    log_scale = 0.0  # log of the factor divided out of A^(2^j)
    prev = None
    agree = 0
    for j in range(max_squarings + 1):
        nrm = inf_norm_mat(m)
        if nrm == 0.0:
            return 0.0
        est = math.exp((log_scale + math.log(nrm)) / 2.0**j)
        if prev is not None:
            # successive estimates shrink geometrically, so the remaining
            # error is about the last step; stop at a quarter of rel_tol
            if abs(prev - est) <= 0.25 * rel_tol * est:
                agree += 1
                # two consecutive agreements guard against a lucky plateau
                if agree >= 2:
                    return est
            else:
                agree = 0
        prev_prev, prev = prev, est
        log_scale = 2.0 * (log_scale + math.log(nrm))
        m = m / nrm
        m = m @ m
    raise ConvergenceError(
        f"spectral radius estimate did not settle within {max_squarings} squarings",
        bracket=(prev, prev_prev),
    )


def _expm(m: np.ndarray, terms: int = 24) -> np.ndarray:
    # scaling and squaring with a truncated Taylor core; ||m / 2^s|| <= 1/2
    nrm = inf_norm_mat(m)
    s = max(0, math.ceil(math.log2(nrm / 0.5))) if nrm > 0.5 else 0
    x = m / 2.0**s
    n = m.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    for i in range(1, terms + 1):
        term = term @ x / i
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def zoh_discretize(a_c, b_c, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold sampling of ``dx/dt = A_c x + B_c u`` with period ``h``.

    Returns ``(exp(A_c h), int_0^h exp(A_c t) dt B_c)``, both read off the
    exponential of the block matrix ``[[A_c, B_c], [0, 0]] * h``.
    """
    a_c = as_mat(a_c, "A_c")
    b_c = as_mat(b_c, "B_c")
    _require_square(a_c, "A_c")
    if b_c.shape[0] != a_c.shape[0]:
        raise DimensionError(f"B_c has {b_c.shape[0]} rows, A_c has {a_c.shape[0]}")
    if not h > 0:
        raise ValueError("sampling period h must be positive")
    n, m = b_c.shape
    block = np.zeros((n + m, n + m))
    block[:n, :n] = a_c
    block[:n, n:] = b_c
    e = _expm(block * h)
    return e[:n, :n].copy(), e[:n, n:].copy()


def dlqr(a, b, q, r, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Discrete LQR state-feedback gain.

    Iterates the Riccati map from ``P = Q`` until successive iterates differ
    by less than ``tol`` in the infinity norm. The returned ``K`` is meant
    for ``u = K x``, i.e. the closed loop is ``A + B K``.
    """
    a = as_mat(a, "A")
    b = as_mat(b, "B")
    q = as_mat(q, "Q")
    r = as_mat(r, "R")
    _require_square(a, "A")
    n, m = b.shape
    if n != a.shape[0] or q.shape != (n, n) or r.shape != (m, m):
        raise DimensionError("dlqr: A, B, Q, R shapes are not conformable")

    p = q.copy()
    for _ in range(max_iter):
        bp = b.T @ p
        gain = np.linalg.solve(r + bp @ b, bp @ a)
        p_next = q + a.T @ p @ a - a.T @ p @ b @ gain
        p_next = 0.5 * (p_next + p_next.T)
        if not np.all(np.isfinite(p_next)):
            raise ConvergenceError("Riccati iteration diverged")
        if inf_norm_mat(p_next - p) < tol:
            p = p_next
            break
        p = p_next
    else:
        raise ConvergenceError(f"Riccati iteration did not converge in {max_iter} steps")
    bp = b.T @ p
    return -np.linalg.solve(r + bp @ b, bp @ a)
