"""Closed-loop simulation of the quantized self-triggered loop.

At each sampling time ``k_l`` the sensors quantize ``x(k_l)`` with the
current bound, the trigger picks the gap to the next sample, the input
``u = K q_l`` is held over the gap, and every party advances its copy of the
bound sequence. The guarantees the scheme rests on are checked as the loop
runs:

* ``state_bound``: ``||x(k_l)|| <= E_l`` at every sample
* ``majorization``: ``||K q_l - K x(k)|| <= g(q_l, E_l, k - k_l)`` inside the window
* ``threshold``: ``||K q_l - K x(k)|| <= sigma E_l`` for ``k_l < k < k_{l+1}``
* ``envelope``: ``E_l <= Gamma E0 omega^k_l`` (only when the design is feasible)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import boundseq
from .certify import StabilityCertificate, check_design, choose_gamma, compute_certificate
from .codec import CellIndex, EncoderConfig, bits_per_sample, quantize_state
from .linops import DimensionError, as_mat, as_vec, dlqr, inf_norm_mat, inf_norm_vec, spectral_radius
from .trigger import TriggerConfig, next_sample

ASSERT_LEVELS = ("off", "check", "strict")
ATOL = 1e-10
RTOL = 1e-10


class CheckViolation(AssertionError):
    def __init__(self, diag: "Diagnostic"):
        super().__init__(f"{diag.check} violated at k={diag.k} (sample {diag.ell}): "
                         f"{diag.lhs!r} > {diag.rhs!r}")
        self.diagnostic = diag


@dataclass(frozen=True)
class PlantModel:
    A: np.ndarray
    B: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        A = as_mat(self.A, "A")
        B = as_mat(self.B, "B")
        K = as_mat(self.K, "K")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
        if K.shape != (B.shape[1], n):
            raise DimensionError(f"K must be {B.shape[1]}x{n}, got {K.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "K", K)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def A_cl(self) -> np.ndarray:
        return self.A + self.B @ self.K


@dataclass(frozen=True)
class StepRecord:
    k: int
    x: np.ndarray
    u: np.ndarray
    is_sample: bool
    ell: int


@dataclass(frozen=True)
class SampleRecord:
    ell: int
    k_ell: int
    x: np.ndarray
    q: np.ndarray
    indices: tuple[CellIndex, ...]
    E_used: float
    E_tilde: float
    inter_sample: int
    capped: bool
    g_at_trigger: float
    clipped: bool
    quant_error: float
    bits: int


@dataclass(frozen=True)
class Diagnostic:
    check: str
    ell: int
    k: int
    lhs: float
    rhs: float


@dataclass
class SimTrace:
    steps: list[StepRecord] = field(default_factory=list)
    samples: list[SampleRecord] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    final_x: np.ndarray | None = None


@dataclass(frozen=True)
class RunMetrics:
    horizon: int
    n_transmissions: int
    total_bits: int
    timing_bits: int
    avg_quant_error: float
    state_norm_series: list[float]
    bound_series: list[float]
    # mean over samples of the per-coordinate mean |q - x|; alternative convention
    avg_quant_error_mean_abs: float = 0.0


def simulate(plant: PlantModel, cert: StabilityCertificate, enc: EncoderConfig,
             trg: TriggerConfig, x0, horizon: int,
             assert_level: str = "check") -> tuple[SimTrace, RunMetrics]:
    if assert_level not in ASSERT_LEVELS:
        raise ValueError(f"assert_level must be one of {ASSERT_LEVELS}")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    x = as_vec(x0, "x0")
    if x.shape[0] != plant.n or enc.n != plant.n:
        raise DimensionError(f"x0 has {x.shape[0]} entries, partition covers {enc.n}, plant has {plant.n}")
    if inf_norm_vec(x) > enc.E0:
        raise ValueError(f"initial bound violated: ||x0|| = {inf_norm_vec(x)} > E0 = {enc.E0}")

    A, B, K = plant.A, plant.B, plant.K
    N = enc.N
    report = check_design(plant, cert, N, trg.sigma, trg.tau_max)
    if not report.feasible:
        warnings.warn(f"design condition fails ({report.window_text()}, sigma={trg.sigma}, N={N}); "
                      "no convergence guarantee", RuntimeWarning, stacklevel=2)
    b_norm = inf_norm_mat(B)
    # one copy of the bound per party; all three must stay identical
    bounds = [boundseq.init(enc.E0, cert, b_norm, trg.sigma) for _ in range(3)]
    sample_bits = bits_per_sample(enc)
    trace = SimTrace()

    def flag(check, ell, k, lhs, rhs):
        diag = Diagnostic(check, ell, k, float(lhs), float(rhs))
        if assert_level == "strict":
            raise CheckViolation(diag)
        trace.diagnostics.append(diag)

    k = 0
    while k <= horizon:
        sensor, trig_side, ctrl = bounds
        assert sensor == trig_side == ctrl
        E = sensor.E
        ell = sensor.ell
        q, indices, clipped = quantize_state(x, enc, E)
        if assert_level != "off":
            if inf_norm_vec(x) > E * (1.0 + RTOL):
                flag("state_bound", ell, k, inf_norm_vec(x), E)
            if report.feasible:
                env = cert.Gamma * enc.E0 * report.omega**k
                if E > env * (1.0 + RTOL):
                    flag("envelope", ell, k, E, env)
        decision = next_sample(plant, q, E, N, trg)
        p = decision.inter_sample
        trace.samples.append(SampleRecord(
            ell=ell, k_ell=k, x=x.copy(), q=q, indices=tuple(indices), E_used=E,
            E_tilde=sensor.E_tilde, inter_sample=p, capped=decision.capped,
            g_at_trigger=decision.g_values[p], clipped=clipped,
            quant_error=inf_norm_vec(q - x), bits=sample_bits,
        ))
        u = K @ q
        kq = u
        for tau in range(p):
            if k + tau >= horizon:
                break
            if assert_level != "off":
                err = inf_norm_vec(kq - K @ x)
                if err > decision.g_values[tau] + ATOL:
                    flag("majorization", ell, k + tau, err, decision.g_values[tau])
                if tau >= 1 and err > trg.sigma * E + ATOL:
                    flag("threshold", ell, k + tau, err, trg.sigma * E)
            trace.steps.append(StepRecord(k + tau, x.copy(), u.copy(), tau == 0, ell))
            x = A @ x + B @ u
        k += p
        bounds = [boundseq.advance(b, p) for b in bounds]
    # stepping stops at the horizon, so x is x(horizon) on every exit path
    trace.final_x = x
    return trace, metrics(trace, horizon, timing_bits=trg.gap_bits)


def metrics(trace: SimTrace, horizon: int, timing_bits: int = 0) -> RunMetrics:
    samples = [s for s in trace.samples if s.k_ell <= horizon]
    norms = [inf_norm_vec(s.x) for s in trace.steps if s.k <= horizon]
    if trace.final_x is not None and len(norms) == horizon:
        norms.append(inf_norm_vec(trace.final_x))
    errors = [s.quant_error for s in samples]
    mean_abs = [float(np.mean(np.abs(s.q - s.x))) for s in samples]
    return RunMetrics(
        horizon=horizon,
        n_transmissions=len(samples),
        total_bits=sum(s.bits for s in samples),
        timing_bits=timing_bits * len(samples),
        avg_quant_error=float(np.mean(errors)) if errors else 0.0,
        state_norm_series=norms,
        bound_series=[s.E_used for s in samples],
        avg_quant_error_mean_abs=float(np.mean(mean_abs)) if mean_abs else 0.0,
    )


def random_instance(rng: np.random.Generator, n: int | None = None, m: int | None = None,
                    tau_max: int = 20, max_tries: int = 1000):
    """Draw a feasible random setup ``(plant, cert, enc, trg, x0)``.

    ``A`` has uniform entries rescaled to a spectral radius in ``[0.8, 1.3]``,
    ``B`` is uniform, ``K`` is the LQR gain with identity weights. ``sigma``
    is placed inside the feasible window and ``N`` is one to four times the
    smallest level count satisfying it, so gaps longer than one step occur. Draws without a valid certificate are rejected.
    """
    for _ in range(max_tries):
        nn = n if n is not None else int(rng.integers(1, 6))
        mm = m if m is not None else int(rng.integers(1, nn + 1))
        A = rng.uniform(-1, 1, (nn, nn))
        rho = spectral_radius(A)
        if rho < 1e-3:
            continue
        A = A * rng.uniform(0.8, 1.3) / rho
        B = rng.uniform(-1, 1, (nn, mm))
        try:
            K = dlqr(A, B, np.eye(nn), np.eye(mm), tol=1e-9)
        except ConvergenceError:
            continue
        plant = PlantModel(A, B, K)
        gamma = choose_gamma(plant.A_cl)
        if not 0.0 < gamma < 1.0:
            continue
        try:
            cert = compute_certificate(plant.A_cl, gamma, cap=100_000)
        except CertificateError:
            continue
        delta = cert.Gamma * inf_norm_mat(B) / (1.0 - gamma)
        sigma = rng.uniform(0.2, 0.9) / delta
        N = max(int(np.ceil(rng.uniform(1.0, 4.0) * inf_norm_mat(K) / sigma)), 1)
        while inf_norm_mat(K) / N > sigma:
            N += 1
        E0 = float(rng.uniform(0.5, 2.0))
        x0 = rng.uniform(-E0, E0, nn)
        enc = EncoderConfig.scalar_sensors(nn, N, E0)
        trg = TriggerConfig(float(sigma), tau_max)
        if not check_design(plant, cert, N, trg.sigma, tau_max).feasible:
            continue
        return plant, cert, enc, trg, x0
    raise RuntimeError("no feasible random instance found")
