"""Writers for traces, metrics, design reports and figures."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

STEP_COLUMNS_FIXED = ("k", "is_sample", "ell")
SAMPLE_COLUMNS_HEAD = ("ell", "k_ell", "inter_sample", "capped", "E_used", "E_tilde")
SAMPLE_COLUMNS_TAIL = ("quant_error_inf", "bits")


def fmt(v) -> str:
    # repr of a Python float is the shortest string that round-trips
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def step_columns(n: int, m: int) -> list[str]:
    return (["k"] + [f"x_{i}" for i in range(1, n + 1)]
            + [f"u_{j}" for j in range(1, m + 1)] + ["is_sample", "ell"])


def sample_columns(n: int) -> list[str]:
    return list(SAMPLE_COLUMNS_HEAD) + [f"q_{i}" for i in range(1, n + 1)] + list(SAMPLE_COLUMNS_TAIL)


def write_steps(path, trace, n: int, m: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(step_columns(n, m))
        for s in trace.steps:
            w.writerow([fmt(s.k), *map(fmt, s.x), *map(fmt, s.u), fmt(s.is_sample), fmt(s.ell)])


def write_samples(path, trace, n: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(sample_columns(n))
        for s in trace.samples:
            w.writerow([fmt(s.ell), fmt(s.k_ell), fmt(s.inter_sample), fmt(s.capped),
                        fmt(s.E_used), fmt(s.E_tilde), *map(fmt, s.q),
                        fmt(s.quant_error), fmt(s.bits)])


def write_metrics(path, metrics, extra: dict | None = None) -> None:
    d = asdict(metrics)
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2), encoding="utf-8")


def write_table(path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if row.get(c) is None else
                        (row[c] if isinstance(row[c], str) else fmt(row[c])) for c in columns])


def design_text(rho: float, cert, report) -> str:
    upper = "unbounded" if math.isinf(report.sigma_upper) else f"{report.sigma_upper:.4f}"
    lines = [
        f"spectral radius of A_cl : {rho:.6f}",
        f"gamma                   : {cert.gamma:.6g}",
        f"Gamma                   : {cert.Gamma:.6f}",
        f"m_cut                   : {cert.m_cut}",
        f"||K||_inf               : {report.K_inf:.6f}",
        f"||B||_inf               : {report.B_inf:.6g}",
        f"delta                   : {report.delta:.6f}",
        f"sigma window            : {report.K_inf:.4f}/N <= sigma < {upper}",
        f"N, sigma, tau_max       : {report.N}, {report.sigma:g}, {report.tau_max}",
        f"||K||_inf / N           : {report.K_inf_over_N:.6f}",
        f"feasible                : {'yes' if report.feasible else 'no'}",
    ]
    if report.omega is not None:
        lines.append(f"omega                   : {report.omega:.6f}")
    return "\n".join(lines) + "\n"


def design_json(rho: float, cert, report) -> str:
    d = {"spectral_radius": rho, "m_cut": cert.m_cut}
    d.update(report.to_dict())
    d["sigma_upper_unbounded"] = math.isinf(report.sigma_upper)
    return json.dumps(d, indent=2)


def plot_run(out_dir, prefix: str, trace, metrics, ideal_norms=None) -> list[Path]:
    """Render the state norm, inter-sample times, bounds and first coordinate."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    paths = []
    ks = np.arange(len(metrics.state_norm_series))
    k_ell = np.array([s.k_ell for s in trace.samples])
    gaps = np.array([s.inter_sample for s in trace.samples])

    fig, ax = plt.subplots(figsize=(6, 3.5))
    if ideal_norms is not None:
        ax.plot(np.arange(len(ideal_norms)), ideal_norms, "b-", label="unquantized, every step")
    ax.plot(ks, metrics.state_norm_series, "r--", label="self-triggered")
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\|x(k)\|_\infty$")
    ax.legend()
    paths.append(_save(fig, out_dir / f"{prefix}state_norm.png"))

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.stem(k_ell, gaps)
    ax.set_xlabel(r"$k_\ell$")
    ax.set_ylabel(r"$k_{\ell+1} - k_\ell$")
    paths.append(_save(fig, out_dir / f"{prefix}inter_sample.png"))

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(k_ell, metrics.bound_series, "o", ms=3)
    ax.set_xlabel(r"$k_\ell$")
    ax.set_ylabel(r"$E_\ell$")
    paths.append(_save(fig, out_dir / f"{prefix}bounds.png"))

    if trace.steps:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot([s.k for s in trace.steps], [s.x[0] for s in trace.steps], "k-", label=r"$x_1$")
        ax.step(k_ell, [s.q[0] for s in trace.samples], "r-", where="post", label=r"$q_1$")
        ax.set_xlabel("k")
        ax.legend()
        paths.append(_save(fig, out_dir / f"{prefix}x1_q1.png"))
    return paths


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path
