"""Command-line front end.

    selftrig certify --config exp.json [--out DIR]
    selftrig run     --config exp.json [--out DIR] [--assert strict] [--plot]
    selftrig sweep   --config exp.json [--N 61,101] [--sigma 0.28] [--workers 4]

Exit codes: 0 success (for ``certify``: design feasible), 1 bad input or
certificate failure, 2 design infeasible (``certify``), 3 a runtime check
failed under ``--assert strict`` (``run``).
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import report as rpt
from .certify import CertificateError, check_design, compute_certificate
from .codec import EncoderConfig
from .config import ConfigError, ExperimentConfig, load_config
from .linops import DimensionError, dlqr, spectral_radius, zoh_discretize
from .simkit import CheckViolation, PlantModel, random_instance, simulate
from .trigger import TriggerConfig, ZenoError

log = logging.getLogger("selftrig")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_VIOLATION = 0, 1, 2, 3
SWEEP_COLUMNS = ["index", "N", "sigma", "feasible", "omega", "transmissions",
                 "total_bits", "avg_quant_error", "status"]


@dataclass
class Setup:
    plant: PlantModel
    rho: float
    cert: object
    enc: EncoderConfig
    trg: TriggerConfig
    x0: np.ndarray | None


def build_plant(cfg: ExperimentConfig, seed: int | None = None) -> PlantModel:
    spec = cfg.plant
    if spec.random is not None:
        rng = np.random.default_rng(seed)
        plant, *_ = random_instance(rng, n=spec.random.get("n"), m=spec.random.get("m"))
        return plant
    if spec.A_c is not None:
        A, B = zoh_discretize(spec.A_c, spec.B_c, spec.h)
    else:
        A, B = np.array(spec.A, dtype=float), np.array(spec.B, dtype=float)
    K = np.array(spec.K, dtype=float) if spec.K is not None else dlqr(A, B, spec.Q, spec.R)
    return PlantModel(A, B, K)


def build_setup(cfg: ExperimentConfig, seed: int | None = None) -> Setup:
    try:
        plant = build_plant(cfg, seed)
    except DimensionError as exc:
        raise ConfigError("plant", str(exc)) from None
    rho = spectral_radius(plant.A_cl)
    gamma = cfg.gamma if cfg.gamma is not None else round(cfg.gamma_factor * rho, 4)
    if gamma <= rho:
        raise CertificateError(
            f"certificate failure: gamma = {gamma:.6g} does not exceed the spectral "
            f"radius {rho:.6g} of A + BK")
    cert = compute_certificate(plant.A_cl, gamma)
    partition = cfg.partition if cfg.partition is not None else [1] * plant.n
    if sum(partition) != plant.n:
        raise ConfigError("encoder.partition", f"sizes sum to {sum(partition)}, state has {plant.n}")
    enc = EncoderConfig(tuple(partition), cfg.N, cfg.E0)
    trg = TriggerConfig(cfg.sigma, cfg.tau_max)
    x0 = None
    if cfg.x0 is not None:
        x0 = np.array(cfg.x0, dtype=float)
        if x0.shape[0] != plant.n:
            raise ConfigError("sim.x0", f"has {x0.shape[0]} entries, state has {plant.n}")
    elif cfg.plant.random is not None:
        x0 = np.random.default_rng(seed).uniform(-cfg.E0, cfg.E0, plant.n)
    return Setup(plant, rho, cert, enc, trg, x0)


def _out_dir(cfg: ExperimentConfig, args) -> Path:
    d = Path(args.out) if args.out else Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_certify(cfg: ExperimentConfig, args) -> int:
    s = build_setup(cfg, args.seed)
    rep = check_design(s.plant, s.cert, s.enc.N, s.trg.sigma, s.trg.tau_max)
    out = _out_dir(cfg, args)
    text = rpt.design_text(s.rho, s.cert, rep)
    (out / f"{cfg.prefix}report.txt").write_text(text, encoding="utf-8")
    (out / f"{cfg.prefix}report.json").write_text(rpt.design_json(s.rho, s.cert, rep), encoding="utf-8")
    print(text, end="")
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def _ideal_norms(plant: PlantModel, x0, horizon: int) -> list[float]:
    x = np.array(x0, dtype=float)
    out = [float(np.max(np.abs(x)))]
    for _ in range(horizon):
        x = plant.A_cl @ x
        out.append(float(np.max(np.abs(x))))
    return out


def cmd_run(cfg: ExperimentConfig, args) -> int:
    s = build_setup(cfg, args.seed)
    if s.x0 is None:
        raise ConfigError("sim.x0", "missing")
    level = args.assert_level or cfg.assert_level
    try:
        trace, met = simulate(s.plant, s.cert, s.enc, s.trg, s.x0, cfg.horizon, level)
    except CheckViolation as exc:
        d = exc.diagnostic
        print(f"check '{d.check}' failed at k={d.k} (sample {d.ell}): {d.lhs!r} > {d.rhs!r}",
              file=sys.stderr)
        return EXIT_VIOLATION
    out = _out_dir(cfg, args)
    p = cfg.prefix
    rpt.write_steps(out / f"{p}steps.csv", trace, s.plant.n, s.plant.m)
    rpt.write_samples(out / f"{p}samples.csv", trace, s.plant.n)
    rpt.write_metrics(out / f"{p}metrics.json", met, {
        "diagnostics": [d.__dict__ for d in trace.diagnostics],
        "clipped_samples": sum(smp.clipped for smp in trace.samples),
    })
    if args.plot:
        rpt.plot_run(out, p, trace, met, _ideal_norms(s.plant, s.x0, cfg.horizon))
    print(f"transmissions={met.n_transmissions}")
    print(f"avg_quant_error={met.avg_quant_error!r}")
    print(f"total_bits={met.total_bits}")
    if trace.diagnostics:
        print(f"diagnostics={len(trace.diagnostics)}")
    return EXIT_OK


def _sweep_point(job) -> dict:
    index, N, sigma, setup, horizon, level, force = job
    rep = check_design(setup.plant, setup.cert, N, sigma, setup.trg.tau_max)
    row = {"index": index, "N": N, "sigma": sigma, "feasible": rep.feasible, "omega": rep.omega}
    if not rep.feasible and not force:
        row["status"] = "infeasible"
        return row
    enc = EncoderConfig(setup.enc.partition, N, setup.enc.E0)
    trg = TriggerConfig(sigma, setup.trg.tau_max)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _, met = simulate(setup.plant, setup.cert, enc, trg, setup.x0, horizon, level)
    except (ZenoError, CheckViolation) as exc:
        row["status"] = f"error: {exc}"
        return row
    row.update(transmissions=met.n_transmissions, total_bits=met.total_bits,
               avg_quant_error=met.avg_quant_error,
               status="ok" if rep.feasible else "forced")
    return row


def _csv_list(text: str, kind):
    return [kind(t) for t in text.split(",") if t.strip()]


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    s = build_setup(cfg, args.seed)
    if s.x0 is None:
        raise ConfigError("sim.x0", "missing")
    try:
        Ns = _csv_list(args.N, int) if args.N else [int(v) for v in cfg.sweep.get("N", [cfg.N])]
        sigmas = (_csv_list(args.sigma, float) if args.sigma
                  else [float(v) for v in cfg.sweep.get("sigma", [cfg.sigma])])
    except (TypeError, ValueError) as exc:
        raise ConfigError("sweep", str(exc)) from None
    for N in Ns:
        if N < 1:
            raise ConfigError("sweep.N", f"must be positive, got {N}")
    for sg in sigmas:
        if not sg > 0:
            raise ConfigError("sweep.sigma", f"must be positive, got {sg}")
    level = args.assert_level or cfg.assert_level
    jobs = [(i, N, sg, s, cfg.horizon, level, args.force)
            for i, (N, sg) in enumerate(itertools.product(Ns, sigmas))]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    rows.sort(key=lambda r: r["index"])
    out = _out_dir(cfg, args)
    path = out / f"{cfg.prefix}sweep.csv"
    rpt.write_table(path, SWEEP_COLUMNS, rows)
    for r in rows:
        print(f"N={r['N']} sigma={r['sigma']:g} feasible={'yes' if r['feasible'] else 'no'} "
              f"transmissions={r.get('transmissions', '-')} status={r['status']}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selftrig", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("certify", "compute the certificate and check the design window"),
                           ("run", "simulate the closed loop and write traces"),
                           ("sweep", "simulate a grid of N and sigma values")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--assert", dest="assert_level", choices=("off", "check", "strict"))
        p.add_argument("--seed", type=int, default=None, help="seed for random plants")
        if name == "run":
            p.add_argument("--plot", action="store_true", help="also render PNG figures")
        if name == "sweep":
            p.add_argument("--N", help="comma-separated quantization levels")
            p.add_argument("--sigma", help="comma-separated thresholds")
            p.add_argument("--force", action="store_true", help="simulate infeasible points too")
            p.add_argument("--workers", type=int, default=1)
    return parser


COMMANDS = {"certify": cmd_certify, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except CertificateError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ZenoError, DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
