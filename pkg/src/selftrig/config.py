"""Experiment configuration files (JSON).

Schema::

    {
      "plant": {"A": [[...]], "B": [[...]], "K": [[...]]},
      "certificate": {"gamma_factor": 1.01},
      "encoder": {"N": 61, "partition": [1, 1, 1, 1], "E0": 1.1},
      "trigger": {"sigma": 0.28, "tau_max": 20},
      "sim": {"x0": [-1, -1, -1, 1], "horizon": 200, "assert_level": "check"},
      "output": {"directory": "out", "prefix": "n61_"},
      "sweep": {"N": [61, 101], "sigma": [0.28]}
    }

``plant`` takes either discrete ``A``/``B`` or continuous ``A_c``/``B_c``
with a period ``h``, and either ``K`` or LQR weights ``Q``/``R``.
Alternatively ``{"random": {"n": 3, "m": 1}}`` draws a feasible random
instance from the ``--seed``. ``certificate`` holds ``gamma`` or
``gamma_factor`` (default 1.01). ``partition`` defaults to one sensor per
coordinate; ``sweep`` is only read by the ``sweep`` command.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Bad config; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class PlantSpec:
    A: list | None = None
    B: list | None = None
    K: list | None = None
    A_c: list | None = None
    B_c: list | None = None
    h: float | None = None
    Q: list | None = None
    R: list | None = None
    random: dict | None = None


@dataclass
class ExperimentConfig:
    plant: PlantSpec
    N: int
    E0: float
    sigma: float
    tau_max: int
    x0: list[float] | None = None
    horizon: int = 200
    assert_level: str = "check"
    gamma: float | None = None
    gamma_factor: float = 1.01
    partition: list[int] | None = None
    out_dir: str = "out"
    prefix: str = ""
    sweep: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        plant = {k: v for k, v in asdict(self.plant).items() if v is not None}
        cert = {"gamma": self.gamma} if self.gamma is not None else {"gamma_factor": self.gamma_factor}
        enc = {"N": self.N, "E0": self.E0}
        if self.partition is not None:
            enc["partition"] = list(self.partition)
        sim = {"horizon": self.horizon, "assert_level": self.assert_level}
        if self.x0 is not None:
            sim["x0"] = list(self.x0)
        d = {
            "plant": plant,
            "certificate": cert,
            "encoder": enc,
            "trigger": {"sigma": self.sigma, "tau_max": self.tau_max},
            "sim": sim,
            "output": {"directory": self.out_dir, "prefix": self.prefix},
        }
        if self.sweep:
            d["sweep"] = self.sweep
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _section(raw: dict, name: str, required: bool = True) -> dict:
    if name not in raw:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    sec = raw[name]
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    return sec


def _number(sec: dict, path: str, key: str, *, integer=False, positive=True, default=None):
    if key not in sec:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "missing")
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _matrix(sec: dict, path: str, key: str):
    if key not in sec:
        return None
    v = sec[key]
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "not a numeric nested array") from None
    if arr.ndim != 2 or arr.size == 0:
        raise ConfigError(f"{path}.{key}", f"expected a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}.{key}", "contains non-finite entries")
    return v


def _vector(sec: dict, path: str, key: str):
    if key not in sec:
        return None
    v = sec[key]
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "not a numeric array") from None
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}.{key}", "expected a non-empty list of finite numbers")
    return v


def _plant(sec: dict) -> PlantSpec:
    known = {"A", "B", "K", "A_c", "B_c", "h", "Q", "R", "random"}
    extra = set(sec) - known
    if extra:
        raise ConfigError("plant", f"unknown keys {sorted(extra)}")
    if "random" in sec:
        if len(sec) > 1:
            raise ConfigError("plant.random", "cannot be combined with explicit matrices")
        r = sec["random"]
        if not isinstance(r, dict):
            raise ConfigError("plant.random", "must be an object")
        return PlantSpec(random=dict(r))
    spec = PlantSpec(**{k: _matrix(sec, "plant", k) for k in ("A", "B", "K", "A_c", "B_c", "Q", "R")})
    discrete = spec.A is not None or spec.B is not None
    continuous = spec.A_c is not None or spec.B_c is not None or "h" in sec
    if discrete == continuous:
        raise ConfigError("plant", "give exactly one of {A, B} or {A_c, B_c, h}")
    if discrete and (spec.A is None or spec.B is None):
        raise ConfigError("plant", "both A and B are required")
    if continuous:
        if spec.A_c is None or spec.B_c is None:
            raise ConfigError("plant", "A_c, B_c and h are all required")
        spec.h = _number(sec, "plant", "h")
    has_k = spec.K is not None
    has_qr = spec.Q is not None or spec.R is not None
    if has_k == has_qr:
        raise ConfigError("plant", "give exactly one of K or {Q, R}")
    if has_qr and (spec.Q is None or spec.R is None):
        raise ConfigError("plant", "both Q and R are required")
    return spec


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    plant = _plant(_section(raw, "plant"))
    cert = _section(raw, "certificate", required=False)
    enc = _section(raw, "encoder")
    trg = _section(raw, "trigger")
    sim = _section(raw, "sim")
    out = _section(raw, "output", required=False)

    gamma = None
    if "gamma" in cert and "gamma_factor" in cert:
        raise ConfigError("certificate", "give gamma or gamma_factor, not both")
    if "gamma" in cert:
        gamma = _number(cert, "certificate", "gamma")
    gamma_factor = _number(cert, "certificate", "gamma_factor", default=1.01)

    partition = enc.get("partition")
    if partition is not None:
        if (not isinstance(partition, list) or not partition
                or any(isinstance(p, bool) or not isinstance(p, int) or p < 1 for p in partition)):
            raise ConfigError("encoder.partition", "expected a list of positive integers")

    assert_level = sim.get("assert_level", "check")
    if assert_level not in ("off", "check", "strict"):
        raise ConfigError("sim.assert_level", f"must be off, check or strict, got {assert_level!r}")
    horizon = sim.get("horizon", 200)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 0:
        raise ConfigError("sim.horizon", f"expected a nonnegative integer, got {horizon!r}")

    sweep = raw.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep", "must be an object")

    return ExperimentConfig(
        plant=plant,
        N=_number(enc, "encoder", "N", integer=True),
        E0=_number(enc, "encoder", "E0"),
        sigma=_number(trg, "trigger", "sigma"),
        tau_max=_number(trg, "trigger", "tau_max", integer=True),
        x0=_vector(sim, "sim", "x0"),
        horizon=horizon,
        assert_level=assert_level,
        gamma=gamma,
        gamma_factor=gamma_factor,
        partition=partition,
        out_dir=str(out.get("directory", "out")),
        prefix=str(out.get("prefix", "")),
        sweep=sweep,
    )


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return parse_config(raw)
