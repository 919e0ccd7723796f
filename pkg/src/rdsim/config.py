"""Experiment configuration: JSON in, fully validated dataclass out.

Every experiment file looks like::

    {"kind": "pendulum", "seed": 42,
     "parameters": {...},
     "output": {"path": "out.json", "format": "json"}}

``parameters`` and ``output`` are optional; missing parameters take the
defaults below. Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .born import DEFAULT_CHAINS

KINDS = ("pendulum", "spinchain", "born")
FORMATS = ("json", "csv")
U64_MAX = 2 ** 64 - 1

PENDULUM_DEFAULTS = {
    "delta": 0.0,
    "noise": {"kind": "gaussian", "mu": 0.0, "sigma": 1.0},
    "n_trials": 100_000,
    "dt": 1e-3,
    "t_max": 100.0,
    "mode": "energy",
    "integrator": "yoshida4",
    "confidence": 0.95,
}

SPINCHAIN_DEFAULTS = {
    "N": 4,
    "sign": -1,
    "boundary": "open",
    "fields": [-1e-2, -1e-4, -1e-6, 0.0, 1e-6, 1e-4, 1e-2],
    "n_unitaries": 100,
    "n_eigenvalues": 8,
}

BORN_DEFAULTS = {
    "n_labels": 2,
    "chain": None,          # per-label default chain
    "ens_size": None,       # 64, 63 or 64 for 2, 3, 4 labels
    "amplitudes": None,     # equal amplitudes
    "checks": ["P1", "P2", "equal_amplitude", "fine_grain"],
    "phis": [0.0, math.pi / 7, math.pi / 2, math.pi],
    "n_random_states": 12,
}
BORN_CHECKS = ("P1", "P2", "equal_amplitude", "fine_grain")
BORN_ENS_DEFAULT = {2: 64, 3: 63, 4: 64}


class ConfigError(ValueError):
    """Validation failure; ``field`` is the dotted path of the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    parameters: dict
    output_path: str | None = None
    output_format: str = "json"

    def echo(self) -> dict:
        """Inputs as they were actually used; valid as a config file on its own."""
        return {"kind": self.kind, "seed": self.seed, "parameters": self.parameters}


def _reject_unknown(d: dict, allowed, where: str):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{where}.{k}" if where else k, "unknown key")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return (isinstance(x, (int, float)) and not isinstance(x, bool)) and math.isfinite(x)


def _int(d, key, where, lo=None, hi=None):
    v = d[key]
    if not _is_int(v):
        raise ConfigError(f"{where}.{key}", f"must be an integer, got {v!r}")
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        bounds = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ConfigError(f"{where}.{key}", f"must be {bounds}, got {v}")
    return v


def _float(d, key, where, positive=False):
    v = d[key]
    if not _is_num(v):
        raise ConfigError(f"{where}.{key}", f"must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {v}")
    return float(v)


def _choice(d, key, where, options):
    v = d[key]
    if v not in options:
        raise ConfigError(f"{where}.{key}", f"must be one of {list(options)}, got {v!r}")
    return v


def _float_list(d, key, where):
    v = d[key]
    if not isinstance(v, list) or not v or not all(_is_num(x) for x in v):
        raise ConfigError(f"{where}.{key}", "must be a non-empty list of finite numbers")
    return [float(x) for x in v]


def _noise(v, where):
    from .harness import NoiseDistribution
    if not isinstance(v, dict):
        raise ConfigError(where, "must be an object")
    try:
        dist = NoiseDistribution.from_dict(v)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(where, str(exc)) from None
    return dist.to_dict()


def _pendulum(p: dict) -> dict:
    w = "parameters"
    _reject_unknown(p, PENDULUM_DEFAULTS, w)
    p = {**PENDULUM_DEFAULTS, **p}
    out = {
        "delta": _float(p, "delta", w),
        "noise": _noise(p["noise"], f"{w}.noise"),
        "n_trials": _int(p, "n_trials", w, 1, 10 ** 9),
        "dt": _float(p, "dt", w, positive=True),
        "t_max": _float(p, "t_max", w, positive=True),
        "mode": _choice(p, "mode", w, ("energy", "dynamics")),
        "integrator": _choice(p, "integrator", w, ("leapfrog", "yoshida4", "rk4")),
        "confidence": _float(p, "confidence", w, positive=True),
    }
    if not out["confidence"] < 1:
        raise ConfigError(f"{w}.confidence", "must lie in (0, 1)")
    return out


def _spinchain(p: dict) -> dict:
    w = "parameters"
    _reject_unknown(p, SPINCHAIN_DEFAULTS, w)
    p = {**SPINCHAIN_DEFAULTS, **p}
    return {
        "N": _int(p, "N", w, 2, 12),
        "sign": _choice(p, "sign", w, (1, -1)),
        "boundary": _choice(p, "boundary", w, ("open", "periodic")),
        "fields": _float_list(p, "fields", w),
        "n_unitaries": _int(p, "n_unitaries", w, 0, 10_000),
        "n_eigenvalues": _int(p, "n_eigenvalues", w, 1),
    }


def _chain(v, where) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(where, "must be an object")
    _reject_unknown(v, ("N", "sign", "boundary"), where)
    v = {"sign": -1, "boundary": "open", **v}
    if "N" not in v:
        raise ConfigError(f"{where}.N", "is required")
    return {"N": _int(v, "N", where, 2, 12), "sign": _choice(v, "sign", where, (1, -1)),
            "boundary": _choice(v, "boundary", where, ("open", "periodic"))}


def _amplitudes(v, n, where) -> list:
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(where, f"must be a list of {n} amplitudes")
    out = []
    for k, a in enumerate(v):
        if _is_num(a):
            out.append([float(a), 0.0])
        elif isinstance(a, list) and len(a) == 2 and all(_is_num(x) for x in a):
            out.append([float(a[0]), float(a[1])])
        else:
            raise ConfigError(f"{where}[{k}]", "must be a number or a [re, im] pair")
    norm = sum(re * re + im * im for re, im in out)
    if abs(norm - 1.0) > 1e-9:
        raise ConfigError(where, f"squared norm is {norm!r}, expected 1")
    return out


def _born(p: dict) -> dict:
    w = "parameters"
    _reject_unknown(p, BORN_DEFAULTS, w)
    p = {**BORN_DEFAULTS, **p}
    n = _int(p, "n_labels", w, 2, 4)
    if p["chain"] is None:
        c = DEFAULT_CHAINS[n]
        chain = {"N": c.n_sites, "sign": c.coupling_sign, "boundary": c.boundary}
    else:
        chain = _chain(p["chain"], f"{w}.chain")
    if p["ens_size"] is None:
        ens = BORN_ENS_DEFAULT[n]
    else:
        ens = _int(p, "ens_size", w, 1, 100_000)
    if ens % n:
        raise ConfigError(f"{w}.ens_size", f"must be a multiple of n_labels={n} (orbit size)")
    if n * n * n ** chain["N"] > 4096:
        raise ConfigError(f"{w}.chain.N", "total Hilbert dimension exceeds 4096")
    amps = p["amplitudes"]
    if amps is None:
        amps = [[1.0 / math.sqrt(n), 0.0]] * n
    amps = _amplitudes(amps, n, f"{w}.amplitudes")
    checks = p["checks"]
    if not isinstance(checks, list) or any(c not in BORN_CHECKS for c in checks):
        raise ConfigError(f"{w}.checks", f"must be a list drawn from {list(BORN_CHECKS)}")
    return {"n_labels": n, "chain": chain, "ens_size": ens, "amplitudes": amps,
            "checks": [c for c in BORN_CHECKS if c in checks],
            "phis": _float_list(p, "phis", w),
            "n_random_states": _int(p, "n_random_states", w, 0, 1000)}


VALIDATORS = {"pendulum": _pendulum, "spinchain": _spinchain, "born": _born}


def parse_config(raw: dict, kind: str | None = None) -> ExperimentConfig:
    """Validate a decoded JSON object. ``kind`` (from the subcommand) must agree."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    _reject_unknown(raw, ("kind", "seed", "parameters", "output"), "")
    k = raw.get("kind", kind)
    if k not in KINDS:
        raise ConfigError("kind", f"must be one of {list(KINDS)}, got {k!r}")
    if kind is not None and k != kind:
        raise ConfigError("kind", f"config is for {k!r} but the subcommand is {kind!r}")
    seed = raw.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed <= U64_MAX:
        raise ConfigError("seed", f"must be an integer in [0, 2**64), got {seed!r}")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("parameters", "must be an object")
    params = VALIDATORS[k](params)
    out = raw.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output", "must be an object")
    _reject_unknown(out, ("path", "format"), "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "must be a string")
    fmt = out.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"must be one of {list(FORMATS)}, got {fmt!r}")
    return ExperimentConfig(k, seed, params, path, fmt)


def load_config(path: str | Path, kind: str | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    # a report can be fed back in: its echoed inputs are a complete config
    if isinstance(raw, dict) and str(raw.get("schema", "")).startswith("rdsim-report"):
        raw = raw.get("config")
    return parse_config(raw, kind)
