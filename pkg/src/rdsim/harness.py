"""Seeded randomness, noise densities, trial execution and statistical gates.

RNG algorithm (fixed, so ports can reproduce sequences bit for bit)::

    mix(z)  = splitmix64 finaliser
              z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
              z = (z ^ z>>27) * 0x94D049BB133111EB
              z ^ z>>31                                   (all mod 2**64)
    key(seed, index) = mix(seed ^ mix(index + G))         G = 0x9E3779B97F4A7C15
    draw_j(key)      = mix(key + (j + 1) * G)             j = 0, 1, 2, ...
    uniform_j        = (draw_j >> 11) * 2**-53            in [0, 1)
    normal           = sqrt(-2 ln(1 - u_0)) * cos(2 pi u_1)

``draw_j(0)`` is the plain splitmix64 sequence seeded with 0, whose first
value is 0xE220A8397B1DCDAF.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.stats import chi2

from . import tolerances as tol
from .kernels import active as _k

U64_MASK = (1 << 64) - 1


class RngStream:
    """Counter-based stream identified by ``(root_seed, stream_index)``."""

    def __init__(self, root_seed: int, stream_index: int = 0):
        self.root_seed = int(root_seed) & U64_MASK
        self.stream_index = int(stream_index) & U64_MASK
        self.key = int(_k.stream_keys(np.uint64(self.root_seed), np.array([self.stream_index], dtype=np.uint64))[0])
        self.position = 0

    def split(self, index: int) -> "RngStream":
        return RngStream(self.root_seed ^ self.key, index)

    def raw(self, count: int) -> np.ndarray:
        out = _k.raw_draws(np.uint64(self.key), self.position, count)
        self.position += count
        return out

    def uniform(self, count: int | None = None):
        n = 1 if count is None else count
        out = _k.uniform_draws(np.uint64(self.key), self.position, n)
        self.position += n
        return float(out[0]) if count is None else out

    def normal(self, count: int | None = None):
        n = 1 if count is None else count
        u = self.uniform(2 * n).reshape(n, 2)
        z = np.sqrt(-2.0 * np.log(1.0 - u[:, 0])) * np.cos(2.0 * math.pi * u[:, 1])
        return float(z[0]) if count is None else z

    def integers(self, high: int, count: int) -> np.ndarray:
        """Uniform integers in [0, high) by multiply-shift on 53-bit uniforms."""
        return np.floor(self.uniform(count) * high).astype(np.int64)


@dataclass(frozen=True)
class NoiseDistribution:
    """Density of the environmental velocity kick.

    ``kind`` is ``"gaussian"`` (params mu, sigma), ``"uniform"`` (a, b) or
    ``"tabulated"`` (grid x, density values; piecewise linear in between).
    """

    kind: str
    params: tuple = ()
    grid: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind == "gaussian":
            mu, sigma = self.params
            if not (math.isfinite(mu) and math.isfinite(sigma)) or sigma <= 0:
                raise ValueError("gaussian noise needs finite mu and sigma > 0")
        elif self.kind == "uniform":
            a, b = self.params
            if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
                raise ValueError("uniform noise needs finite a < b")
        elif self.kind == "tabulated":
            x = np.asarray(self.grid, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
                raise ValueError("tabulated noise needs matching grid and density of length >= 2")
            if not np.all(np.diff(x) > 0):
                raise ValueError("tabulated grid must be strictly increasing")
            if not np.all(np.isfinite(y)) or np.any(y < 0):
                raise ValueError("tabulated density must be finite and non-negative")
            mass = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
            if abs(mass - 1.0) > tol.DENSITY_NORM_TOL:
                raise ValueError(f"tabulated density integrates to {mass!r}, not 1")
        else:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def gaussian(cls, mu: float = 0.0, sigma: float = 1.0) -> "NoiseDistribution":
        return cls("gaussian", (float(mu), float(sigma)))

    @classmethod
    def uniform(cls, a: float = -1.0, b: float = 1.0) -> "NoiseDistribution":
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def tabulated(cls, x: Sequence[float], density: Sequence[float]) -> "NoiseDistribution":
        return cls("tabulated", (), tuple(float(v) for v in x), tuple(float(v) for v in density))

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseDistribution":
        d = dict(d)
        kind = d.pop("kind", None)
        allowed = {"gaussian": {"mu", "sigma"}, "uniform": {"a", "b"}, "tabulated": {"x", "density"}}
        if kind not in allowed:
            raise ValueError(f"noise.kind must be one of {sorted(allowed)}, got {kind!r}")
        extra = set(d) - allowed[kind]
        if extra:
            raise ValueError(f"unknown noise keys: {sorted(extra)}")
        if kind == "gaussian":
            return cls.gaussian(d.get("mu", 0.0), d.get("sigma", 1.0))
        if kind == "uniform":
            return cls.uniform(d.get("a", -1.0), d.get("b", 1.0))
        return cls.tabulated(d["x"], d["density"])

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "mu": self.params[0], "sigma": self.params[1]}
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.params[0], "b": self.params[1]}
        return {"kind": "tabulated", "x": list(self.grid), "density": list(self.values)}

    @cached_property
    def density(self) -> Callable[[float], float]:
        """Scalar density with constants bound once; used by the quadrature."""
        if self.kind == "gaussian":
            mu, sigma = self.params
            inv, norm, exp = 1.0 / sigma, 1.0 / (sigma * math.sqrt(2.0 * math.pi)), math.exp
            return lambda x: norm * exp(-0.5 * ((x - mu) * inv) ** 2)
        return self.pdf

    def pdf(self, x: float) -> float:
        if self.kind == "gaussian":
            mu, sigma = self.params
            z = (x - mu) / sigma
            return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
        if self.kind == "uniform":
            a, b = self.params
            return 1.0 / (b - a) if a <= x <= b else 0.0
        return float(np.interp(x, self.grid, self.values, left=0.0, right=0.0))

    def support(self) -> tuple[float, float]:
        """Finite integration support; Gaussian tails cut at 12 sigma."""
        if self.kind == "gaussian":
            mu, sigma = self.params
            return mu - tol.GAUSS_TAIL_SIGMAS * sigma, mu + tol.GAUSS_TAIL_SIGMAS * sigma
        if self.kind == "uniform":
            return self.params
        return self.grid[0], self.grid[-1]

    def breakpoints(self) -> list[float]:
        if self.kind == "tabulated":
            return list(self.grid)
        if self.kind == "gaussian":
            return [self.support()[0], self.params[0], self.support()[1]]
        return list(self.support())

    def is_symmetric(self, center: float = 0.0) -> bool:
        if self.kind == "gaussian":
            return self.params[0] == center
        if self.kind == "uniform":
            return self.params[0] + self.params[1] == 2 * center
        x = np.asarray(self.grid)
        y = np.asarray(self.values)
        return bool(np.allclose(x + x[::-1], 2 * center) and np.allclose(y, y[::-1]))

    def inverse_cdf(self, u):
        """Quantile function used for sampling (gaussian handled separately)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            a, b = self.params
            return a + (b - a) * u
        if self.kind != "tabulated":
            raise ValueError("inverse_cdf is defined for uniform and tabulated noise")
        x = np.asarray(self.grid)
        f = np.asarray(self.values)
        h = np.diff(x)
        cell = 0.5 * (f[1:] + f[:-1]) * h
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        target = u * cdf[-1]
        j = np.clip(np.searchsorted(cdf, target, side="right") - 1, 0, h.size - 1)
        r = target - cdf[j]
        f0 = f[j]
        slope = (f[j + 1] - f0) / h[j]
        disc = np.maximum(f0 * f0 + 2.0 * slope * r, 0.0)
        denom = f0 + np.sqrt(disc)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return x[j] + np.clip(t, 0.0, h[j])


def sample(dist: NoiseDistribution, rng: RngStream) -> float:
    if dist.kind == "gaussian":
        mu, sigma = dist.params
        return mu + sigma * rng.normal()
    return float(dist.inverse_cdf(rng.uniform()))


def sample_per_trial(dist: NoiseDistribution, seed: int, start: int, stop: int) -> np.ndarray:
    """First draw of stream ``(seed, i)`` for each trial ``i`` in [start, stop).

    Equals ``[sample(dist, RngStream(seed, i)) for i in range(start, stop)]``.
    """
    keys = _k.stream_keys(np.uint64(int(seed) & U64_MASK), np.arange(start, stop, dtype=np.uint64))
    if dist.kind == "gaussian":
        mu, sigma = dist.params
        return mu + sigma * _k.first_normal_per_key(keys)
    return dist.inverse_cdf(_k.first_uniform_per_key(keys))


def run_chunked(fn: Callable[[int, int], np.ndarray], n: int, workers: int = 1,
                chunk: int = 8192) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over chunks of [0, n) and concatenate in order.

    Chunk boundaries do not depend on ``workers``, so output is identical
    for any worker count.
    """
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers <= 1 or len(bounds) <= 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass(frozen=True)
class OutcomeCounts:
    labels: tuple
    counts: tuple
    n_trials: int
    unresolved: int = 0
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.labels) != len(self.counts):
            raise ValueError("labels and counts differ in length")
        if any(c < 0 for c in self.counts) or self.unresolved < 0:
            raise ValueError("counts must be non-negative")
        if sum(self.counts) + self.unresolved != self.n_trials:
            raise ValueError("counts + unresolved must equal n_trials")

    def __getitem__(self, label) -> int:
        return self.counts[self.labels.index(label)]

    @property
    def resolved(self) -> int:
        return self.n_trials - self.unresolved

    def fractions(self) -> dict:
        """Exact count ratios over all trials."""
        n = self.n_trials
        return {lab: Fraction(c, n) for lab, c in zip(self.labels, self.counts)}

    def probabilities(self) -> dict:
        return {lab: c / self.n_trials for lab, c in zip(self.labels, self.counts)}

    def intervals(self, confidence: float = 0.95) -> dict:
        return {lab: wilson_interval(c, self.n_trials, confidence)
                for lab, c in zip(self.labels, self.counts)}

    def to_dict(self) -> dict:
        return {
            "labels": [str(x) for x in self.labels],
            "counts": list(self.counts),
            "n_trials": self.n_trials,
            "unresolved": self.unresolved,
            "seed": self.seed,
        }


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + 0.5 * confidence)
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def chi_square_gof(counts: OutcomeCounts, expected: Sequence[float],
                   alpha: float = 0.01) -> tuple[float, bool]:
    """Pearson goodness of fit over resolved counts; dof = labels - 1."""
    exp = np.asarray(expected, dtype=float)
    if exp.size != len(counts.counts):
        raise ValueError("expected has the wrong number of cells")
    if abs(exp.sum() - 1.0) > 1e-9 or np.any(exp < 0):
        raise ValueError("expected probabilities must be non-negative and sum to 1")
    n = sum(counts.counts)
    e = exp * n
    if np.any(e < 5):
        raise ValueError("under-sampled cells: every expected count must be >= 5")
    obs = np.asarray(counts.counts, dtype=float)
    stat = float(np.sum((obs - e) ** 2 / e))
    crit = float(chi2.isf(alpha, exp.size - 1))
    return stat, stat <= crit
