"""Classical randomizing device: a pendulum pushed to the separatrix.

Units: mass = length = g = 1. The pendulum starts hanging down (phi = 0)
and is pushed in the +phi direction. Outcome R means it passes over the
top at phi = +pi, L that it swings back first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .harness import NoiseDistribution, OutcomeCounts, run_chunked, sample_per_trial
from .kernels import INTEGRATORS, active as _k
from .quadrature import integrate_pieces

CRITICAL_ENERGY = 1.0   # potential energy -cos(phi) at the top


class Outcome(str, enum.Enum):
    L = "L"
    R = "R"


class UnresolvedOutcome(ValueError):
    """Initial condition sits exactly on the separatrix."""


def energy(phi, phi_dot):
    return 0.5 * np.square(phi_dot) - np.cos(phi)


def critical_velocity() -> float:
    # 1/2 v^2 - cos(0) = -cos(pi)  =>  v = 2
    return math.sqrt(2.0 * (CRITICAL_ENERGY + math.cos(0.0)))


@dataclass(frozen=True)
class PendulumState:
    phi: float
    phi_dot: float
    time: float = 0.0

    @property
    def energy(self) -> float:
        return float(energy(self.phi, self.phi_dot))


@dataclass(frozen=True)
class Trajectory:
    time: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    crossed: bool
    crossing_time: float | None

    @property
    def states(self) -> list[PendulumState]:
        return [PendulumState(float(p), float(v), float(t))
                for t, p, v in zip(self.time, self.phi, self.phi_dot)]

    @property
    def energy(self) -> np.ndarray:
        return energy(self.phi, self.phi_dot)

    def __len__(self):
        return self.time.size


@dataclass(frozen=True)
class PendulumExperiment:
    delta_phi_dot_0: float
    noise: NoiseDistribution = field(default_factory=NoiseDistribution.gaussian)
    t_max: float = 100.0
    dt: float = 1e-3
    integrator: str = "yoshida4"

    def __post_init__(self):
        if not math.isfinite(self.delta_phi_dot_0):
            raise ValueError("delta_phi_dot_0 must be finite")
        if not (self.dt > 0 and self.t_max > 0):
            raise ValueError("dt and t_max must be positive")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {sorted(INTEGRATORS)}")

    def effective_velocity(self, kick):
        return critical_velocity() + self.delta_phi_dot_0 + kick


def integrate(start: PendulumState, dt: float, t_max: float, method: str = "leapfrog",
              stop_at_top: bool = True) -> Trajectory:
    """Integrate phi'' + sin(phi) = 0 from ``start``.

    Stops early once |phi| >= pi when ``stop_at_top``; the crossing time is
    linearly interpolated between the bracketing steps.
    """
    if not (dt > 0 and t_max > 0):
        raise ValueError("dt and t_max must be positive")
    if not (math.isfinite(start.phi) and math.isfinite(start.phi_dot)):
        raise FloatingPointError("non-finite initial state")
    t, p, v, t_cross = _k.trajectory(float(start.phi), float(start.phi_dot), float(dt),
                                     float(t_max), INTEGRATORS[method], bool(stop_at_top))
    if t_cross == -2.0:
        raise FloatingPointError("integration produced a non-finite state")
    crossed = t_cross >= 0.0
    return Trajectory(t + start.time, p, v, crossed,
                      start.time + t_cross if crossed else None)


def classify_energy(phi_dot_eff: float) -> Outcome:
    vc = critical_velocity()
    if phi_dot_eff > vc:
        return Outcome.R
    if phi_dot_eff < vc:
        return Outcome.L
    raise UnresolvedOutcome("effective velocity lies exactly on the separatrix")


def classify_dynamics(phi_dot_eff: float, dt: float = 1e-3, t_max: float = 100.0,
                      method: str = "yoshida4") -> Outcome:
    code = int(_k.classify_batch(0.0, np.array([float(phi_dot_eff)]), dt, t_max,
                                 INTEGRATORS[method])[0])
    if code < 0:
        raise UnresolvedOutcome(f"no decision within t_max={t_max}")
    return Outcome.R if code == 1 else Outcome.L


def outcome_probabilities(delta: float, noise: NoiseDistribution) -> tuple[float, float]:
    """(p_L, p_R): mass of the kick density below and above -delta."""
    cut = -float(delta)
    lo, hi = noise.support()
    if noise.kind == "gaussian":
        mu, sigma = noise.params
        reach = tol.GAUSS_TAIL_SIGMAS * sigma
        # keep at least 12 sigma of window on each side of the cut so
        # far-tail probabilities stay positive
        lo, hi = min(lo, cut - reach), max(hi, cut + reach)
    bps = noise.breakpoints() + [lo, hi]
    left = [b for b in bps if lo <= b <= min(cut, hi)] + [lo, max(lo, min(cut, hi))]
    right = [b for b in bps if max(cut, lo) <= b <= hi] + [min(hi, max(cut, lo)), hi]
    p_l = integrate_pieces(noise.density, left)
    p_r = integrate_pieces(noise.density, right)
    total = p_l + p_r
    if abs(total - 1.0) > tol.DENSITY_NORM_TOL:
        raise ValueError(f"noise density integrates to {total!r}, not 1")
    # the residual is quadrature error; dividing it out makes the pair sum to 1
    return p_l / total, p_r / total


def amplitudes(p_l: float, p_r: float) -> tuple[float, float]:
    """Square-root amplitudes of an L/R probability pair."""
    if p_l < 0 or p_r < 0:
        raise ValueError("probabilities must be non-negative")
    if p_l > 1 or p_r > 1 or abs(p_l + p_r - 1.0) > tol.PROB_SUM_TOL:
        raise ValueError("probabilities must lie in [0, 1] and sum to 1")
    return math.sqrt(p_l), math.sqrt(p_r)


def trial_velocities(exp: PendulumExperiment, seed: int, start: int, stop: int) -> np.ndarray:
    return exp.effective_velocity(sample_per_trial(exp.noise, seed, start, stop))


def trial_codes(exp: PendulumExperiment, seed: int, start: int, stop: int,
                dynamics: bool = False) -> np.ndarray:
    """Per-trial outcome codes: 1 = R, 0 = L, -1 = unresolved."""
    v = trial_velocities(exp, seed, start, stop)
    if dynamics:
        return _k.classify_batch(0.0, v, exp.dt, exp.t_max, INTEGRATORS[exp.integrator])
    vc = critical_velocity()
    return np.where(v > vc, 1, np.where(v < vc, 0, -1)).astype(np.int8)


def run_pendulum_trials(exp: PendulumExperiment, n: int, seed: int, *,
                        dynamics: bool = False, workers: int = 1) -> OutcomeCounts:
    """Monte Carlo over environmental kicks; trial i uses RNG stream (seed, i)."""
    if n <= 0:
        raise ValueError("n must be positive")
    codes = run_chunked(lambda a, b: trial_codes(exp, seed, a, b, dynamics), n, workers)
    n_r = int(np.count_nonzero(codes == 1))
    n_l = int(np.count_nonzero(codes == 0))
    return OutcomeCounts(("L", "R"), (n_l, n_r), n, n - n_l - n_r, seed)
