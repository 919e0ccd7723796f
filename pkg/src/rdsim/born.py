"""Outcome counting over symmetric environment ensembles.

A measurement model is a total Hamiltonian on sys (x) app (x) env, an
evolution time T and a deterministic outcome map on evolved states. The
probability of label i for a system state psi is the fraction of ensemble
members chi for which ``a(U_T (psi (x) chi)) == i``, with
``U_T = exp(i H T)``. Probabilities are exact integer ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import tolerances as tol
from .harness import OutcomeCounts, RngStream
from .linalg import (OperatorMatrix, StateVector, hermiticity_error, matrix_exponential,
                     tensor_product, unitarity_error)
from .spinchain import ChainSpec, build_exchange_chain

LETTERS = "abcdefghijklmnopqrstuvwxyz"


class SymmetryViolation(AssertionError):
    pass


@dataclass(frozen=True)
class SectorOutcomeMap:
    """Label = colour with the largest mean occupation over the apparatus sites.

    States whose top two occupations differ by less than ``margin`` are
    outside the classifiable set and map to ``None``. For two colours the
    occupation gap is the chain z magnetisation.
    """

    n_labels: int
    n_sites: int
    d_env: int
    labels: tuple
    margin: float = tol.UNRESOLVED_MARGIN

    def weights(self, states: np.ndarray) -> np.ndarray:
        """Colour occupations, shape (n_labels, n_states), for column states."""
        d, n = self.n_labels, self.n_sites
        x = np.asarray(states).reshape((d,) + (d,) * n + (self.d_env, -1))
        prob = np.abs(x) ** 2
        w = np.zeros((d, prob.shape[-1]))
        for site in range(n):
            axes = tuple(a for a in range(prob.ndim - 1) if a != site + 1)
            w += prob.sum(axis=axes)
        return w / n

    def classify(self, states: np.ndarray) -> list:
        w = self.weights(states)
        order = np.argsort(-w, axis=0, kind="stable")
        top = np.take_along_axis(w, order[:1], axis=0)[0]
        second = np.take_along_axis(w, order[1:2], axis=0)[0]
        return [self.labels[int(order[0, j])] if top[j] - second[j] >= self.margin else None
                for j in range(w.shape[1])]

    def __call__(self, state: StateVector):
        return self.classify(state.amplitudes[:, None])[0]


@dataclass(frozen=True)
class OutcomeSymmetry:
    u_sys: OperatorMatrix
    u_rest: OperatorMatrix
    iota: dict

    def full(self) -> OperatorMatrix:
        return tensor_product(self.u_sys, self.u_rest)

    def map_label(self, label):
        return None if label is None else self.iota[label]


@dataclass(frozen=True)
class MeasurementModel:
    dims: tuple                     # (d_sys, d_app, d_env)
    hamiltonian: OperatorMatrix
    evolution_time: float
    labels: tuple
    outcome_map: Callable
    phase_rest: OperatorMatrix | None = None    # rest factor extending any diagonal U_sys
    flip: OutcomeSymmetry | None = None
    config: dict = field(default_factory=dict)
    _propagator: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if math.prod(self.dims) != self.hamiltonian.dim:
            raise ValueError(f"dims {self.dims} do not match Hamiltonian dimension")
        if hermiticity_error(self.hamiltonian.entries) >= tol.HERMITIAN_TOL:
            raise ValueError("Hamiltonian is not Hermitian")

    @property
    def d_sys(self) -> int:
        return self.dims[0]

    @property
    def d_rest(self) -> int:
        return self.dims[1] * self.dims[2]

    @cached_property
    def propagator(self) -> np.ndarray:
        """U_T = exp(i H T)."""
        if self._propagator is not None:
            u = np.asarray(self._propagator)
        else:
            u = matrix_exponential(1j * self.evolution_time * self.hamiltonian.entries).entries
        if unitarity_error(u) >= tol.PROPAGATOR_UNITARY_TOL:
            raise ValueError("propagator is not unitary")
        return u

    def classify(self, states: np.ndarray) -> list:
        fn = getattr(self.outcome_map, "classify", None)
        if fn is not None:
            return fn(states)
        return [self.outcome_map(StateVector(states[:, j], self.dims))
                for j in range(states.shape[1])]

    def phase_symmetry(self, u_sys: OperatorMatrix) -> OutcomeSymmetry:
        if self.phase_rest is None:
            raise ValueError("model declares no extension for system phase rotations")
        return OutcomeSymmetry(u_sys, self.phase_rest, {lab: lab for lab in self.labels})


@dataclass(frozen=True)
class Ensemble:
    members: tuple
    declared_symmetries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "declared_symmetries", tuple(self.declared_symmetries))
        if not self.members:
            raise ValueError("ensemble is empty")
        for m in self.members:
            if not m.is_normalized():
                raise ValueError("ensemble members must be normalized")
        defect = self.closure_defect()
        if defect > tol.STATE_MATCH_TOL:
            raise SymmetryViolation(f"ensemble not closed under declared symmetries (defect {defect:.3e})")

    def __len__(self):
        return len(self.members)

    def matrix(self) -> np.ndarray:
        return np.stack([m.amplitudes for m in self.members], axis=1)

    def closure_defect(self) -> float:
        """Worst distance from V chi to the nearest member, over V and chi."""
        worst = 0.0
        for v in self.declared_symmetries:
            x = self.matrix()
            y = v.entries @ x
            match = self.permutation(v)
            worst = max(worst, float(np.max(np.linalg.norm(y - x[:, match], axis=0))))
        return worst

    def permutation(self, v: OperatorMatrix) -> list[int]:
        """Index of the member nearest to V chi, for each chi."""
        x = self.matrix()
        y = v.entries @ x
        d2 = np.sum(np.abs(x) ** 2, axis=0)[None, :] - 2 * np.real(y.conj().T @ x)
        return [int(i) for i in np.argmin(d2, axis=1)]

    def has_symmetry(self, v: OperatorMatrix) -> bool:
        return any(v.dim == s.dim and np.max(np.abs(v.entries - s.entries)) < tol.STATE_MATCH_TOL
                   for s in self.declared_symmetries)


def _product_columns(psi: StateVector, ens: Ensemble) -> np.ndarray:
    return np.kron(psi.amplitudes[:, None], ens.matrix())


def member_outcomes(model: MeasurementModel, psi: StateVector, ens: Ensemble) -> list:
    """a(U_T (psi (x) chi)) for every member chi, in member order."""
    if psi.dim != model.d_sys:
        raise ValueError(f"system state has dimension {psi.dim}, model expects {model.d_sys}")
    if not psi.is_normalized():
        raise ValueError("system state must be normalized")
    return model.classify(model.propagator @ _product_columns(psi, ens))


def _tally(labels: Sequence, outcomes: Sequence, seed=None) -> OutcomeCounts:
    counts = [sum(1 for o in outcomes if o == lab) for lab in labels]
    unresolved = sum(1 for o in outcomes if o is None)
    return OutcomeCounts(tuple(labels), tuple(counts), len(outcomes), unresolved, seed)


def outcome_counts(model: MeasurementModel, psi: StateVector, ens: Ensemble) -> OutcomeCounts:
    """Per-label member counts; unresolved members are tallied separately."""
    return _tally(model.labels, member_outcomes(model, psi, ens))


@dataclass
class RuleCheck:
    state_index: int
    counts: dict
    image_counts: dict
    passed: bool
    witness: int | None = None

    def to_dict(self) -> dict:
        return {"state": self.state_index, "counts": self.counts,
                "image_counts": self.image_counts, "passed": self.passed,
                "witness_member": self.witness}


@dataclass
class SymmetryReport:
    name: str
    commutator: float
    closure_defect: float
    checks: list

    @property
    def passed(self) -> bool:
        return (self.commutator < tol.COMMUTATOR_TOL and self.closure_defect <= tol.STATE_MATCH_TOL
                and all(c.passed for c in self.checks))

    def to_dict(self) -> dict:
        return {"name": self.name, "commutator_norm": self.commutator,
                "closure_defect": self.closure_defect, "passed": self.passed,
                "n_states": len(self.checks),
                "failures": [c.to_dict() for c in self.checks if not c.passed]}


def _label_counts(c: OutcomeCounts) -> dict:
    d = {str(lab): n for lab, n in zip(c.labels, c.counts)}
    d["unresolved"] = c.unresolved
    return d


def verify_symmetry_rule(model: MeasurementModel, ens: Ensemble, sym: OutcomeSymmetry,
                         test_states: Sequence[StateVector], name: str = "rule") -> SymmetryReport:
    """Check p_i(psi) == p_iota(i)(U_sys psi) as integer counts for each test state.

    Also checks member by member that a(U_T U~ (psi x chi)) equals
    iota(a(U_T (psi x chi))); the first failing member is the witness.
    """
    full = sym.full()
    comm = float(np.max(np.abs(full.entries @ model.hamiltonian.entries
                               - model.hamiltonian.entries @ full.entries)))
    closure = Ensemble(ens.members, (sym.u_rest,)).closure_defect() if not ens.has_symmetry(sym.u_rest) \
        else ens.closure_defect()
    x = _product_columns
    checks = []
    for k, psi in enumerate(test_states):
        base = member_outcomes(model, psi, ens)
        image_psi = StateVector(sym.u_sys.entries @ psi.amplitudes, psi.dims)
        image = member_outcomes(model, image_psi, ens)
        c_base = _tally(model.labels, base)
        c_img = _tally(model.labels, image)
        ok = all(c_base[i] == c_img[sym.iota[i]] for i in model.labels) \
            and c_base.unresolved == c_img.unresolved
        # per-member diagram: a(U_T U~ x) vs iota(a(U_T x))
        moved = model.classify(model.propagator @ (full.entries @ x(psi, ens)))
        witness = next((j for j, (b, m) in enumerate(zip(base, moved)) if sym.map_label(b) != m), None)
        checks.append(RuleCheck(k, _label_counts(c_base), _label_counts(c_img),
                                ok and witness is None, witness))
    return SymmetryReport(name, comm, closure, checks)


def phase_unitary(dim: int, phi: float, pair: tuple = (0, 1)) -> OperatorMatrix:
    """diag(1, .., e^{i phi}, .., e^{-i phi}, .., 1) on the given index pair."""
    j, k = pair
    diag = np.ones(dim, dtype=np.complex128)
    diag[j] = np.exp(1j * phi)
    diag[k] = np.exp(-1j * phi)
    return OperatorMatrix(np.diag(diag), unitary=True)


def amplitude_swap_phase(alpha: complex, beta: complex) -> float:
    """phi with e^{i phi} = 2 conj(alpha) beta, for |alpha| = |beta| = 1/sqrt(2)."""
    return float(np.angle(np.conj(alpha) * beta))


def check_P1(model: MeasurementModel, ens: Ensemble, psi: StateVector,
             phis: Sequence[float], pair: tuple = (0, 1)) -> SymmetryReport:
    """Counts unchanged under system phase rotations U_phi (iota = identity)."""
    if model.phase_rest is None or not ens.has_symmetry(model.phase_rest):
        raise ValueError("the phase-rotation extension is not among the declared symmetries")
    checks = []
    comm = closure = 0.0
    for phi in phis:
        sym = model.phase_symmetry(phase_unitary(model.d_sys, phi, pair))
        rep = verify_symmetry_rule(model, ens, sym, [psi], "P1")
        comm = max(comm, rep.commutator)
        closure = max(closure, rep.closure_defect)
        for c in rep.checks:
            c.state_index = len(checks)
            checks.append(c)
    return SymmetryReport("P1", comm, closure, checks)


def check_P2(model: MeasurementModel, ens: Ensemble, psi: StateVector | Sequence[StateVector]) -> SymmetryReport:
    """count_i(psi) == count_pi(i)(U_pi psi) for the model's exchange symmetry."""
    if model.flip is None or not ens.has_symmetry(model.flip.u_rest):
        raise ValueError("the exchange symmetry is not among the declared symmetries")
    states = [psi] if isinstance(psi, StateVector) else list(psi)
    return verify_symmetry_rule(model, ens, model.flip, states, "P2")


def equal_amplitude_theorem(n: int) -> list[Fraction]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return [Fraction(1, n)] * n


def born_probability(psi: StateVector, basis_index: int) -> float:
    if not 0 <= basis_index < psi.dim:
        raise IndexError(f"basis index {basis_index} out of range for dimension {psi.dim}")
    return float(abs(psi.amplitudes[basis_index]) ** 2)


@dataclass(frozen=True)
class FineGrained:
    """Equal-modulus branch expansion of a rationally weighted state."""

    weights: tuple          # m_j
    total: int              # M
    state: StateVector      # on sys (x) ancilla(M)
    branch_owner: tuple     # outcome j for each ancilla branch

    @property
    def probabilities(self) -> list[Fraction]:
        return [Fraction(m, self.total) for m in self.weights]


def fine_grain_state(amplitudes: Sequence[complex], max_denominator: int = 4096,
                     rtol: float = tol.FINE_GRAIN_TOL) -> FineGrained:
    amps = np.asarray(amplitudes, dtype=np.complex128)
    sq = np.abs(amps) ** 2
    fracs = []
    for p in sq:
        f = Fraction(float(p)).limit_denominator(max_denominator)
        if abs(float(f) - p) > rtol:
            raise ValueError(f"squared modulus {p!r} is not a rational with denominator <= {max_denominator}")
        fracs.append(f)
    if sum(fracs) != 1:
        raise ValueError("squared moduli must sum to exactly 1")
    M = math.lcm(*(f.denominator for f in fracs))
    if M > max_denominator:
        raise ValueError(f"common denominator {M} exceeds {max_denominator}")
    weights = tuple(int(f * M) for f in fracs)
    d = amps.size
    vec = np.zeros((d, M), dtype=np.complex128)
    owner = []
    b = 0
    for j, m in enumerate(weights):
        for _ in range(m):
            vec[j, b] = amps[j] / math.sqrt(m)
            owner.append(j)
            b += 1
    return FineGrained(weights, M, StateVector(vec.ravel(), (d, M)), tuple(owner))


def fine_grain(amplitudes: Sequence[complex], max_denominator: int = 4096) -> list[Fraction]:
    """Probabilities m_j / M via equal-amplitude branch counting."""
    fg = fine_grain_state(amplitudes, max_denominator)
    d, M = fg.state.dims
    vec = fg.state.amplitudes.reshape(d, M)
    # each ancilla branch carries exactly one nonzero component of modulus 1/sqrt(M)
    occupied = np.abs(vec) > 0.5 / math.sqrt(M)
    if not np.all(occupied.sum(axis=0) == 1):
        raise AssertionError("fine-grained branches are not disjoint")
    mods = np.abs(vec[occupied])
    if np.max(np.abs(mods - 1.0 / math.sqrt(M))) > tol.FINE_GRAIN_TOL:
        raise AssertionError("fine-grained branches do not have equal amplitude")
    branch_p = equal_amplitude_theorem(M)
    owner = np.argmax(occupied, axis=0)
    return [sum((branch_p[b] for b in range(M) if owner[b] == j), Fraction(0)) for j in range(d)]


# --- demo tipping model -------------------------------------------------------

def _cyclic_shift(d: int) -> np.ndarray:
    s = np.zeros((d, d))
    for k in range(d):
        s[(k + 1) % d, k] = 1.0
    return s


def _kron_all(mats):
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = np.kron(out, m)
    return out


def tipping_angles(d: int) -> tuple[float, float]:
    """(full, partial) collective rotation angles toward the system colour.

    Full rotation takes the uniform site state onto the colour. The partial
    angle leaves a colour-gap fraction x = 1/(d + 1) so that basis inputs
    and equal-amplitude inputs have equal worst-case occupation gaps.
    """
    full = math.acos(1.0 / math.sqrt(d))
    partial = full - math.asin(math.sqrt((d - 1) / (d + 1)))
    return full, partial


def _rotation_generator(d: int, k: int) -> np.ndarray:
    """Real antisymmetric A with exp(theta A) turning the uniform state toward |k>."""
    plus = np.full(d, 1.0 / math.sqrt(d))
    ek = np.zeros(d)
    ek[k] = 1.0
    perp = plus - plus[k] * ek
    perp /= np.linalg.norm(perp)
    return np.outer(ek, perp) - np.outer(perp, ek)


def demo_hamiltonian_blocks(d: int, chain: ChainSpec, time: float = 1.0):
    """Rest Hamiltonians H_k (system colour k) and the chain Hamiltonian."""
    n = chain.n_sites
    full, partial = tipping_angles(d)
    h_chain = build_exchange_chain(chain, d).entries
    eye_env = np.eye(d)
    blocks = []
    for k in range(d):
        g = -1j * _rotation_generator(d, k)
        collective = sum(_kron_all([g if s == site else np.eye(d) for s in range(n)])
                         for site in range(n))
        hk = np.kron(h_chain, eye_env)
        for c in range(d):
            rate = (full if c == k else partial) / time
            proj = np.zeros((d, d))
            proj[c, c] = 1.0
            hk = hk + rate * np.kron(collective, proj)
        blocks.append(hk)
    return blocks, h_chain


def _check_orbit_divisibility(n_labels: int, ens_size: int):
    if ens_size <= 0 or ens_size % n_labels:
        raise ValueError(f"ens_size={ens_size} must be a positive multiple of n_labels={n_labels} "
                         "(the exchange-orbit size)")


def demo_model(n_labels: int = 2, chain: ChainSpec | None = None, ens_size: int = 64,
               seed: int = 0, chain_noise: float = 0.02, env_noise: float = 0.15,
               max_resample: int = 1000):
    """Build the tipping model and a symmetric ensemble.

    Apparatus: a ferromagnetic exchange chain of ``n_labels``-level sites
    (the spin-1/2 Heisenberg chain for two labels) prepared near the
    uniform superposition on every site. System colour k drives a collective
    rotation of the chain toward colour k. An environment register in colour
    c speeds the rotation toward c, completing it when c == k.

    Symmetries: any diagonal system unitary commutes with H with the
    identity on the rest; the cyclic colour shift on every factor commutes
    with H and acts on labels as k -> k + 1.
    """
    d = int(n_labels)
    if d < 2:
        raise ValueError("n_labels must be >= 2")
    chain = chain or ChainSpec(4, -1)
    _check_orbit_divisibility(d, ens_size)
    n = chain.n_sites
    d_app = d ** n
    total = d * d_app * d
    if total > tol.MAX_DIM:
        raise ValueError(f"total dimension {total} exceeds cap {tol.MAX_DIM}")
    T = 1.0
    labels = tuple(LETTERS[k] for k in range(d))

    blocks, _ = demo_hamiltonian_blocks(d, chain, T)
    shift = _cyclic_shift(d)
    rest_shift = _kron_all([shift] * n + [shift])
    u0 = matrix_exponential(1j * T * blocks[0]).entries
    prop_blocks = [u0]
    for k in range(1, d):
        prop_blocks.append(rest_shift @ prop_blocks[-1] @ rest_shift.conj().T)
    d_rest = d_app * d
    ham = np.zeros((total, total), dtype=np.complex128)
    prop = np.zeros_like(ham)
    for k in range(d):
        sl = slice(k * d_rest, (k + 1) * d_rest)
        ham[sl, sl] = blocks[k]
        prop[sl, sl] = prop_blocks[k]

    outcome_map = SectorOutcomeMap(d, n, d, labels)
    flip = OutcomeSymmetry(OperatorMatrix(shift, unitary=True),
                           OperatorMatrix(rest_shift, unitary=True),
                           {labels[k]: labels[(k + 1) % d] for k in range(d)})
    config = {"n_labels": d, "chain": chain.to_dict(), "ens_size": ens_size, "seed": seed,
              "chain_noise": chain_noise, "env_noise": env_noise}
    model = MeasurementModel((d, d_app, d), OperatorMatrix(ham, dims=(d, d_app, d)), T, labels,
                             outcome_map, OperatorMatrix.identity(d_rest), flip, config, prop)

    rng = RngStream(seed, 0)
    plus = np.full(d_app, 1.0 / math.sqrt(d_app), dtype=np.complex128)
    members = []
    basis_states = [StateVector.basis(k, d) for k in range(d)]
    uniform_state = StateVector(np.full(d, 1.0 / math.sqrt(d)), (d,))
    attempts = 0
    while len(members) < ens_size:
        attempts += 1
        if attempts > max_resample + ens_size // d:
            raise RuntimeError("could not draw enough well-conditioned ensemble seeds")
        xi = rng.normal(2 * d_app).view(np.complex128)
        chain_part = plus + chain_noise * xi / np.linalg.norm(xi)
        chain_part /= np.linalg.norm(chain_part)
        colour = int(rng.integers(d, 1)[0])
        zeta = rng.normal(2 * d).view(np.complex128)
        env_part = np.zeros(d, dtype=np.complex128)
        env_part[colour] = 1.0
        env_part = env_part + env_noise * zeta / np.linalg.norm(zeta)
        env_part /= np.linalg.norm(env_part)
        seed_state = np.kron(chain_part, env_part)
        orbit = [seed_state]
        for _ in range(d - 1):
            orbit.append(rest_shift @ orbit[-1])
        trial = Ensemble([StateVector(v, (d_app, d)) for v in orbit])
        # keep seeds whose orbit gives clean outcomes on the reference inputs
        ok = all(o == labels[k] for k, b in enumerate(basis_states)
                 for o in member_outcomes(model, b, trial))
        ok = ok and None not in member_outcomes(model, uniform_state, trial)
        if ok:
            members.extend(trial.members)
    ens = Ensemble(members, (model.phase_rest, flip.u_rest))
    return model, ens


def demo_from_config(cfg: dict):
    cfg = dict(cfg)
    chain = cfg.pop("chain", None)
    if isinstance(chain, dict):
        chain = ChainSpec(**chain)
    return demo_model(chain=chain, **cfg)


DEFAULT_CHAINS = {2: ChainSpec(4, -1), 3: ChainSpec(3, -1), 4: ChainSpec(2, -1)}


def equal_amplitude_counts(n: int, ens_size: int | None = None, seed: int = 0,
                           phases: Sequence[float] | None = None):
    """Counts of the n-label demo model on an equal-amplitude input."""
    ens_size = ens_size or 12 * n
    model, ens = demo_model(n, DEFAULT_CHAINS.get(n, ChainSpec(2, -1)), ens_size, seed)
    ph = np.zeros(n) if phases is None else np.asarray(phases, dtype=float)
    psi = StateVector(np.exp(1j * ph) / math.sqrt(n), (n,))
    return outcome_counts(model, psi, ens)


def reference_states(d: int, n_random: int = 12, seed: int = 7) -> list[StateVector]:
    """Basis, equal-amplitude (with phases) and random system states."""
    states = [StateVector.basis(k, d) for k in range(d)]
    rng = RngStream(seed, 1)
    for _ in range(max(4, 8 - d)):
        ph = 2 * math.pi * rng.uniform(d)
        states.append(StateVector(np.exp(1j * ph) / math.sqrt(d), (d,)))
    for _ in range(n_random):
        z = rng.normal(2 * d).view(np.complex128)
        states.append(StateVector(z / np.linalg.norm(z), (d,)))
    return states
