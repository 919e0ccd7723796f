import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from rdsim import tolerances as tol
from rdsim.born import (DEFAULT_CHAINS, Ensemble, OutcomeSymmetry, SymmetryViolation,
                        amplitude_swap_phase, born_probability, check_P1, check_P2,
                        demo_hamiltonian_blocks, demo_model, equal_amplitude_counts,
                        equal_amplitude_theorem, fine_grain, fine_grain_state, member_outcomes,
                        outcome_counts, phase_unitary, reference_states, tipping_angles,
                        verify_symmetry_rule)
from rdsim.linalg import OperatorMatrix, StateVector, unitarity_error
from rdsim.spinchain import ChainSpec

EQUAL2 = StateVector(np.array([1, 1]) / math.sqrt(2), (2,))


def test_equal_amplitudes_split_evenly(demo2):
    model, ens = demo2
    c = outcome_counts(model, EQUAL2, ens)
    assert c.counts == (32, 32) and c.unresolved == 0
    assert c.fractions() == {"a": Fraction(1, 2), "b": Fraction(1, 2)}


def test_basis_states_give_own_label(demo2):
    model, ens = demo2
    for k, lab in enumerate(model.labels):
        c = outcome_counts(model, StateVector.basis(k, 2), ens)
        assert c[lab] == len(ens)
        # the other label is never produced: count 0
        assert c[model.labels[1 - k]] == 0


def test_outcomes_vary_across_ensemble(demo2):
    model, ens = demo2
    outs = member_outcomes(model, EQUAL2, ens)
    assert len(set(outs)) == 2


def test_propagator_vs_scipy(demo2):
    model, _ = demo2
    u = model.propagator
    ref = scipy.linalg.expm(1j * model.evolution_time * model.hamiltonian.entries)
    assert np.max(np.abs(u - ref)) < 1e-10
    assert unitarity_error(u) < tol.PROPAGATOR_UNITARY_TOL


def test_evolution_is_linear(demo2):
    model, ens = demo2
    chi = ens.members[0].amplitudes
    u = model.propagator
    a, b = 0.6, 0.8j
    psi = np.kron(np.array([a, b]), chi)
    parts = a * u @ np.kron([1, 0], chi) + b * u @ np.kron([0, 1], chi)
    assert np.allclose(u @ psi, parts, atol=1e-13)


def test_two_label_map_is_magnetisation_sign(demo2):
    model, ens = demo2
    d_app = model.dims[1]
    evolved = model.propagator @ np.kron(EQUAL2.amplitudes, ens.members[5].amplitudes)
    labels = model.classify(evolved[:, None])
    # reduce to the chain: trace out system and environment
    x = evolved.reshape(2, d_app, 2)
    rho_chain_diag = np.einsum("sae,sae->a", x, x.conj()).real
    n = DEFAULT_CHAINS[2].n_sites
    idx = np.arange(d_app)
    m = sum((1 - 2 * ((idx >> (n - 1 - s)) & 1)) for s in range(n)) / n
    mag = float(rho_chain_diag @ m)
    expected = None if abs(mag) < tol.UNRESOLVED_MARGIN else ("a" if mag > 0 else "b")
    assert labels[0] == expected


def test_hamiltonian_blocks_commute_with_symmetries(demo2):
    model, ens = demo2
    h = model.hamiltonian.entries
    for phi in (0.1, 1.0, 2.5):
        full = np.kron(phase_unitary(2, phi).entries, model.phase_rest.entries)
        assert np.max(np.abs(full @ h - h @ full)) < tol.COMMUTATOR_TOL
    f = model.flip.full().entries
    assert np.max(np.abs(f @ h - h @ f)) < tol.COMMUTATOR_TOL


def test_P1_and_P2_on_reference_states(demo2):
    model, ens = demo2
    states = reference_states(2)
    assert len(states) >= 20
    for psi in states:
        a, b = psi.amplitudes
        rep = check_P1(model, ens, psi, [0.0, 0.4, math.pi / 2, amplitude_swap_phase(a, b)])
        assert rep.passed
    assert check_P2(model, ens, states).passed


def test_P2_three_labels(demo3):
    model, ens = demo3
    assert check_P2(model, ens, reference_states(3)).passed


def test_amplitude_swap_phase_maps_alpha_beta():
    rng = np.random.default_rng(5)
    for _ in range(10):
        t = rng.uniform(0, 2 * math.pi, 2)
        a, b = np.exp(1j * t) / math.sqrt(2)
        phi = amplitude_swap_phase(a, b)
        # U_phi (a, b) = (a e^{i phi}, b e^{-i phi}) is (b, a) up to a global phase
        img = np.array([a * np.exp(1j * phi), b * np.exp(-1j * phi)])
        ratio = img / np.array([b, a])
        assert abs(ratio[0] - ratio[1]) < 1e-12


def test_rule_violation_reports_witness(demo2):
    model, ens = demo2
    # a bit flip on the system alone with iota = id is not a symmetry of H
    bad = OutcomeSymmetry(OperatorMatrix([[0, 1], [1, 0]], unitary=True), model.phase_rest,
                          {"a": "a", "b": "b"})
    rep = verify_symmetry_rule(model, ens, bad, [StateVector.basis(0, 2)])
    assert not rep.passed
    assert rep.commutator > tol.COMMUTATOR_TOL
    assert rep.checks[0].witness == 0
    assert rep.to_dict()["failures"]


def test_ensemble_closure_enforced():
    shift = OperatorMatrix([[0, 1], [1, 0]], unitary=True)
    ok = Ensemble([StateVector.basis(0, 2), StateVector.basis(1, 2)], (shift,))
    assert ok.closure_defect() == 0.0
    with pytest.raises(SymmetryViolation):
        Ensemble([StateVector.basis(0, 2)], (shift,))
    with pytest.raises(ValueError):
        Ensemble([StateVector(np.array([1.0, 1.0]))])


def test_orbit_divisibility_enforced():
    with pytest.raises(ValueError, match="multiple"):
        demo_model(2, DEFAULT_CHAINS[2], 63)


def test_check_requires_declared_symmetry(demo2):
    model, ens = demo2
    bare = Ensemble(ens.members)
    with pytest.raises(ValueError):
        check_P2(model, bare, EQUAL2)
    with pytest.raises(ValueError):
        check_P1(model, bare, EQUAL2, [0.1])


def test_wrong_system_dimension(demo2):
    model, ens = demo2
    with pytest.raises(ValueError):
        outcome_counts(model, StateVector.basis(0, 3), ens)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_equal_amplitude_counts(n):
    size = {2: 64, 3: 63, 4: 64}[n]
    c = equal_amplitude_counts(n, size, seed=1, phases=np.linspace(0, 2, n))
    assert list(c.counts) == [size // n] * n and c.unresolved == 0
    assert [Fraction(x, size) for x in c.counts] == equal_amplitude_theorem(n)


def test_equal_amplitude_theorem_values():
    assert equal_amplitude_theorem(4) == [Fraction(1, 4)] * 4
    with pytest.raises(ValueError):
        equal_amplitude_theorem(0)


def test_tipping_angles_two_labels():
    full, partial = tipping_angles(2)
    assert full == pytest.approx(math.pi / 4)
    assert partial == pytest.approx(math.pi / 4 - math.asin(math.sqrt(1 / 3)))


def test_demo_blocks_hermitian():
    blocks, h_chain = demo_hamiltonian_blocks(3, ChainSpec(2, -1))
    for b in blocks:
        assert np.max(np.abs(b - b.conj().T)) < tol.HERMITIAN_TOL


def test_born_probability():
    psi = StateVector(np.array([0.6, 0.8j]))
    assert born_probability(psi, 1) == pytest.approx(0.64)
    with pytest.raises(IndexError):
        born_probability(psi, 2)


def test_fine_grain_one_third():
    assert fine_grain([math.sqrt(1 / 3), math.sqrt(2 / 3)]) == [Fraction(1, 3), Fraction(2, 3)]


def test_fine_grain_equal_amplitudes():
    assert fine_grain(np.ones(5) / math.sqrt(5)) == [Fraction(1, 5)] * 5


def test_fine_grain_state_structure():
    fg = fine_grain_state(np.array([1, 1j * math.sqrt(3)]) / 2)
    assert fg.total == 4 and fg.weights == (1, 3)
    assert fg.state.is_normalized()
    vec = fg.state.amplitudes.reshape(2, 4)
    nz = np.abs(vec) > 1e-12
    assert np.all(nz.sum(axis=0) == 1)
    assert np.allclose(np.abs(vec[nz]), 0.5)
    assert fg.branch_owner == (0, 1, 1, 1)


def test_fine_grain_rejects_irrational():
    with pytest.raises(ValueError):
        fine_grain([math.cos(1.0), math.sin(1.0)], max_denominator=64)


@st.composite
def rational_amplitudes(draw):
    m = draw(st.lists(st.integers(0, 20), min_size=1, max_size=5).filter(lambda v: 0 < sum(v) <= 64))
    phases = draw(st.lists(st.floats(0, 2 * math.pi), min_size=len(m), max_size=len(m)))
    total = sum(m)
    return np.sqrt(np.array(m) / total) * np.exp(1j * np.array(phases)), m, total


@given(rational_amplitudes())
def test_fine_grain_equals_born(data):
    amps, m, total = data
    probs = fine_grain(amps)
    assert probs == [Fraction(k, total) for k in m]
    psi = StateVector(amps)
    for j, p in enumerate(probs):
        assert abs(float(p) - born_probability(psi, j)) <= tol.FINE_GRAIN_TOL
