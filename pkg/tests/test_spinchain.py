import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdsim import tolerances as tol
from rdsim.linalg import PAULI_X, PAULI_Z, OperatorMatrix, StateVector, unitarity_error
from rdsim.spinchain import (U_PI, ChainSpec, bond_operator, build_exchange_chain,
                             build_heisenberg, commutator_norm, global_unitary, ground_space,
                             order_parameter, pauli_conjugation_check, phase_rotation,
                             sensitivity_scan, site_operator, su2_element, total_spin)


def kron_oracle(spec):
    return spec.coupling_sign * sum(bond_operator(i, j, spec.n_sites).entries
                                    for i, j in spec.bonds())


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_swap_construction_equals_pauli_sum(n, sign, boundary):
    spec = ChainSpec(n, sign, boundary)
    assert np.array_equal(build_heisenberg(spec).entries, kron_oracle(spec))


def test_chain_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec(1)
    with pytest.raises(ValueError):
        ChainSpec(3, 2)
    with pytest.raises(ValueError):
        ChainSpec(3, 1, "twisted")
    assert ChainSpec(3, 1, "periodic").bonds() == [(0, 1), (1, 2), (2, 0)]


def test_dimension_cap():
    with pytest.raises(ValueError):
        build_heisenberg(ChainSpec(13))


def test_afm_two_site_spectrum():
    w = np.linalg.eigvalsh(build_heisenberg(ChainSpec(2, 1)).entries)
    assert np.allclose(w, [-3, 1, 1, 1])
    g = ground_space(build_heisenberg(ChainSpec(2, 1)))
    assert g.degeneracy == 1 and g.energy == pytest.approx(-3)
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert abs(np.vdot(singlet, g.states[0].amplitudes)) == pytest.approx(1)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_fm_ground_multiplet(n):
    # fully symmetric multiplet: N + 1 states at energy -(N - 1) for open chains
    g = ground_space(build_heisenberg(ChainSpec(n, -1)))
    oracle = np.linalg.eigvalsh(build_heisenberg(ChainSpec(n, -1)).entries)
    assert g.degeneracy == n + 1 == int(np.sum(oracle <= oracle[0] + 1e-9))
    assert g.energy == pytest.approx(-(n - 1), abs=1e-10)
    gram = np.array([[np.vdot(a.amplitudes, b.amplitudes) for b in g.states] for a in g.states])
    assert np.allclose(gram, np.eye(n + 1), atol=1e-10)


def test_periodic_afm_four_site_energy():
    # known ground energy of the 4-site periodic AFM ring: -8
    g = ground_space(build_heisenberg(ChainSpec(4, 1, "periodic")))
    assert g.energy == pytest.approx(-8.0, abs=1e-10) and g.degeneracy == 1


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_su2_and_flip_symmetry(n, rng):
    for spec in (ChainSpec(n, 1), ChainSpec(n, -1, "periodic")):
        h = build_heisenberg(spec)
        for _ in range(5):
            u = su2_element(rng.normal(size=3))
            assert commutator_norm(h, global_unitary(u, n)) < tol.COMMUTATOR_TOL
        assert commutator_norm(h, global_unitary(U_PI, n)) < tol.COMMUTATOR_TOL
        for ax in "xyz":
            assert commutator_norm(h, total_spin(ax, n)) < tol.COMMUTATOR_TOL


def test_field_breaks_symmetry():
    h = build_heisenberg(ChainSpec(3, -1)).entries - 0.1 * total_spin("z", 3).entries
    op = OperatorMatrix(h)
    assert commutator_norm(op, global_unitary(U_PI, 3)) > 0.1


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_su2_element_is_unitary_det_one(a):
    u = su2_element(a).entries
    assert unitarity_error(u) < tol.UNITARY_TOL
    assert abs(np.linalg.det(u) - 1) < 1e-12


def test_phase_rotation_form():
    u = phase_rotation(0.3).entries
    assert np.allclose(u, np.diag([np.exp(0.3j), np.exp(-0.3j)]))


def test_pauli_conjugation_identities():
    rep = pauli_conjugation_check()
    assert rep["passed"]
    assert rep["z"]["sign"] == -1 and rep["x"]["sign"] == 1 and rep["y"]["sign"] == -1
    assert all(rep[a]["max_deviation"] <= 1e-14 for a in "xyz")


def test_global_unitary_requires_unitary():
    with pytest.raises(ValueError):
        global_unitary(OperatorMatrix([[1, 1], [0, 1]]), 2)


def test_site_operator_placement():
    # site 0 is the most significant factor
    z0 = site_operator(PAULI_Z, 0, 2).entries
    assert np.allclose(np.diag(z0), [1, 1, -1, -1])


def test_total_spin_z_diagonal():
    assert np.allclose(np.diag(total_spin("z", 2).entries), [2, 0, 0, -2])
    x = total_spin("x", 2).entries
    assert np.allclose(x, site_operator(PAULI_X, 0, 2).entries + site_operator(PAULI_X, 1, 2).entries)


def test_order_parameter_values():
    up = StateVector.basis(0, (2, 2, 2))
    assert order_parameter(up) == 1.0
    plus = StateVector(np.ones(8) / math.sqrt(8), (2, 2, 2))
    assert order_parameter(plus, "x") == pytest.approx(1.0)
    assert order_parameter(plus, "z") == pytest.approx(0.0)
    with pytest.raises(ValueError):
        order_parameter(StateVector(np.ones(3) / math.sqrt(3)))
    with pytest.raises(ValueError):
        order_parameter(up, "w")


def test_sensitivity_examples():
    rows = sensitivity_scan(ChainSpec(4, -1), [-1e-6, 0.0, 1e-6])
    assert rows[0].order_parameter == pytest.approx(-1, abs=1e-9)
    assert rows[2].order_parameter == pytest.approx(1, abs=1e-9)
    assert rows[1].degenerate and rows[1].order_parameter is None
    # gap of the field-split multiplet is 2h (one spin flipped costs 2h)
    assert rows[2].gap == pytest.approx(2e-6, rel=1e-3)


@given(st.floats(1e-8, 2.0))
def test_sensitivity_antisymmetric(h):
    a, b = sensitivity_scan(ChainSpec(3, -1), [h, -h])
    assert a.order_parameter == pytest.approx(1.0, abs=1e-9)
    assert a.order_parameter + b.order_parameter == pytest.approx(0, abs=tol.ORDER_PARAM_TOL)


def test_sensitivity_requires_ferromagnet():
    with pytest.raises(ValueError):
        sensitivity_scan(ChainSpec(4, 1), [0.1])


def test_exchange_chain_three_levels_symmetry():
    # SU(3) exchange commutes with any u^{(x)N}
    h = build_exchange_chain(ChainSpec(3, -1), 3)
    x = np.random.default_rng(0).normal(size=(3, 3)) + 1j * np.random.default_rng(1).normal(size=(3, 3))
    q, _ = np.linalg.qr(x)
    assert commutator_norm(h, global_unitary(OperatorMatrix(q), 3)) < tol.COMMUTATOR_TOL
