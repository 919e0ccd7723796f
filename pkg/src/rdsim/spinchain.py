"""Heisenberg-chain randomizing device: construction, symmetries, ground spaces.

Basis convention: site 0 is the leftmost tensor factor (most significant
bit) and level 0 is spin up, the +1 eigenstate of sigma_z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import tolerances as tol
from .linalg import (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, OperatorMatrix, StateVector,
                     commutator, hermitian_eigensystem, tensor_all, unitarity_error)


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    coupling_sign: int = 1
    boundary: str = "open"

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError("n_sites must be an integer >= 2")
        if self.coupling_sign not in (1, -1):
            raise ValueError("coupling_sign must be +1 (antiferromagnetic) or -1 (ferromagnetic)")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    def bonds(self) -> list[tuple[int, int]]:
        b = [(l, l + 1) for l in range(self.n_sites - 1)]
        if self.boundary == "periodic":
            b.append((self.n_sites - 1, 0))
        return b

    def to_dict(self) -> dict:
        return {"n_sites": self.n_sites, "coupling_sign": self.coupling_sign,
                "boundary": self.boundary}


def _check_dim(dim: int):
    if dim > tol.MAX_DIM:
        raise ValueError(f"Hilbert dimension {dim} exceeds cap {tol.MAX_DIM}")


def site_operator(op: OperatorMatrix, site: int, n_sites: int) -> OperatorMatrix:
    """``op`` acting on one site of an ``n_sites`` spin-1/2 chain."""
    _check_dim(2 ** n_sites)
    ops = [PAULI_I] * n_sites
    ops[site] = op
    return tensor_all(ops)


def bond_operator(i: int, j: int, n_sites: int) -> OperatorMatrix:
    """sigma_i . sigma_j built from Kronecker products of Paulis."""
    total = 0
    for p in (PAULI_X, PAULI_Y, PAULI_Z):
        total = total + site_operator(p, i, n_sites).entries @ site_operator(p, j, n_sites).entries
    return OperatorMatrix(total, hermitian=True, dims=(2,) * n_sites)


def _swap_permutation(i: int, j: int, n_sites: int, levels: int) -> np.ndarray:
    idx = np.arange(levels ** n_sites)
    digits = [(idx // levels ** (n_sites - 1 - s)) % levels for s in range(n_sites)]
    wi, wj = levels ** (n_sites - 1 - i), levels ** (n_sites - 1 - j)
    return idx + (digits[j] - digits[i]) * wi + (digits[i] - digits[j]) * wj


def build_exchange_chain(spec: ChainSpec, levels: int = 2) -> OperatorMatrix:
    """sign * sum over bonds of (2 SWAP - 1) for ``levels``-state sites.

    For two levels 2 SWAP - 1 is exactly sigma_i . sigma_j, so this is the
    Heisenberg chain; for more levels it is the SU(levels) exchange chain.
    """
    dim = levels ** spec.n_sites
    _check_dim(dim)
    h = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for i, j in spec.bonds():
        perm = _swap_permutation(i, j, spec.n_sites, levels)
        h[perm, cols] += 2.0 * spec.coupling_sign
        h[cols, cols] -= spec.coupling_sign
    return OperatorMatrix(h, hermitian=True, dims=(levels,) * spec.n_sites)


def build_heisenberg(spec: ChainSpec) -> OperatorMatrix:
    """sign * sum over bonds of sigma_l . sigma_{l+1}."""
    return build_exchange_chain(spec, 2)


def total_spin(axis: str, n_sites: int) -> OperatorMatrix:
    p = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[axis]
    if axis == "z":
        _check_dim(2 ** n_sites)
        idx = np.arange(2 ** n_sites)
        ups = sum(1 - ((idx >> (n_sites - 1 - s)) & 1) for s in range(n_sites))
        return OperatorMatrix(np.diag(2.0 * ups - n_sites), hermitian=True, dims=(2,) * n_sites)
    total = sum(site_operator(p, s, n_sites).entries for s in range(n_sites))
    return OperatorMatrix(total, hermitian=True, dims=(2,) * n_sites)


def phase_rotation(phi: float) -> OperatorMatrix:
    """diag(e^{i phi}, e^{-i phi})."""
    return OperatorMatrix(np.diag([np.exp(1j * phi), np.exp(-1j * phi)]), unitary=True)


U_PI = OperatorMatrix([[0, 1], [1, 0]], hermitian=True, unitary=True)


def su2_element(a: Sequence[float]) -> OperatorMatrix:
    """exp(i a . sigma) in closed form."""
    a = np.asarray(a, dtype=float)
    theta = float(np.linalg.norm(a))
    if theta == 0.0:
        return OperatorMatrix(np.eye(2), unitary=True)
    n = a / theta
    gen = n[0] * PAULI_X.entries + n[1] * PAULI_Y.entries + n[2] * PAULI_Z.entries
    return OperatorMatrix(math.cos(theta) * np.eye(2) + 1j * math.sin(theta) * gen, unitary=True)


def global_unitary(u: OperatorMatrix, n: int) -> OperatorMatrix:
    """u applied to every one of ``n`` sites."""
    if unitarity_error(u.entries) >= tol.UNITARY_TOL:
        raise ValueError("global_unitary needs a unitary single-site operator")
    _check_dim(u.dim ** n)
    return OperatorMatrix(tensor_all([u] * n).entries, dims=(u.dim,) * n)


def commutator_norm(a: OperatorMatrix, b: OperatorMatrix) -> float:
    """Largest entry magnitude of AB - BA."""
    return float(np.max(np.abs(commutator(a, b))))


def pauli_conjugation_check() -> dict:
    """Deviations of U_pi s U_pi from the expected sign flips of x, y, z."""
    u = U_PI.entries
    expected = {"x": (PAULI_X, 1.0), "y": (PAULI_Y, -1.0), "z": (PAULI_Z, -1.0)}
    report = {}
    for axis, (p, sign) in expected.items():
        dev = float(np.max(np.abs(u @ p.entries @ u - sign * p.entries)))
        report[axis] = {"sign": sign, "max_deviation": dev,
                        "passed": dev <= tol.CONJUGATION_TOL}
    report["passed"] = all(r["passed"] for r in report.values())
    return report


@dataclass(frozen=True)
class GroundSpace:
    energy: float
    states: tuple
    degeneracy: int
    tol: float


def ground_space(h: OperatorMatrix, tol: float = 1e-9) -> GroundSpace:
    w, v = hermitian_eigensystem(h)
    sel = np.flatnonzero(w <= w[0] + tol)
    q, _ = np.linalg.qr(v[:, sel])
    # QR may flip phases; keep the eigensolver's convention where possible
    phases = np.sum(np.conj(q) * v[:, sel], axis=0)
    q = q * np.where(np.abs(phases) > 0, phases / np.abs(phases), 1.0)
    states = tuple(StateVector(q[:, k], h.dims) for k in range(sel.size))
    return GroundSpace(float(w[0]), states, int(sel.size), tol)


def order_parameter(s: StateVector, axis: str = "z") -> float:
    """Per-site magnetisation <sum_l sigma_l^axis> / N of a spin-1/2 chain state."""
    n = int(round(math.log2(s.dim)))
    if 2 ** n != s.dim:
        raise ValueError("state is not a spin-1/2 chain state")
    psi = s.amplitudes.reshape((2,) * n)
    total = 0.0
    for site in range(n):
        a = np.moveaxis(psi, site, 0)
        up, dn = a[0].ravel(), a[1].ravel()
        if axis == "z":
            total += float(np.vdot(up, up).real - np.vdot(dn, dn).real)
        elif axis == "x":
            total += 2.0 * float(np.vdot(up, dn).real)
        elif axis == "y":
            total += 2.0 * float(np.vdot(up, dn).imag)
        else:
            raise ValueError(f"axis must be x, y or z, got {axis!r}")
    return total / n


@dataclass(frozen=True)
class SensitivityPoint:
    field: float
    order_parameter: float | None
    degenerate: bool
    ground_energy: float
    gap: float

    def to_dict(self) -> dict:
        return {"field": self.field, "order_parameter": self.order_parameter,
                "degenerate": self.degenerate, "ground_energy": self.ground_energy,
                "gap": self.gap}


def sensitivity_scan(spec: ChainSpec, fields: Iterable[float],
                     degeneracy_tol: float = 1e-9) -> list[SensitivityPoint]:
    """Ground-state z magnetisation of H - h sum_l sigma_l^z for each field h."""
    if spec.coupling_sign != -1:
        raise ValueError("sensitivity_scan needs the ferromagnetic chain (coupling_sign=-1)")
    h0 = build_heisenberg(spec).entries
    sz = total_spin("z", spec.n_sites).entries
    rows = []
    for hf in fields:
        hf = float(hf)
        w, v = hermitian_eigensystem(OperatorMatrix(h0 - hf * sz, dims=(2,) * spec.n_sites))
        gap = float(w[1] - w[0])
        degenerate = hf == 0.0 or gap <= degeneracy_tol
        m = None if degenerate else order_parameter(StateVector(v[:, 0], (2,) * spec.n_sites), "z")
        rows.append(SensitivityPoint(hf, m, degenerate, float(w[0]), gap))
    return rows
