"""Dense complex linear algebra over small tensor-product Hilbert spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from . import tolerances as tol
from .kernels import active as _k


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes with a tensor factorisation ``dims``."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        dims = tuple(int(d) for d in self.dims) or (amps.size,)
        if any(d <= 0 for d in dims):
            raise DimensionError(f"dims must be positive, got {dims}")
        if math.prod(dims) != amps.size:
            raise DimensionError(f"dims {dims} do not factor {amps.size} amplitudes")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int] | int) -> "StateVector":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        n = math.prod(dims)
        if not 0 <= index < n:
            raise IndexError(f"basis index {index} out of range for dimension {n}")
        amps = np.zeros(n, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm, self.dims)

    def is_normalized(self, atol: float = tol.NORM_TOL) -> bool:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0) < atol

    def __len__(self):
        return self.dim


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense square complex matrix; ``hermitian``/``unitary`` flags are checked."""

    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator has non-finite entries")
        dims = tuple(int(d) for d in self.dims) or (m.shape[0],)
        if math.prod(dims) != m.shape[0]:
            raise DimensionError(f"dims {dims} do not factor dimension {m.shape[0]}")
        if self.hermitian and hermiticity_error(m) >= tol.HERMITIAN_TOL:
            raise NotHermitianError("flagged hermitian but |A - A^H| too large")
        if self.unitary and unitarity_error(m) >= tol.UNITARY_TOL:
            raise ValueError("flagged unitary but |A^H A - I| too large")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "OperatorMatrix":
        return cls(np.eye(n), hermitian=True, unitary=True)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            if other.dim != self.dim:
                raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")
            return OperatorMatrix(self.entries @ other.entries, dims=self.dims)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.hermitian, self.unitary, self.dims)


def hermiticity_error(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def unitarity_error(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) if m.size else 0.0


PAULI_I = OperatorMatrix(np.eye(2), hermitian=True, unitary=True)
PAULI_X = OperatorMatrix([[0, 1], [1, 0]], hermitian=True, unitary=True)
PAULI_Y = OperatorMatrix([[0, -1j], [1j, 0]], hermitian=True, unitary=True)
PAULI_Z = OperatorMatrix([[1, 0], [0, -1]], hermitian=True, unitary=True)


def tensor_product(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product; entry (i*n + k, j*n + l) = a[i, j] * b[k, l]."""
    return OperatorMatrix(
        np.kron(a.entries, b.entries),
        hermitian=a.hermitian and b.hermitian,
        unitary=a.unitary and b.unitary,
        dims=a.dims + b.dims,
    )


def tensor_all(ops: Sequence[OperatorMatrix]) -> OperatorMatrix:
    return reduce(tensor_product, ops)


def tensor_states(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)


def apply(op: OperatorMatrix, s: StateVector) -> StateVector:
    if op.dim != s.dim:
        raise DimensionError(f"operator dimension {op.dim} vs state dimension {s.dim}")
    return StateVector(op.entries @ s.amplitudes, s.dims)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.dim != b.dim:
        raise DimensionError(f"state dimensions differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(op: OperatorMatrix, s: StateVector) -> complex:
    return inner(s, apply(op, s))


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> np.ndarray:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch {a.dim} vs {b.dim}")
    return a.entries @ b.entries - b.entries @ a.entries


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # make the largest-magnitude component of each column real positive;
    # first such index wins among near-ties
    mags = np.abs(vecs)
    out = vecs.copy()
    for j in range(vecs.shape[1]):
        col = mags[:, j]
        idx = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        c = vecs[idx, j]
        out[:, j] = vecs[:, j] * (np.conj(c) / abs(c))
    return out


def hermitian_eigensystem(h: OperatorMatrix | np.ndarray, *, max_sweeps: int = 100):
    """Eigenvalues (ascending) and orthonormal eigenvectors by cyclic Jacobi.

    Returns ``(eigenvalues, vectors)`` where ``vectors[:, k]`` pairs with
    ``eigenvalues[k]``. Use :func:`eigenstates` for StateVector objects.
    """
    m = h.entries if isinstance(h, OperatorMatrix) else np.asarray(h, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"operator must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator has non-finite entries")
    if hermiticity_error(m) >= tol.HERMITIAN_TOL:
        raise NotHermitianError("eigensystem requires a Hermitian operator")
    work = np.array((m + m.conj().T) / 2, dtype=np.complex128)
    w, v, _ = _k.jacobi_eigh(work, 1e-15, max_sweeps)
    order = np.argsort(w, kind="stable")
    return w[order], _fix_phase(v[:, order])


def eigenstates(h: OperatorMatrix):
    """Like :func:`hermitian_eigensystem` but returns a list of StateVector."""
    w, v = hermitian_eigensystem(h)
    return w, [StateVector(v[:, k], h.dims) for k in range(v.shape[1])]


def _expm_taylor(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    norm1 = np.abs(a).sum(axis=0).max() if n else 0.0
    s = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    b = a / (2.0 ** s)
    term = np.eye(n, dtype=np.complex128)
    out = term.copy()
    for k in range(1, 24):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def matrix_exponential(a: OperatorMatrix | np.ndarray) -> OperatorMatrix:
    """exp(A); spectral route for (anti-)Hermitian A, scaling-and-squaring otherwise."""
    m = a.entries if isinstance(a, OperatorMatrix) else np.asarray(a, dtype=np.complex128)
    dims = a.dims if isinstance(a, OperatorMatrix) else ()
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix_exponential: non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    anti = float(np.max(np.abs(m + m.conj().T))) if m.size else 0.0
    herm = hermiticity_error(m)
    if anti < tol.HERMITIAN_TOL * scale:
        h = -1j * m
        h = (h + h.conj().T) / 2
        w, v = hermitian_eigensystem(h)
        out = (v * np.exp(1j * w)) @ v.conj().T
        return OperatorMatrix(out, unitary=True, dims=dims)
    if herm < tol.HERMITIAN_TOL * scale:
        h = (m + m.conj().T) / 2
        w, v = hermitian_eigensystem(h)
        return OperatorMatrix((v * np.exp(w)) @ v.conj().T, dims=dims)
    return OperatorMatrix(_expm_taylor(np.asarray(m, dtype=np.complex128)), dims=dims)
