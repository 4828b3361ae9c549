"""Dense finite-dimensional quantum objects and a few linear-algebra helpers.

Everything here is a thin validated layer over numpy arrays. Values are
immutable after construction (the stored arrays are flagged read-only).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
EIG_FLOOR = -1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
POVM_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class QuantumValueError(ValueError):
    """Raised when an array fails a quantum-object invariant."""


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Return a finite complex 2-D copy of ``a``."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise QuantumValueError(f"expected a matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise QuantumValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise QuantumValueError("matrix has non-finite entries")
    return m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if np.max(np.abs(m - dagger(m)), initial=0.0) > HERMITIAN_TOL:
            raise QuantumValueError("operator is not Hermitian")
        object.__setattr__(self, "matrix", _frozen(hermitian_part(m)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Ket:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).ravel()
        if not np.all(np.isfinite(v)):
            raise QuantumValueError("ket has non-finite amplitudes")
        if abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
            raise QuantumValueError("ket is not normalised")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalised(cls, v) -> "Ket":
        v = np.asarray(v, dtype=complex).ravel()
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = HermitianOperator(self.matrix).matrix
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise QuantumValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(m)[0] < EIG_FLOOR:
            raise QuantumValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, psi) -> "DensityMatrix":
        if not isinstance(psi, Ket):
            psi = Ket(psi)
        return cls(psi.projector())

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    elements: tuple
    labels: tuple = field(default=())

    def __post_init__(self):
        els = tuple(HermitianOperator(e).matrix for e in self.elements)
        if not els:
            raise QuantumValueError("POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape != (d, d):
                raise QuantumValueError("POVM elements differ in dimension")
            if np.linalg.eigvalsh(e)[0] < EIG_FLOOR:
                raise QuantumValueError("POVM element is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(d))) > POVM_TOL:
            raise QuantumValueError("POVM elements do not sum to identity")
        labels = tuple(self.labels) if self.labels else tuple(range(len(els)))
        if len(labels) != len(els):
            raise QuantumValueError("label count differs from element count")
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def projective(cls, basis: np.ndarray, labels: Sequence[Hashable] = ()) -> "Povm":
        """Rank-one projectors onto the columns of a unitary ``basis``."""
        basis = as_matrix(basis)
        return cls(tuple(np.outer(basis[:, j], basis[:, j].conj()) for j in range(basis.shape[1])), tuple(labels))

    def probabilities(self, rho: DensityMatrix) -> np.ndarray:
        return np.array([np.trace(e @ rho.matrix).real for e in self.elements])


def tensor(*mats) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    out = np.array([[1.0 + 0j]]) if np.ndim(mats[0]) == 2 else np.array([1.0 + 0j])
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor whose index is not in ``keep``.

    ``dims`` lists the factor dimensions; the kept factors stay in their
    original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != m.shape[0]:
        raise QuantumValueError(f"factor dimensions {dims} do not match matrix size {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise QuantumValueError("keep index out of range")
    n = len(dims)
    t = m.reshape(dims + dims)
    # contract traced pairs one at a time, highest axis first so indices stay valid
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        nleft = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ax + nleft)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    m = h.matrix if isinstance(h, HermitianOperator) else HermitianOperator(h).matrix
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("Hermitian eigensolver did not converge") from exc
    return w, v


def spectral_span(h) -> float:
    """Difference between the largest and smallest eigenvalue."""
    w, _ = eig_hermitian(h)
    return float(w[-1] - w[0])


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian_part(g)


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def opnorm(a: np.ndarray) -> float:
    """Operator (largest singular value) norm."""
    return float(np.linalg.norm(a, 2))
