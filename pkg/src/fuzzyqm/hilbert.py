"""Finite-dimensional complex state-space primitives.

Composite index convention: row-major over factors in declared order, so the
first factor varies slowest. This is the ordering produced by ``numpy.kron``
and by ``ndarray.reshape(factor_dims)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ATOL = 1e-12
EIG_ATOL = 1e-10


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ket:
    """Complex amplitude vector over an (optionally labelled) basis."""

    amplitudes: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        amps = _frozen_array(self.amplitudes)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError(f"ket amplitudes must be a non-empty vector, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != amps.size:
                raise ValueError(f"expected {amps.size} labels, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise ValueError("basis labels must be unique")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def basis(cls, dim: int, index: int, labels=None) -> "Ket":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dim {dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps, labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = ATOL) -> bool:
        return abs(self.norm - 1.0) <= atol

    def normalize(self) -> "Ket":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.amplitudes / n, self.labels)


@dataclass(frozen=True)
class CompositeKet:
    """Ket over a tensor-product space.

    ``factor_dims`` lists subsystem dimensions in order system, apparatus,
    environment; ``amplitudes`` has length ``prod(factor_dims)``.
    """

    factor_dims: tuple[int, ...]
    amplitudes: np.ndarray
    subsystem_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"factor dims must be positive, got {dims}")
        amps = _frozen_array(self.amplitudes).reshape(-1)
        expected = int(np.prod(dims))
        if amps.size != expected:
            raise ValueError(
                f"amplitude length {amps.size} does not match product of factor dims {expected}"
            )
        names = tuple(self.subsystem_names) or tuple(f"q{i}" for i in range(len(dims)))
        if len(names) != len(dims):
            raise ValueError(f"expected {len(dims)} subsystem names, got {len(names)}")
        object.__setattr__(self, "factor_dims", dims)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "subsystem_names", names)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = ATOL) -> bool:
        return abs(self.norm - 1.0) <= atol

    def normalize(self) -> "CompositeKet":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return CompositeKet(self.factor_dims, self.amplitudes / n, self.subsystem_names)

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.factor_dims)

    def flat_index(self, *indices: int) -> int:
        return int(np.ravel_multi_index(indices, self.factor_dims))


@dataclass(frozen=True)
class Operator:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen_array(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, atol: float = ATOL) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0, atol=atol))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    The invariants are checked on construction.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = _frozen_array(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=ATOL):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"density matrix trace is {tr}, expected 1")
        lowest = np.linalg.eigvalsh(m).min()
        if lowest < -EIG_ATOL:
            raise ValueError(f"density matrix has negative eigenvalue {lowest}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()


def tensor(a: Ket | CompositeKet, b: Ket | CompositeKet, names: Sequence[str] = ()) -> CompositeKet:
    """Tensor product ``a ⊗ b`` with ``a`` as the slow index.

    Either argument may already be composite; factor lists are concatenated.
    """
    a_dims = a.factor_dims if isinstance(a, CompositeKet) else (a.dim,)
    b_dims = b.factor_dims if isinstance(b, CompositeKet) else (b.dim,)
    if not names and isinstance(a, CompositeKet) and isinstance(b, CompositeKet):
        names = a.subsystem_names + b.subsystem_names
        if len(set(names)) != len(names):
            names = ()
    return CompositeKet(a_dims + b_dims, np.kron(a.amplitudes, b.amplitudes), tuple(names))


def density_from_ket(psi: Ket | CompositeKet) -> DensityMatrix:
    v = psi.amplitudes
    return DensityMatrix(np.outer(v, v.conj()))


def partial_trace(rho: DensityMatrix, factor_dims: Sequence[int], traced_factor: int) -> DensityMatrix:
    """Trace out one tensor factor of ``rho``."""
    dims = tuple(int(d) for d in factor_dims)
    expected = int(np.prod(dims))
    if expected != rho.dim:
        raise ValueError(
            f"dimension mismatch: factor dims {dims} give {expected}, density matrix has dim {rho.dim}"
        )
    n = len(dims)
    if not 0 <= traced_factor < n:
        raise ValueError(f"traced factor {traced_factor} out of range for {n} factors")
    t = rho.entries.reshape(dims + dims)
    reduced = np.trace(t, axis1=traced_factor, axis2=traced_factor + n)
    keep = int(np.prod([d for i, d in enumerate(dims) if i != traced_factor]))
    return DensityMatrix(reduced.reshape(keep, keep))


def commutator(a: Operator, b: Operator) -> Operator:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return Operator(a.entries @ b.entries - b.entries @ a.entries)


def overlap(a: Ket, b: Ket) -> complex:
    """Inner product <a|b>, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# Pauli matrices, handy for tests and commutation checks.
SIGMA_X = Operator([[0, 1], [1, 0]])
SIGMA_Y = Operator([[0, -1j], [1j, 0]])
SIGMA_Z = Operator([[1, 0], [0, -1]])


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))
