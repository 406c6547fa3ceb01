"""Von Neumann and Zurek measurement chains as explicit state maps.

The pre-measurement interaction is not integrated in time; each chain maps the
ready state directly to its correlated post-interaction state. Pointer states
are computational basis states of the apparatus factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .hilbert import (
    ATOL,
    CompositeKet,
    DensityMatrix,
    Ket,
    density_from_ket,
    overlap,
    partial_trace,
)

SUBSYSTEMS = ("system", "apparatus", "environment")


class SetupError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementSetup:
    system_coeffs: np.ndarray
    apparatus_dim: int
    apparatus_ready_index: int = 0
    environment_states: Optional[tuple[Ket, ...]] = None
    environment_ready: Optional[Ket] = None

    def __post_init__(self):
        coeffs = np.array(self.system_coeffs, dtype=complex).reshape(-1)
        coeffs.setflags(write=False)
        object.__setattr__(self, "system_coeffs", coeffs)
        if coeffs.size < 1:
            raise SetupError("system_coeffs must be non-empty")
        norm = np.linalg.norm(coeffs)
        if abs(norm - 1.0) > 1e-9:
            raise SetupError(f"system_coeffs must be normalized, norm is {norm!r}")
        if self.apparatus_dim < coeffs.size:
            raise SetupError(
                f"{coeffs.size} branches need at least {coeffs.size} pointer states, "
                f"apparatus_dim is {self.apparatus_dim}"
            )
        if not 0 <= self.apparatus_ready_index < self.apparatus_dim:
            raise SetupError(
                f"apparatus_ready_index {self.apparatus_ready_index} out of range "
                f"for apparatus_dim {self.apparatus_dim}"
            )
        if self.environment_states is not None:
            states = tuple(s if isinstance(s, Ket) else Ket(s) for s in self.environment_states)
            if len(states) != coeffs.size:
                raise SetupError(
                    f"expected {coeffs.size} environment states (one per branch), got {len(states)}"
                )
            dims = {s.dim for s in states}
            if len(dims) != 1:
                raise SetupError(f"environment states have differing dims {sorted(dims)}")
            for k, s in enumerate(states):
                if not s.is_normalized(1e-9):
                    raise SetupError(f"environment state {k} is not normalized (norm {s.norm!r})")
            object.__setattr__(self, "environment_states", states)
            if self.environment_ready is not None and self.environment_ready.dim != states[0].dim:
                raise SetupError(
                    f"environment_ready has dim {self.environment_ready.dim}, "
                    f"environment states have dim {states[0].dim}"
                )

    @property
    def n_branches(self) -> int:
        return self.system_coeffs.size

    @property
    def has_environment(self) -> bool:
        return self.environment_states is not None

    @property
    def environment_dim(self) -> int:
        if self.environment_states is None:
            raise SetupError("setup has no environment states")
        return self.environment_states[0].dim


@dataclass(frozen=True)
class DecoherenceReport:
    overlap_matrix: np.ndarray
    offdiag_suppression: float
    is_ideal: bool


def ready_state(setup: MeasurementSetup) -> CompositeKet:
    """Uncorrelated product state before the interaction.

    Includes the environment factor when ``environment_ready`` is given.
    """
    system = setup.system_coeffs
    pointer = np.zeros(setup.apparatus_dim, dtype=complex)
    pointer[setup.apparatus_ready_index] = 1.0
    amps = np.kron(system, pointer)
    dims = [setup.n_branches, setup.apparatus_dim]
    if setup.environment_ready is not None:
        amps = np.kron(amps, setup.environment_ready.amplitudes)
        dims.append(setup.environment_ready.dim)
    return CompositeKet(tuple(dims), amps, SUBSYSTEMS[: len(dims)])


def von_neumann_premeasure(setup: MeasurementSetup) -> CompositeKet:
    """Correlate each system branch k with pointer state k: sum_k C_k |q_k>|a_k>."""
    n, m = setup.n_branches, setup.apparatus_dim
    amps = np.zeros((n, m), dtype=complex)
    k = np.arange(n)
    amps[k, k] = setup.system_coeffs
    return CompositeKet((n, m), amps, SUBSYSTEMS[:2])


def zurek_chain(setup: MeasurementSetup) -> CompositeKet:
    """Three-way correlated state sum_k C_k |q_k>|a_k>|e_k>."""
    if not setup.has_environment:
        raise SetupError("zurek_chain requires environment_states")
    n, m, d = setup.n_branches, setup.apparatus_dim, setup.environment_dim
    amps = np.zeros((n, m, d), dtype=complex)
    for k, (c, env) in enumerate(zip(setup.system_coeffs, setup.environment_states)):
        amps[k, k, :] = c * env.amplitudes
    return CompositeKet((n, m, d), amps, SUBSYSTEMS)


def reduce_environment(state: CompositeKet) -> DensityMatrix:
    """System-apparatus density matrix with the last factor traced out."""
    rho = density_from_ket(state)
    if len(state.factor_dims) < 3:
        return rho
    return partial_trace(rho, state.factor_dims, len(state.factor_dims) - 1)


def decohered_density(setup: MeasurementSetup) -> DensityMatrix:
    """Reduced system-apparatus state after tracing out the environment.

    Off-diagonal branch entries equal ``C_k conj(C_k') <e_k'|e_k>``; with an
    orthonormal environment the result is diagonal with weights ``|C_k|^2``.
    """
    return reduce_environment(zurek_chain(setup))


def branch_entry(rho: DensityMatrix, setup: MeasurementSetup, k: int, kp: int) -> complex:
    """Entry <q_k a_k| rho |q_k' a_k'> of a system-apparatus density matrix."""
    m = setup.apparatus_dim
    return complex(rho.entries[k * m + k, kp * m + kp])


def environment_overlaps(states: Sequence[Ket]) -> np.ndarray:
    n = len(states)
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = overlap(states[i], states[j])
    return out


def decoherence_report(setup: MeasurementSetup, atol: float = ATOL) -> DecoherenceReport:
    if not setup.has_environment:
        raise SetupError("decoherence_report requires environment_states")
    ov = environment_overlaps(setup.environment_states)
    off = ~np.eye(len(ov), dtype=bool)
    suppression = float(np.abs(ov[off]).max()) if off.any() else 0.0
    return DecoherenceReport(ov, suppression, suppression < atol)
