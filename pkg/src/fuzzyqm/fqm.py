"""Fuzzy quantum measurement: membership weights, FQM operators and FQMC.

Every subsystem taking part in a measurement gets a membership grade in [0, 1]
describing how strongly it participates. A branch amplitude C_k is multiplied
by the product of its subsystems' grades (the fuzzy quantum measurement
coefficient, FQMC) and the result is optionally renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional, Sequence, Union

import numpy as np

from .hilbert import ATOL, CompositeKet, Operator, commutator

SYSTEM_APPARATUS = "system-apparatus"
SYSTEM_ENVIRONMENT = "system-environment"
APPARATUS_ENVIRONMENT = "apparatus-environment"


@dataclass(frozen=True)
class InteractionProfile:
    """Interaction strengths F per subsystem pair (arbitrary units).

    ``reference_pair`` defaults to the strongest pair.
    """

    pair_strengths: Mapping[str, float]
    reference_pair: Optional[str] = None

    def __post_init__(self):
        strengths = {str(k): float(v) for k, v in self.pair_strengths.items()}
        if not strengths:
            raise ValueError("interaction profile needs at least one pair")
        for pair, f in strengths.items():
            if not f >= 0.0:
                raise ValueError(f"interaction strength for {pair!r} must be >= 0, got {f}")
        top = max(strengths.values())
        if top == 0.0:
            raise ValueError("all interaction strengths are zero; no reference pair")
        ref = self.reference_pair
        if ref is None:
            ref = min(p for p, f in strengths.items() if f == top)
        elif ref not in strengths:
            raise ValueError(f"reference pair {ref!r} not in profile")
        elif strengths[ref] != top:
            raise ValueError(f"reference pair {ref!r} is not the strongest interaction")
        object.__setattr__(self, "pair_strengths", strengths)
        object.__setattr__(self, "reference_pair", ref)


@dataclass(frozen=True)
class MembershipWeights:
    weights: Mapping[str, float]
    reference_pair: Optional[str] = None

    def __post_init__(self):
        w = {str(k): float(v) for k, v in self.weights.items()}
        for pair, g in w.items():
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"membership weight for {pair!r} outside [0, 1]: {g}")
        if self.reference_pair is not None and w.get(self.reference_pair) != 1.0:
            raise ValueError(f"reference pair {self.reference_pair!r} must have weight 1")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, pair: str) -> float:
        return self.weights[pair]

    def values(self) -> np.ndarray:
        return np.array(list(self.weights.values()))


def memberships_from_interactions(profile: InteractionProfile) -> MembershipWeights:
    ref = profile.pair_strengths[profile.reference_pair]
    weights = {p: min(1.0, f / ref) for p, f in profile.pair_strengths.items()}
    return MembershipWeights(weights, profile.reference_pair)


@dataclass(frozen=True)
class DistanceKernel:
    """Distance-to-membership map, normalized so the nearest particle gets 1.

    ``reciprocal_normalized``: d_min / d.
    ``exponential``: exp(-(d - d_min) / scale), i.e. exp(-d/scale) relative
    to the nearest particle.
    """

    form: Literal["reciprocal_normalized", "exponential"] = "reciprocal_normalized"
    scale: float = 1.0

    def __post_init__(self):
        if self.form not in ("reciprocal_normalized", "exponential"):
            raise ValueError(f"unknown kernel form {self.form!r}")
        if not self.scale > 0.0:
            raise ValueError(f"kernel scale must be positive, got {self.scale}")

    def __call__(self, distances: Sequence[float]) -> np.ndarray:
        d = np.asarray(distances, dtype=float)
        if d.size == 0:
            raise ValueError("no distances given")
        if (d < 0).any():
            raise ValueError("distances must be nonnegative")
        d_min = d.min()
        if self.form == "reciprocal_normalized":
            if (d == 0).any():
                raise ValueError("coincident particle: reciprocal kernel is singular at distance 0")
            return d_min / d
        return np.exp(-(d - d_min) / self.scale)


def memberships_from_positions(
    positions: Sequence[Sequence[float]],
    reference_position: Sequence[float],
    kernel: DistanceKernel = DistanceKernel(),
    labels: Optional[Sequence[str]] = None,
) -> MembershipWeights:
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    ref = np.asarray(reference_position, dtype=float).reshape(3)
    labels = list(labels) if labels is not None else [f"particle{i}" for i in range(len(pos))]
    if len(labels) != len(pos):
        raise ValueError(f"{len(pos)} positions but {len(labels)} labels")
    d = np.linalg.norm(pos - ref, axis=1)
    grades = kernel(d)
    nearest = labels[int(np.argmin(d))]
    return MembershipWeights(dict(zip(labels, grades.tolist())), nearest)


@dataclass(frozen=True)
class FqmOperator:
    """Diagonal participation-weight operator on one subsystem."""

    diagonal_weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.diagonal_weights, dtype=float).reshape(-1)
        if w.size < 1:
            raise ValueError("FQM operator needs at least one weight")
        if np.isnan(w).any() or w.min() < 0.0 or w.max() > 1.0:
            raise ValueError(f"FQM weights must lie in [0, 1], got {w.tolist()}")
        w.setflags(write=False)
        object.__setattr__(self, "diagonal_weights", w)

    @classmethod
    def uniform(cls, weight: float, dim: int) -> "FqmOperator":
        return cls(np.full(dim, float(weight)))

    @property
    def dim(self) -> int:
        return self.diagonal_weights.size

    @property
    def is_uniform(self) -> bool:
        return bool((self.diagonal_weights == self.diagonal_weights[0]).all())

    @property
    def weight(self) -> Optional[float]:
        return float(self.diagonal_weights[0]) if self.is_uniform else None

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal_weights)

    def as_operator(self) -> Operator:
        return Operator(self.matrix())


def build_fqm_operator(weights: Union[float, Sequence[float]], dim: int) -> FqmOperator:
    if np.ndim(weights) == 0:
        w = float(weights)
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"FQM weight {w} outside [0, 1]")
        return FqmOperator.uniform(w, dim)
    op = FqmOperator(weights)
    if op.dim != dim:
        raise ValueError(f"{op.dim} diagonal weights for dim {dim}")
    return op


def sg_apparatus_weight(theta: float, convention: Literal["cos2", "cos"] = "cos2") -> float:
    """Correlation weight of a Stern-Gerlach apparatus tilted by ``theta`` radians.

    ``cos2`` returns cos^2(theta), evaluated as (1 + cos 2theta) / 2 so that
    45 degrees gives exactly 0.5. ``cos`` returns cos(theta).
    """
    if not -1e-15 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    if convention == "cos2":
        return min(1.0, max(0.0, (1.0 + math.cos(2.0 * theta)) / 2.0))
    if convention == "cos":
        return min(1.0, max(0.0, math.cos(theta)))
    raise ValueError(f"unknown convention {convention!r}")


def sg_operators(theta: float, convention: Literal["cos2", "cos"] = "cos2", dim: int = 2) -> dict[str, FqmOperator]:
    """System and apparatus FQM operators for one Stern-Gerlach stage."""
    return {
        "system": FqmOperator.uniform(1.0, dim),
        "apparatus": FqmOperator.uniform(sg_apparatus_weight(theta, convention), dim),
    }


@dataclass(frozen=True)
class FqmcResult:
    """Output of :func:`apply_fqmc`.

    ``raw_amplitudes`` are the weighted amplitudes before any rescaling and
    ``norm`` is their norm.
    """

    state: CompositeKet
    fqmc: np.ndarray
    raw_amplitudes: np.ndarray
    norm: float

    def __iter__(self):
        # allows ``state, fqmc = apply_fqmc(...)``
        return iter((self.state, self.fqmc))


def apply_fqmc(
    state: CompositeKet,
    weights_per_subsystem: Sequence[Union[FqmOperator, Sequence[float]]],
    renormalize: bool = True,
) -> FqmcResult:
    """Apply one diagonal FQM operator per tensor factor.

    Amplitude (i, j, l, ...) is multiplied by w_0[i] * w_1[j] * w_2[l] ...; on
    a correlated chain state this multiplies branch k by its FQMC
    prod_j w_j[k]. ``fqmc`` lists those products for the branches
    k < min(factor_dims).
    """
    if len(weights_per_subsystem) != len(state.factor_dims):
        raise ValueError(
            f"{len(state.factor_dims)} factors but {len(weights_per_subsystem)} weight vectors"
        )
    vecs = []
    for name, dim, w in zip(state.subsystem_names, state.factor_dims, weights_per_subsystem):
        op = w if isinstance(w, FqmOperator) else FqmOperator(w)
        if op.dim != dim:
            raise ValueError(f"weight vector for {name!r} has length {op.dim}, factor dim is {dim}")
        vecs.append(op.diagonal_weights)

    if all((v == 1.0).all() for v in vecs):
        ones = np.ones(min(state.factor_dims))
        return FqmcResult(state, ones, state.amplitudes, state.norm)

    scale = vecs[0]
    for v in vecs[1:]:
        scale = np.multiply.outer(scale, v)
    raw = state.amplitudes * scale.reshape(-1)
    raw.setflags(write=False)
    n_branch = min(state.factor_dims)
    fqmc = np.ones(n_branch)
    for v in vecs:
        fqmc = fqmc * v[:n_branch]
    norm = float(np.linalg.norm(raw))
    out = CompositeKet(state.factor_dims, raw, state.subsystem_names)
    if renormalize:
        if norm == 0.0:
            raise ValueError("all weighted branches vanish; cannot renormalize a null state")
        out = CompositeKet(state.factor_dims, raw / norm, state.subsystem_names)
    return FqmcResult(out, fqmc, raw, norm)


def fqmc_commutation_check(m: FqmOperator, observable: Operator, atol: float = ATOL) -> tuple[Operator, bool]:
    if m.dim != observable.dim:
        raise ValueError(f"dimension mismatch: {m.dim} vs {observable.dim}")
    c = commutator(m.as_operator(), observable)
    return c, bool(np.abs(c.entries).max() < atol)


def correlation_ordering(weights: MembershipWeights) -> list[str]:
    """Pairs by descending weight; ties go to the lexicographically smaller id."""
    if not weights.weights:
        raise ValueError("no membership weights to order")
    return sorted(weights.weights, key=lambda p: (-weights.weights[p], p))
