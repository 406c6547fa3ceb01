"""Quantum measurement chains with fuzzy participation weights."""

from .fqm import (
    DistanceKernel,
    FqmOperator,
    InteractionProfile,
    MembershipWeights,
    apply_fqmc,
    build_fqm_operator,
    correlation_ordering,
    fqmc_commutation_check,
    memberships_from_interactions,
    memberships_from_positions,
    sg_apparatus_weight,
)
from .fuzzyalg import (
    FuzzyMatrix,
    MembershipFunction,
    MetricMatrix,
    adjoint_check,
    change_of_basis,
    fmat_add,
    fmat_mul,
    fmat_scale,
    fuzzy_inner,
    indicator,
    linearity_check,
)
from .hilbert import (
    CompositeKet,
    DensityMatrix,
    Ket,
    Operator,
    commutator,
    density_from_ket,
    overlap,
    partial_trace,
    tensor,
)
from .measurement import (
    DecoherenceReport,
    MeasurementSetup,
    decoherence_report,
    decohered_density,
    von_neumann_premeasure,
    zurek_chain,
)
from .scenario import (
    RunReport,
    Scenario,
    ScenarioError,
    emit_report,
    parse_report,
    parse_scenario,
    run_scenario,
    sample_outcomes,
)

__version__ = "0.1.0"
