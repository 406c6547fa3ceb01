"""Scenario files, the run pipeline, Born-rule sampling and report serialization.

Scenario files are JSON objects; see ``docs/scenario-format.md`` for the
grammar. Complex numbers are always ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .fqm import (
    SYSTEM_APPARATUS,
    SYSTEM_ENVIRONMENT,
    DistanceKernel,
    InteractionProfile,
    MembershipWeights,
    apply_fqmc,
    correlation_ordering,
    memberships_from_interactions,
    memberships_from_positions,
    sg_apparatus_weight,
)
from .hilbert import CompositeKet, Ket
from .measurement import (
    DecoherenceReport,
    MeasurementSetup,
    SetupError,
    decoherence_report,
    reduce_environment,
    von_neumann_premeasure,
    zurek_chain,
)

FUZZY_MODES = ("interactions", "positions", "explicit", "stern_gerlach")
FACTORS = ("system", "apparatus", "environment")
MAX_SEED = 2**64 - 1


class ScenarioError(ValueError):
    """Invalid scenario file; ``field`` names the offending key path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class Sampling:
    shots: int
    seed: int


@dataclass(frozen=True)
class FuzzyBlock:
    mode: str
    params: dict
    factor_weights: dict  # factor name -> weight vector
    memberships: MembershipWeights


@dataclass(frozen=True)
class Scenario:
    name: str
    system_coeffs: np.ndarray
    apparatus_dim: int
    apparatus_ready_index: int = 0
    environment_states: Optional[tuple[np.ndarray, ...]] = None
    fuzzy: Optional[FuzzyBlock] = None
    sampling: Optional[Sampling] = None
    renormalize: bool = True

    def setup(self) -> MeasurementSetup:
        env = None
        if self.environment_states is not None:
            env = tuple(Ket(s) for s in self.environment_states)
        return MeasurementSetup(self.system_coeffs, self.apparatus_dim, self.apparatus_ready_index, env)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        dims = (len(self.system_coeffs), self.apparatus_dim)
        if self.environment_states is not None:
            dims += (len(self.environment_states[0]),)
        return dims


# -- parsing ------------------------------------------------------------------


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioError(f"{path}{key}", "required field missing")
    return obj[key]


def _as_int(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(path, f"must be >= {minimum}, got {value}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(path, f"must be finite, got {value!r}")
    return float(value)


def _complex_vector(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ScenarioError(path, "expected a non-empty list of [re, im] pairs")
    out = np.empty(len(value), dtype=complex)
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioError(f"{path}[{i}]", f"expected [re, im], got {pair!r}")
        out[i] = complex(_as_float(pair[0], f"{path}[{i}][0]"), _as_float(pair[1], f"{path}[{i}][1]"))
    return out


def _unit_vector(value, path: str, length: Optional[int] = None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ScenarioError(path, "expected a non-empty list of weights")
    w = np.array([_as_float(v, f"{path}[{i}]") for i, v in enumerate(value)])
    if length is not None and w.size != length:
        raise ScenarioError(path, f"expected {length} weights (factor dim), got {w.size}")
    for i, g in enumerate(w):
        if not 0.0 <= g <= 1.0:
            raise ScenarioError(f"{path}[{i}]", f"weight must lie in [0, 1], got {g}")
    return w


def _vec3(value, path: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 3:
        raise ScenarioError(path, f"expected [x, y, z], got {value!r}")
    return [_as_float(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _environment_weights_from_positions(block: dict, env_dim: Optional[int], path: str) -> np.ndarray:
    if env_dim is None:
        raise ScenarioError(f"{path}positions", "position weights need an environment block")
    raw = _require(block, "positions", path)
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(f"{path}positions", "expected a non-empty list of [x, y, z]")
    positions = [_vec3(p, f"{path}positions[{i}]") for i, p in enumerate(raw)]
    if len(positions) != env_dim:
        raise ScenarioError(
            f"{path}positions", f"expected {env_dim} particles (environment dim), got {len(positions)}"
        )
    reference = _vec3(_require(block, "reference_position", path), f"{path}reference_position")
    kblock = block.get("kernel", {})
    if not isinstance(kblock, dict):
        raise ScenarioError(f"{path}kernel", "expected an object")
    try:
        kernel = DistanceKernel(
            kblock.get("form", "reciprocal_normalized"),
            _as_float(kblock.get("scale", 1.0), f"{path}kernel.scale"),
        )
        weights = memberships_from_positions(positions, reference, kernel)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{path}positions", str(exc)) from None
    return weights.values()


def _parse_fuzzy(block, dims: dict, path: str = "fuzzy.") -> FuzzyBlock:
    if not isinstance(block, dict):
        raise ScenarioError("fuzzy", "expected an object")
    mode = _require(block, "mode", path)
    if mode not in FUZZY_MODES:
        raise ScenarioError(f"{path}mode", f"expected one of {FUZZY_MODES}, got {mode!r}")
    env_dim = dims.get("environment")
    weights = {f: np.ones(d) for f, d in dims.items()}

    if mode == "explicit":
        for f in FACTORS:
            if f in block:
                if f not in dims:
                    raise ScenarioError(f"{path}{f}", f"scenario has no {f} factor")
                weights[f] = _unit_vector(block[f], f"{path}{f}", dims[f])

    elif mode == "interactions":
        strengths = _require(block, "strengths", path)
        if not isinstance(strengths, dict) or not strengths:
            raise ScenarioError(f"{path}strengths", "expected a non-empty object of pair -> F")
        strengths = {k: _as_float(v, f"{path}strengths.{k}") for k, v in strengths.items()}
        if SYSTEM_ENVIRONMENT in strengths and env_dim is None:
            raise ScenarioError(f"{path}strengths.{SYSTEM_ENVIRONMENT}", "scenario has no environment")
        try:
            m = memberships_from_interactions(InteractionProfile(strengths, block.get("reference")))
        except ValueError as exc:
            raise ScenarioError(f"{path}strengths", str(exc)) from None
        if SYSTEM_APPARATUS in m.weights:
            weights["apparatus"] = np.full(dims["apparatus"], m[SYSTEM_APPARATUS])
        if SYSTEM_ENVIRONMENT in m.weights:
            weights["environment"] = np.full(env_dim, m[SYSTEM_ENVIRONMENT])

    elif mode == "positions":
        weights["environment"] = _environment_weights_from_positions(block, env_dim, path)

    else:  # stern_gerlach
        theta_deg = _as_float(_require(block, "theta_deg", path), f"{path}theta_deg")
        if not 0.0 <= theta_deg <= 90.0:
            raise ScenarioError(f"{path}theta_deg", f"must lie in [0, 90], got {theta_deg}")
        convention = block.get("convention", "cos2")
        if convention not in ("cos2", "cos"):
            raise ScenarioError(f"{path}convention", f"expected 'cos2' or 'cos', got {convention!r}")
        w = sg_apparatus_weight(math.radians(theta_deg), convention)
        weights["apparatus"] = np.full(dims["apparatus"], w)
        if "positions" in block:
            weights["environment"] = _environment_weights_from_positions(block, env_dim, path)

    return FuzzyBlock(mode, dict(block), weights, _factor_memberships(weights))


def _factor_memberships(weights: dict) -> MembershipWeights:
    # a subsystem's grade is the sup of its diagonal weights
    m = {SYSTEM_APPARATUS: float(weights["apparatus"].max())}
    if "environment" in weights:
        m[SYSTEM_ENVIRONMENT] = float(weights["environment"].max())
    return MembershipWeights(m)


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    name = data.get("name", "scenario")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")
    coeffs = _complex_vector(_require(data, "system_coeffs", ""), "system_coeffs")
    apparatus_dim = _as_int(_require(data, "apparatus_dim", ""), "apparatus_dim", 1)
    ready = _as_int(data.get("apparatus_ready_index", 0), "apparatus_ready_index", 0)

    env_states = None
    if data.get("environment") is not None:
        env = data["environment"]
        if not isinstance(env, dict):
            raise ScenarioError("environment", "expected an object")
        raw = _require(env, "states", "environment.")
        if not isinstance(raw, list) or not raw:
            raise ScenarioError("environment.states", "expected a non-empty list of complex vectors")
        env_states = tuple(_complex_vector(s, f"environment.states[{i}]") for i, s in enumerate(raw))

    renormalize = data.get("renormalize", True)
    if not isinstance(renormalize, bool):
        raise ScenarioError("renormalize", f"expected true or false, got {renormalize!r}")

    sampling = None
    if data.get("sampling") is not None:
        s = data["sampling"]
        if not isinstance(s, dict):
            raise ScenarioError("sampling", "expected an object")
        shots = _as_int(_require(s, "shots", "sampling."), "sampling.shots", 0)
        seed = _as_int(s.get("seed", 0), "sampling.seed", 0)
        if seed > MAX_SEED:
            raise ScenarioError("sampling.seed", "must fit in an unsigned 64-bit integer")
        sampling = Sampling(shots, seed)

    scenario = Scenario(name, coeffs, apparatus_dim, ready, env_states, None, sampling, renormalize)
    try:
        setup = scenario.setup()
    except SetupError as exc:
        raise ScenarioError(_setup_field(str(exc)), str(exc)) from None

    if data.get("fuzzy") is not None:
        dims = {"system": setup.n_branches, "apparatus": apparatus_dim}
        if setup.has_environment:
            dims["environment"] = setup.environment_dim
        fuzzy = _parse_fuzzy(data["fuzzy"], dims)
        scenario = Scenario(name, coeffs, apparatus_dim, ready, env_states, fuzzy, sampling, renormalize)
    return scenario


def _setup_field(message: str) -> str:
    for key in ("environment_ready", "apparatus_ready_index", "system_coeffs", "apparatus_dim"):
        if key in message:
            return key
    if "environment" in message:
        return "environment.states"
    if "pointer states" in message:
        return "apparatus_dim"
    return "<setup>"


def parse_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", f"syntax error: {exc.msg}") from None
    return scenario_from_dict(data)


# -- running ------------------------------------------------------------------


def sample_outcomes(probabilities, shots: int, seed: int) -> np.ndarray:
    """Draw ``shots`` outcomes; returns the count per outcome.

    Uses numpy's PCG64 bit generator and one uniform double per shot mapped
    through the cumulative distribution, so counts are reproducible for a
    given seed on every platform.
    """
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if p.size == 0 or np.isnan(p).any() or (p < 0).any():
        raise ValueError(f"invalid probability vector {p.tolist()}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
    if isinstance(shots, bool) or int(shots) != shots or shots < 0:
        raise ValueError(f"shots must be a nonnegative integer, got {shots!r}")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if shots == 0:
        return np.zeros(p.size, dtype=np.int64)
    cdf = np.cumsum(p) / p.sum()
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = np.searchsorted(cdf, rng.random(int(shots)), side="right")
    return np.bincount(np.minimum(draws, p.size - 1), minlength=p.size).astype(np.int64)


@dataclass
class RunReport:
    name: str
    chain_state: CompositeKet
    density: np.ndarray
    decoherence: Optional[DecoherenceReport]
    fqmc: np.ndarray
    prenorm_norm: float
    branch_probabilities: np.ndarray
    outcome_counts: Optional[np.ndarray] = None
    correlation_order: list[str] = field(default_factory=list)


def branch_probabilities(state: CompositeKet) -> np.ndarray:
    """Populations of the first (system) factor, normalized to sum 1."""
    pops = np.abs(state.tensor_view()) ** 2
    per_branch = pops.reshape(state.factor_dims[0], -1).sum(axis=1)
    total = per_branch.sum()
    if total == 0.0:
        raise ValueError("state has zero norm")
    return per_branch / total


def run_scenario(s: Scenario, shots: Optional[int] = None, seed: Optional[int] = None) -> RunReport:
    """Chain, optional FQMC weighting, reduced density, probabilities, sampling.

    ``shots``/``seed`` override the scenario's sampling block.
    """
    setup = s.setup()
    state = zurek_chain(setup) if setup.has_environment else von_neumann_premeasure(setup)

    if s.fuzzy is not None:
        weights = [s.fuzzy.factor_weights[f] for f in FACTORS[: len(state.factor_dims)]]
        res = apply_fqmc(state, weights, s.renormalize)
        chain, fqmc, norm = res.state, res.fqmc, res.norm
        memberships = s.fuzzy.memberships
    else:
        chain, fqmc, norm = state, np.ones(min(state.factor_dims)), state.norm
        memberships = _factor_memberships({f: np.ones(d) for f, d in zip(FACTORS, state.factor_dims)})

    normalized = chain if chain.is_normalized() else chain.normalize()
    density = reduce_environment(normalized).entries
    decoherence = decoherence_report(setup) if setup.has_environment else None
    probs = branch_probabilities(chain)

    counts = None
    sampling = s.sampling
    if shots is not None or seed is not None:
        sampling = Sampling(
            shots if shots is not None else (sampling.shots if sampling else 0),
            seed if seed is not None else (sampling.seed if sampling else 0),
        )
    if sampling is not None:
        counts = sample_outcomes(probs, sampling.shots, sampling.seed)

    return RunReport(
        s.name, chain, density, decoherence, fqmc, norm, probs, counts,
        correlation_ordering(memberships),
    )


# -- report serialization -----------------------------------------------------


def _cplx(z) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _uncplx(d) -> complex:
    return complex(d["re"], d["im"])


def report_to_dict(r: RunReport) -> dict:
    dec = None
    if r.decoherence is not None:
        dec = {
            "overlap_matrix": [[_cplx(z) for z in row] for row in r.decoherence.overlap_matrix],
            "offdiag_suppression": r.decoherence.offdiag_suppression,
            "is_ideal": r.decoherence.is_ideal,
        }
    return {
        "name": r.name,
        "chain_state": {
            "factor_dims": list(r.chain_state.factor_dims),
            "subsystem_names": list(r.chain_state.subsystem_names),
            "amplitudes": [_cplx(z) for z in r.chain_state.amplitudes],
        },
        "density": {
            "dim": int(r.density.shape[0]),
            "entries": [[_cplx(z) for z in row] for row in r.density],
        },
        "decoherence": dec,
        "fqmc_table": {
            "fqmc": [float(x) for x in r.fqmc],
            "pre_normalization_norm": r.prenorm_norm,
        },
        "branch_probabilities": [float(x) for x in r.branch_probabilities],
        "outcome_counts": None if r.outcome_counts is None else [int(x) for x in r.outcome_counts],
        "correlation_order": list(r.correlation_order),
    }


def report_from_dict(d: dict) -> RunReport:
    cs = d["chain_state"]
    chain = CompositeKet(
        tuple(cs["factor_dims"]), [_uncplx(z) for z in cs["amplitudes"]], tuple(cs["subsystem_names"])
    )
    dec = None
    if d.get("decoherence") is not None:
        dd = d["decoherence"]
        dec = DecoherenceReport(
            np.array([[_uncplx(z) for z in row] for row in dd["overlap_matrix"]], dtype=complex),
            float(dd["offdiag_suppression"]),
            bool(dd["is_ideal"]),
        )
    counts = d.get("outcome_counts")
    return RunReport(
        d["name"],
        chain,
        np.array([[_uncplx(z) for z in row] for row in d["density"]["entries"]], dtype=complex),
        dec,
        np.array(d["fqmc_table"]["fqmc"], dtype=float),
        float(d["fqmc_table"]["pre_normalization_norm"]),
        np.array(d["branch_probabilities"], dtype=float),
        None if counts is None else np.array(counts, dtype=np.int64),
        list(d["correlation_order"]),
    )


def _csv_sections(r: RunReport) -> list[tuple[str, list[str], list[list]]]:
    names = list(r.chain_state.subsystem_names)
    view = r.chain_state.tensor_view()
    chain_rows = [
        [i, *idx, repr(float(z.real)), repr(float(z.imag))]
        for i, (idx, z) in enumerate(np.ndenumerate(view))
    ]
    n = r.density.shape[0]
    sections = [
        ("name", ["name"], [[r.name]]),
        ("chain_state", ["index", *names, "re", "im"], chain_rows),
        ("density", ["row", "col", "re", "im"],
         [[i, j, repr(float(r.density[i, j].real)), repr(float(r.density[i, j].imag))]
          for i in range(n) for j in range(n)]),
    ]
    if r.decoherence is not None:
        ov = r.decoherence.overlap_matrix
        sections.append(("decoherence_overlaps", ["k", "kp", "re", "im"],
                         [[i, j, repr(float(ov[i, j].real)), repr(float(ov[i, j].imag))]
                          for i in range(ov.shape[0]) for j in range(ov.shape[1])]))
        sections.append(("decoherence_summary", ["offdiag_suppression", "is_ideal"],
                         [[repr(r.decoherence.offdiag_suppression), str(r.decoherence.is_ideal).lower()]]))
    sections += [
        ("fqmc", ["branch", "fqmc"], [[k, repr(float(v))] for k, v in enumerate(r.fqmc)]),
        ("fqmc_norm", ["pre_normalization_norm"], [[repr(r.prenorm_norm)]]),
        ("branch_probabilities", ["branch", "probability"],
         [[k, repr(float(v))] for k, v in enumerate(r.branch_probabilities)]),
    ]
    if r.outcome_counts is not None:
        sections.append(("outcome_counts", ["branch", "count"],
                         [[k, int(v)] for k, v in enumerate(r.outcome_counts)]))
    sections.append(("correlation_order", ["rank", "pair"],
                     [[k, p] for k, p in enumerate(r.correlation_order)]))
    return sections


def emit_report(r: RunReport, format: str = "json") -> str:
    """Serialize a report as stable-key JSON or sectioned CSV.

    CSV output is one table per section, each preceded by a ``# <section>``
    comment line. Floats are written with ``repr`` so both forms round-trip
    exactly through :func:`parse_report`.
    """
    if format == "json":
        return json.dumps(report_to_dict(r), sort_keys=True, indent=2) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for title, header, rows in _csv_sections(r):
            buf.write(f"# {title}\n")
            w.writerow(header)
            w.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown report format {format!r}")


def _split_csv(text: str) -> dict[str, list[list[str]]]:
    sections: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        if line.startswith("# "):
            current = line[2:].strip()
            sections[current] = []
        elif current is not None and line:
            sections[current].append(line)
    return {k: list(csv.reader(v)) for k, v in sections.items()}


def parse_report(text: str, format: str = "json") -> RunReport:
    if format == "json":
        return report_from_dict(json.loads(text))
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")

    sec = _split_csv(text)
    header, *rows = sec["chain_state"]
    names = tuple(header[1:-2])
    idx = np.array([[int(v) for v in row[1:-2]] for row in rows])
    dims = tuple(int(x) for x in idx.max(axis=0) + 1)
    chain = CompositeKet(dims, [complex(float(row[-2]), float(row[-1])) for row in rows], names)

    _, *rows = sec["density"]
    n = math.isqrt(len(rows))
    density = np.array([complex(float(r[2]), float(r[3])) for r in rows]).reshape(n, n)

    dec = None
    if "decoherence_overlaps" in sec:
        _, *rows = sec["decoherence_overlaps"]
        k = math.isqrt(len(rows))
        ov = np.array([complex(float(r[2]), float(r[3])) for r in rows]).reshape(k, k)
        _, summary = sec["decoherence_summary"]
        dec = DecoherenceReport(ov, float(summary[0]), summary[1] == "true")

    def column(name: str, i: int, cast=float):
        return [cast(row[i]) for row in sec[name][1:]]

    counts = None
    if "outcome_counts" in sec:
        counts = np.array(column("outcome_counts", 1, int), dtype=np.int64)
    return RunReport(
        sec["name"][1][0],
        chain,
        density,
        dec,
        np.array(column("fqmc", 1)),
        float(sec["fqmc_norm"][1][0]),
        np.array(column("branch_probabilities", 1)),
        counts,
        column("correlation_order", 1, str),
    )
