"""Fuzzy algebra over F = [0, 1] with a + b = max(a, b) and k * a = min(k, a).

Matrix products are max-min compositions. None of these operations round,
so results compare with exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Hashable, Iterable, Optional, Sequence, Union

import numpy as np


def _check_unit_interval(arr: np.ndarray, what: str) -> None:
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{what} must lie in [0, 1]")


@dataclass(frozen=True)
class MembershipFunction:
    """Finite fuzzy set: grades aligned with ``universe``."""

    universe: tuple
    grades: np.ndarray

    def __post_init__(self):
        universe = tuple(self.universe)
        grades = np.array(self.grades, dtype=float).reshape(-1)
        if grades.size != len(universe):
            raise ValueError(f"{len(universe)} elements but {grades.size} grades")
        if len(set(universe)) != len(universe):
            raise ValueError("universe elements must be unique")
        _check_unit_interval(grades, "membership grades")
        grades.setflags(write=False)
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "grades", grades)

    def __call__(self, x: Hashable) -> float:
        return float(self.grades[self.universe.index(x)])

    def support(self) -> set:
        return {x for x, g in zip(self.universe, self.grades) if g > 0.0}

    def kernel(self) -> set:
        return {x for x, g in zip(self.universe, self.grades) if g == 1.0}


def indicator(universe: Sequence[Hashable], subset: Iterable[Hashable]) -> MembershipFunction:
    """Crisp membership: 1 on members of ``subset``, 0 elsewhere."""
    universe = tuple(universe)
    subset = set(subset)
    missing = subset.difference(universe)
    if missing:
        raise ValueError(f"elements not in universe: {sorted(map(str, missing))}")
    return MembershipFunction(universe, [1.0 if x in subset else 0.0 for x in universe])


# -- matrices -----------------------------------------------------------------


@dataclass(frozen=True)
class FuzzyMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim == 1:
            m = m.reshape(1, -1)
        if m.ndim != 2 or 0 in m.shape:
            raise ValueError(f"fuzzy matrix must be a non-empty 2-d array, got shape {m.shape}")
        _check_unit_interval(m, "fuzzy matrix entries")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def T(self) -> "FuzzyMatrix":
        return FuzzyMatrix(self.entries.T)

    def __add__(self, other: "FuzzyMatrix") -> "FuzzyMatrix":
        return fmat_add(self, other)

    def __matmul__(self, other: "FuzzyMatrix") -> "FuzzyMatrix":
        return fmat_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, FuzzyMatrix):
            return NotImplemented
        return self.shape == other.shape and bool((self.entries == other.entries).all())

    __hash__ = None

    @classmethod
    def identity(cls, n: int) -> "FuzzyMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "FuzzyMatrix":
        return cls(np.zeros((rows, rows if cols is None else cols)))


class MetricMatrix(FuzzyMatrix):
    """Square symmetric fuzzy matrix of basis inner products a_ij = (e_i, e_j)."""

    def __post_init__(self):
        super().__post_init__()
        m = self.entries
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"metric matrix must be square, got shape {m.shape}")
        if not (m == m.T).all():
            raise ValueError("metric matrix must be symmetric")


def maxmin(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Max-min product on raw arrays; leading axes broadcast as a batch."""
    return np.minimum(a[..., :, :, None], b[..., None, :, :]).max(axis=-2)


def supadd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise sup on raw arrays."""
    return np.maximum(a, b)


def fmat_add(a: FuzzyMatrix, b: FuzzyMatrix) -> FuzzyMatrix:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return FuzzyMatrix(supadd(a.entries, b.entries))


def fmat_scale(k: float, a: FuzzyMatrix) -> FuzzyMatrix:
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"scalar {k} outside [0, 1]")
    return FuzzyMatrix(np.minimum(k, a.entries))


def fmat_mul(a: FuzzyMatrix, b: FuzzyMatrix) -> FuzzyMatrix:
    if a.cols != b.rows:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return FuzzyMatrix(maxmin(a.entries, b.entries))


def fuzzy_inner(x: Sequence[float], y: Sequence[float], metric: FuzzyMatrix) -> float:
    """Coordinate form of the fuzzy inner product: max_ij min(x_i, a_ij, y_j)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = metric.entries
    if x.shape != (a.shape[0],) or y.shape != (a.shape[1],):
        raise ValueError(
            f"dimension mismatch: x {x.shape}, y {y.shape}, metric {a.shape}"
        )
    _check_unit_interval(x, "coordinates")
    _check_unit_interval(y, "coordinates")
    return float(np.minimum(np.minimum(x[:, None], a), y[None, :]).max())


def change_of_basis(metric_a: FuzzyMatrix, c: FuzzyMatrix) -> MetricMatrix:
    """Metric matrix under the basis reached by transition matrix ``c``: C^T A C."""
    if c.shape[0] != c.shape[1] or c.shape != metric_a.shape:
        raise ValueError(f"shape mismatch: metric {metric_a.shape}, transition {c.shape}")
    return MetricMatrix(maxmin(maxmin(c.entries.T, metric_a.entries), c.entries))


def apply(t: FuzzyMatrix, x: np.ndarray) -> np.ndarray:
    """Action of ``t`` on a fuzzy column vector (or matrix of columns)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return maxmin(t.entries, x[:, None])[:, 0]
    return maxmin(t.entries, x)


def _probes(n: int, probe_count: int, rng: np.random.Generator):
    eye = np.eye(n)
    for i in range(n):
        for j in range(n):
            yield eye[i], eye[j]
    for _ in range(probe_count):
        yield rng.random(n), rng.random(n)


def adjoint_check(
    t: FuzzyMatrix,
    t_star: FuzzyMatrix,
    probe_count: int = 100,
    metric: Optional[FuzzyMatrix] = None,
    seed: int = 0,
) -> bool:
    """Test <T x, y> == <x, T* y> over a basis sweep plus random probes.

    Uses the identity metric unless one is supplied. A probe-based check can
    only refute adjointness; ``True`` means no counterexample was found.
    """
    if t.shape != t_star.shape or t.rows != t.cols:
        raise ValueError(f"shape mismatch: {t.shape} vs {t_star.shape}")
    n = t.rows
    metric = FuzzyMatrix.identity(n) if metric is None else metric
    rng = np.random.default_rng(seed)
    for x, y in _probes(n, probe_count, rng):
        lhs = fuzzy_inner(apply(t, x), y, metric)
        rhs = fuzzy_inner(x, apply(t_star, y), metric)
        if lhs != rhs:
            return False
    return True


Transformation = Union[FuzzyMatrix, Callable[[FuzzyMatrix], FuzzyMatrix]]


def linearity_check(t: Transformation, probe_count: int = 100, size: Optional[tuple[int, int]] = None,
                    seed: int = 0) -> bool:
    """Check T(A + B) == T(A) + T(B) and T(kA) == k T(A) on random probes.

    ``t`` is either a square fuzzy matrix acting by left max-min product or an
    arbitrary callable on fuzzy matrices (then ``size`` gives the probe shape).
    """
    if isinstance(t, FuzzyMatrix):
        if t.rows != t.cols:
            raise ValueError(f"transformation matrix must be square, got {t.shape}")
        mat = t
        size = size or (t.rows, t.rows)
        t = lambda a: fmat_mul(mat, a)  # noqa: E731
    elif size is None:
        raise ValueError("size is required for callable transformations")
    rng = np.random.default_rng(seed)
    for _ in range(probe_count):
        a = FuzzyMatrix(rng.random(size))
        b = FuzzyMatrix(rng.random(size))
        k = float(rng.random())
        if t(fmat_add(a, b)) != fmat_add(t(a), t(b)):
            return False
        if t(fmat_scale(k, a)) != fmat_scale(k, t(a)):
            return False
    return True


# -- plain-text matrix files --------------------------------------------------
# First line "rows cols", then row-major whitespace-separated decimals.


def parse_matrix(text: str) -> FuzzyMatrix:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix file must start with 'rows cols'")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ValueError(f"bad matrix header {tokens[:2]!r}") from None
    values = tokens[2:]
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    if len(values) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries for {rows}x{cols}, got {len(values)}")
    try:
        data = np.array([float(v) for v in values]).reshape(rows, cols)
    except ValueError as exc:
        raise ValueError(f"bad matrix entry: {exc}") from None
    return FuzzyMatrix(data)


def format_matrix(m: FuzzyMatrix) -> str:
    lines = [f"{m.rows} {m.cols}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in m.entries]
    return "\n".join(lines) + "\n"


def read_matrix(path: Union[str, Path]) -> FuzzyMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(m: FuzzyMatrix, path: Union[str, Path]) -> None:
    Path(path).write_text(format_matrix(m))
