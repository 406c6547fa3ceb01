import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fuzzyqm.fuzzyalg import (
    FuzzyMatrix,
    MembershipFunction,
    MetricMatrix,
    adjoint_check,
    apply,
    change_of_basis,
    fmat_add,
    fmat_mul,
    fmat_scale,
    format_matrix,
    fuzzy_inner,
    indicator,
    linearity_check,
    parse_matrix,
)


def loop_maxmin(a, b):
    """Triple-loop max-min composition on nested lists."""
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            best = 0.0
            for k in range(inner):
                v = a[i][k] if a[i][k] < b[k][j] else b[k][j]
                if v > best:
                    best = v
            out[i][j] = best
    return out


def loop_inner(x, y, a):
    best = 0.0
    for i in range(len(x)):
        for j in range(len(y)):
            best = max(best, min(x[i], a[i][j], y[j]))
    return best


unit = st.floats(0, 1)


def fmats(rows, cols):
    return arrays(np.float64, (rows, cols), elements=unit).map(FuzzyMatrix)


square3 = fmats(3, 3)


class TestMembership:
    def test_indicator_single(self):
        mu = indicator(["a", "b", "c"], {"a"})
        assert mu.grades.tolist() == [1, 0, 0]
        assert mu.kernel() == {"a"}

    def test_indicator_full_and_empty(self):
        assert indicator("abc", "abc").grades.tolist() == [1, 1, 1]
        assert indicator("abc", set()).grades.tolist() == [0, 0, 0]

    def test_indicator_unknown_element(self):
        with pytest.raises(ValueError, match="not in universe"):
            indicator("abc", {"z"})

    def test_support_kernel(self):
        mu = MembershipFunction(("x", "y", "z", "w"), [0.0, 0.3, 1.0, 1.0])
        assert mu.support() == {"y", "z", "w"}
        assert mu.kernel() == {"z", "w"}
        assert mu.kernel() <= mu.support()
        assert mu("y") == 0.3

    def test_grade_range(self):
        with pytest.raises(ValueError):
            MembershipFunction(("x",), [1.2])


class TestOperations:
    def test_add(self):
        assert fmat_add(FuzzyMatrix([[0.2, 0.7]]), FuzzyMatrix([[0.5, 0.3]])) == FuzzyMatrix([[0.5, 0.7]])

    def test_add_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            fmat_add(FuzzyMatrix([[0.2]]), FuzzyMatrix([[0.2, 0.1]]))

    @given(square3)
    def test_add_idempotent_and_zero(self, a):
        assert a + a == a
        assert a + FuzzyMatrix.zeros(3) == a

    def test_scale(self):
        a = FuzzyMatrix([[0.2, 0.7]])
        assert fmat_scale(1, a) == a
        assert fmat_scale(0, a) == FuzzyMatrix.zeros(1, 2)
        expect = [[min(0.4, 0.2), min(0.4, 0.7)]]
        assert fmat_scale(0.4, a).entries.tolist() == expect == [[0.2, 0.4]]

    def test_scale_range(self):
        with pytest.raises(ValueError):
            fmat_scale(1.5, FuzzyMatrix([[0.1]]))

    def test_mul_scalars(self):
        assert fmat_mul(FuzzyMatrix([[0.5]]), FuzzyMatrix([[0.8]])) == FuzzyMatrix([[0.5]])

    @given(square3)
    def test_mul_identity(self, a):
        assert FuzzyMatrix.identity(3) @ a == a
        assert a @ FuzzyMatrix.identity(3) == a

    def test_mul_against_loop(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b = rng.random((3, 3)), rng.random((3, 3))
            assert fmat_mul(FuzzyMatrix(a), FuzzyMatrix(b)).entries.tolist() == loop_maxmin(a.tolist(), b.tolist())

    def test_mul_rectangular(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((2, 4)), rng.random((4, 3))
        assert fmat_mul(FuzzyMatrix(a), FuzzyMatrix(b)).entries.tolist() == loop_maxmin(a.tolist(), b.tolist())

    def test_mul_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            fmat_mul(FuzzyMatrix(np.zeros((2, 3))), FuzzyMatrix(np.zeros((2, 3))))

    def test_entries_validated(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            FuzzyMatrix([[1.1]])


class TestSemiringLaws:
    @given(square3, square3, square3)
    def test_add_laws(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a

    @given(fmats(2, 3), fmats(3, 4), fmats(4, 2))
    def test_mul_associative(self, a, b, c):
        assert (a @ b) @ c == a @ (b @ c)

    @given(fmats(2, 3), fmats(3, 3), fmats(3, 3))
    def test_left_distributive(self, a, b, c):
        assert a @ (b + c) == (a @ b) + (a @ c)

    @given(fmats(3, 3), fmats(3, 3), fmats(3, 2))
    def test_right_distributive(self, a, b, c):
        assert (a + b) @ c == (a @ c) + (b @ c)

    @given(square3, square3, unit)
    def test_closure(self, a, b, k):
        for m in (a + b, a @ b, fmat_scale(k, a)):
            assert m.entries.min() >= 0 and m.entries.max() <= 1

    @given(fmats(2, 3), fmats(3, 4))
    def test_transpose_reverses_product(self, a, b):
        assert (a @ b).T == b.T @ a.T


class TestInner:
    def test_kernel_self_product(self):
        metric = MetricMatrix([[1, 0.2], [0.2, 0.7]])
        assert fuzzy_inner([1, 0], [1, 0], metric) == 1

    def test_zero_vector(self):
        metric = MetricMatrix([[1, 0.4], [0.4, 1]])
        assert fuzzy_inner([0.6, 0.2], [0, 0], metric) == 0
        assert fuzzy_inner([0, 0], [0.6, 0.2], metric) == 0

    def test_two_by_two_enumeration(self):
        x, y, a = [0.6, 0.2], [0.3, 0.9], [[1, 0.4], [0.4, 1]]
        # exhaustive: (0,0)->0.3, (0,1)->0.4, (1,0)->0.2, (1,1)->0.2
        terms = [min(x[i], a[i][j], y[j]) for i in range(2) for j in range(2)]
        assert terms == [0.3, 0.4, 0.2, 0.2]
        assert fuzzy_inner(x, y, MetricMatrix(a)) == max(terms) == 0.4

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            fuzzy_inner([0.1, 0.2, 0.3], [0.1, 0.2], FuzzyMatrix.identity(2))

    @given(arrays(np.float64, 3, elements=unit), arrays(np.float64, 3, elements=unit), square3)
    def test_symmetric(self, x, y, a):
        sym = MetricMatrix(np.maximum(a.entries, a.entries.T))
        assert fuzzy_inner(x, y, sym) == fuzzy_inner(y, x, sym)
        assert fuzzy_inner(x, y, sym) == loop_inner(x.tolist(), y.tolist(), sym.entries.tolist())

    def test_scalar_axiom(self):
        rng = np.random.default_rng(3)
        a = rng.random((3, 3))
        metric = MetricMatrix(np.maximum(a, a.T))
        for _ in range(200):
            u, v, k = rng.random(3), rng.random(3), rng.random()
            assert fuzzy_inner(np.minimum(k, u), v, metric) == min(k, fuzzy_inner(u, v, metric))

    def test_additivity_exhaustive(self):
        grid = [0.0, 0.5, 1.0]
        metric = MetricMatrix([[1.0, 0.5], [0.5, 0.5]])
        for u0, u1, v0, v1, w0, w1 in itertools.product(grid, repeat=6):
            u, v, w = [u0, u1], [v0, v1], [w0, w1]
            lhs = fuzzy_inner(np.maximum(u, v), w, metric)
            assert lhs == max(fuzzy_inner(u, w, metric), fuzzy_inner(v, w, metric))

    def test_expansion_formula_exhaustive(self):
        grid = [0.0, 0.5, 1.0]
        metric = MetricMatrix([[1.0, 0.5], [0.5, 0.5]])
        for k, h, u0, u1, v0, v1 in itertools.product(grid, repeat=6):
            u, v = [u0, u1], [v0, v1]
            lhs = fuzzy_inner(np.minimum(k, u), np.minimum(h, v), metric)
            assert lhs == min(k, h, fuzzy_inner(u, v, metric))

    def test_expansion_formula_sums(self):
        rng = np.random.default_rng(4)
        a = rng.random((3, 3))
        metric = MetricMatrix(np.maximum(a, a.T))
        for _ in range(300):
            m, n = rng.integers(1, 4, size=2)
            us, vs = rng.random((m, 3)), rng.random((n, 3))
            ks, hs = rng.random(m), rng.random(n)
            left = np.max(np.minimum(ks[:, None], us), axis=0)
            right = np.max(np.minimum(hs[:, None], vs), axis=0)
            lhs = fuzzy_inner(left, right, metric)
            rhs = max(min(ks[i], hs[j], fuzzy_inner(us[i], vs[j], metric)) for i in range(m) for j in range(n))
            assert lhs == rhs


class TestChangeOfBasis:
    def test_identity(self):
        a = MetricMatrix([[1, 0.3], [0.3, 0.8]])
        assert change_of_basis(a, FuzzyMatrix.identity(2)) == a

    def test_zero_metric(self):
        rng = np.random.default_rng(0)
        out = change_of_basis(MetricMatrix(np.zeros((3, 3))), FuzzyMatrix(rng.random((3, 3))))
        assert out == FuzzyMatrix.zeros(3)

    def test_random_against_loop(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a = rng.random((3, 3))
            a = np.maximum(a, a.T)
            c = rng.random((3, 3))
            b = change_of_basis(MetricMatrix(a), FuzzyMatrix(c))
            expect = loop_maxmin(loop_maxmin(c.T.tolist(), a.tolist()), c.tolist())
            assert b.entries.tolist() == expect
            assert (b.entries == b.entries.T).all()

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            change_of_basis(MetricMatrix(np.eye(2)), FuzzyMatrix(np.eye(3)))

    def test_metric_symmetry_enforced(self):
        with pytest.raises(ValueError, match="symmetric"):
            MetricMatrix([[1, 0.2], [0.3, 1]])


class TestAdjoint:
    def test_identity(self):
        i = FuzzyMatrix.identity(3)
        assert adjoint_check(i, i, 50)

    def test_transpose_is_adjoint(self):
        rng = np.random.default_rng(6)
        for n in range(1, 6):
            t = FuzzyMatrix(rng.random((n, n)))
            assert adjoint_check(t, t.T, 100, seed=n)

    def test_nilpotent_counterexample(self):
        t = FuzzyMatrix([[0, 1], [0, 0]])
        # basis probe x = e_2, y = e_1: <T e_2, e_1> = 1 but <e_2, T e_1> = 0
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        ident = FuzzyMatrix.identity(2)
        assert fuzzy_inner(apply(t, e2), e1, ident) == 1
        assert fuzzy_inner(e2, apply(t, e1), ident) == 0
        assert not adjoint_check(t, t, 0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            adjoint_check(FuzzyMatrix.identity(2), FuzzyMatrix.identity(3))


class TestLinearity:
    def test_identity(self):
        assert linearity_check(FuzzyMatrix.identity(3), 50)

    def test_random(self):
        t = FuzzyMatrix(np.random.default_rng(7).random((4, 4)))
        assert linearity_check(t, 100)

    def test_zero(self):
        assert linearity_check(FuzzyMatrix.zeros(3), 50)

    def test_sides_against_loop_oracle(self):
        rng = np.random.default_rng(8)
        t = rng.random((4, 4)).tolist()
        for _ in range(100):
            a, b, k = rng.random((4, 4)).tolist(), rng.random((4, 4)).tolist(), rng.random()
            a_plus_b = [[max(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
            lhs = loop_maxmin(t, a_plus_b)
            rhs = [[max(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(loop_maxmin(t, a), loop_maxmin(t, b))]
            assert lhs == rhs
            ka = [[min(k, x) for x in row] for row in a]
            assert loop_maxmin(t, ka) == [[min(k, x) for x in row] for row in loop_maxmin(t, a)]

    def test_nonlinear_callable_fails(self):
        def squash(a):
            return FuzzyMatrix(a.entries**2)

        assert not linearity_check(squash, 20, size=(2, 2))


class TestMatrixFiles:
    def test_round_trip(self):
        m = FuzzyMatrix(np.random.default_rng(9).random((2, 3)))
        assert parse_matrix(format_matrix(m)) == m

    def test_format(self):
        assert parse_matrix("2 2\n0.5 0.25\n1 0\n").entries.tolist() == [[0.5, 0.25], [1.0, 0.0]]

    @pytest.mark.parametrize(
        "text,match",
        [("", "rows cols"), ("2 2\n0.1 0.2 0.3", "expected 4"), ("1 1\n1.5", r"\[0, 1\]"), ("a b", "header")],
    )
    def test_errors(self, text, match):
        with pytest.raises(ValueError, match=match):
            parse_matrix(text)
