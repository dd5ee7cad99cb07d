import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revcyc.core import DenseMatrix, GeneratorVector, entry, to_dense, weight_exponent
from revcyc.errors import ContractViolation

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
generators = st.integers(2, 64).flatmap(lambda n: st.lists(finite, min_size=n, max_size=n))


class TestGeneratorVector:
    def test_rejects_short(self):
        with pytest.raises(ContractViolation):
            GeneratorVector((1.0,))

    def test_rejects_nonfinite(self):
        with pytest.raises(ContractViolation):
            GeneratorVector((1.0, float("nan")))

    def test_dim(self):
        assert GeneratorVector((1, 2, 3)).dim == 3


class TestEntry:
    def test_3x3_layout(self):
        a, b, c = 1.5, -2.0, 7.0
        g = GeneratorVector((a, b, c))
        assert entry(g, 2, 2) == c
        assert entry(g, 3, 2) == a
        assert [entry(g, 2, j) for j in (1, 2, 3)] == [b, c, a]

    def test_index_wraps(self):
        g = GeneratorVector((1, 2, 3, 4, 5))
        assert entry(g, 4, 3) == 1

    @pytest.mark.parametrize("i,j", [(0, 1), (1, 4), (4, 1), (-1, 2)])
    def test_out_of_range(self, i, j):
        with pytest.raises(ContractViolation):
            entry(GeneratorVector((1, 2, 3)), i, j)


class TestToDense:
    def test_identity(self):
        np.testing.assert_array_equal(to_dense(GeneratorVector((1, 0))).values, np.eye(2))

    def test_delta(self):
        expected = [[1, 0, 0], [0, 0, 1], [0, 1, 0]]
        np.testing.assert_array_equal(to_dense(GeneratorVector((1, 0, 0))).values, expected)

    def test_constant(self):
        np.testing.assert_array_equal(to_dense(GeneratorVector((1, 1, 1))).values, np.ones((3, 3)))

    def test_symbolic_layout(self):
        a, b, c = 0.1, 0.2, 0.3
        expected = [[a, b, c], [b, c, a], [c, a, b]]
        np.testing.assert_array_equal(to_dense(GeneratorVector((a, b, c))).values, expected)

    def test_dense_is_readonly(self):
        m = to_dense(GeneratorVector((1, 2)))
        with pytest.raises(ValueError):
            m.values[0, 0] = 3.0

    def test_dense_rejects_nonsquare(self):
        with pytest.raises(ContractViolation):
            DenseMatrix(np.zeros((2, 3)))

    @settings(max_examples=60, deadline=None)
    @given(generators)
    def test_symmetric_and_rotating(self, entries):
        m = to_dense(GeneratorVector(tuple(entries))).values
        assert np.array_equal(m, m.T)
        for i in range(len(entries) - 1):
            assert np.array_equal(m[i + 1], np.roll(m[i], -1))


class TestWeightExponent:
    def test_3x3_form(self):
        a, b, c, A = 0.3, -1.1, 0.7, 2.5
        assert weight_exponent(GeneratorVector((a, b, c)), A) == pytest.approx(3 * A * (a * a + b * b + c * c), rel=1e-15)

    def test_zero(self):
        assert weight_exponent(GeneratorVector((0.0,) * 7), 1.3) == 0.0

    def test_2x2_ones(self):
        # dense [[1,1],[1,1]] has Tr(H^T H) = 4
        assert weight_exponent(GeneratorVector((1, 1)), 1.0) == 4.0

    @pytest.mark.parametrize("A", [0.0, -1.0])
    def test_nonpositive_stiffness(self, A):
        with pytest.raises(ContractViolation):
            weight_exponent(GeneratorVector((1, 2)), A)

    @settings(max_examples=60, deadline=None)
    @given(generators, st.floats(0.01, 100))
    def test_matches_dense_trace(self, entries, A):
        g = GeneratorVector(tuple(entries))
        dense = to_dense(g).values
        expected = A * np.sum(dense * dense)
        assert weight_exponent(g, A) == pytest.approx(expected, rel=1e-12, abs=1e-300)
