import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revcyc.core import GeneratorVector, to_dense
from revcyc.errors import ContractViolation, DegenerateJacobianError
from revcyc.spectral import (
    SpectrumBatch,
    SpectrumDecomposition,
    dft,
    eigenvector_matrix,
    jacobi_eigenvalues,
    jacobi_eigenvalues_batch,
    jacobian3,
    map_eigen_to_matrix3,
    reconstruct,
    rotation_block,
    spectrum,
    spectrum_batch,
)

finite = st.floats(-100, 100, allow_nan=False)


def gen(rng, n):
    return GeneratorVector(tuple(rng.normal(size=n)))


def dense_stack(a):
    n = a.shape[1]
    return a[:, (np.arange(n)[:, None] + np.arange(n)[None, :]) % n]


class TestDft:
    def test_delta(self):
        np.testing.assert_allclose(dft(GeneratorVector((1, 0, 0))), [1, 1, 1], atol=1e-15)

    def test_constant(self):
        np.testing.assert_allclose(dft(GeneratorVector((1, 1, 1))), [3, 0, 0], atol=1e-15)

    def test_four_terms(self):
        # by hand with w = i: c1 = 1 + 2i - 3 - 4i
        c = dft(GeneratorVector((1, 2, 3, 4)))
        np.testing.assert_allclose(c, [10, -2 - 2j, -2, -2 + 2j], atol=1e-14)
        assert c[1] == pytest.approx(np.conj(c[3]))

    @pytest.mark.parametrize("n", [2, 4, 8, 32, 128])
    def test_radix2_matches_direct(self, rng, n):
        g = gen(rng, n)
        np.testing.assert_allclose(dft(g, fast=True), dft(g), atol=1e-12)

    def test_fast_ignored_for_other_sizes(self, rng):
        g = gen(rng, 15)
        np.testing.assert_array_equal(dft(g, fast=True), dft(g))


class TestSpectrum:
    def test_delta(self):
        s = spectrum(GeneratorVector((1, 0, 0)))
        assert s.trivial == 1.0
        assert s.magnitudes == pytest.approx((1.0,))
        np.testing.assert_allclose(s.sorted_eigenvalues(), [-1, 1, 1], atol=1e-15)

    def test_constant(self):
        s = spectrum(GeneratorVector((1, 1, 1)))
        assert s.trivial == 3.0
        assert s.magnitudes[0] == pytest.approx(0.0, abs=1e-15)

    def test_even_four(self):
        g = GeneratorVector((1, 2, 3, 4))
        s = spectrum(g)
        assert s.trivial == 10.0
        assert s.even_extra == -2.0
        assert s.magnitudes == pytest.approx((2 * math.sqrt(2),))
        np.testing.assert_allclose(s.sorted_eigenvalues(), jacobi_eigenvalues(to_dense(g)), atol=1e-12)

    def test_zero_coefficient_phase_is_zero(self):
        s = spectrum(GeneratorVector((0.0, 0.0, 0.0, 0.0, 0.0)))
        assert s.phases == (0.0, 0.0)

    @pytest.mark.parametrize("n,pairs", [(2, 0), (3, 1), (4, 1), (5, 2), (8, 3), (15, 7), (16, 7)])
    def test_pair_count(self, rng, n, pairs):
        s = spectrum(gen(rng, n))
        assert len(s.pairs) == pairs
        assert len(s.eigenvalues()) == n
        assert (s.even_extra is None) == (n % 2 == 1)
        assert all(0.0 <= p < 2 * math.pi for p in s.phases)

    def test_eigenvalue_order(self):
        s = SpectrumDecomposition(6, 1.0, (3.0, 2.0), (0.1, 0.2), even_extra=-5.0)
        np.testing.assert_array_equal(s.eigenvalues(), [1, 3, 2, -5, -2, -3])

    def test_invalid_decomposition(self):
        with pytest.raises(ContractViolation):
            SpectrumDecomposition(5, 1.0, (1.0,), (0.0,))
        with pytest.raises(ContractViolation):
            SpectrumDecomposition(4, 1.0, (1.0,), (0.0,))
        with pytest.raises(ContractViolation):
            SpectrumDecomposition(3, 1.0, (1.0,), (7.0,))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(2, 40).flatmap(lambda n: st.lists(finite, min_size=n, max_size=n)))
    def test_trivial_is_plain_sum(self, entries):
        g = GeneratorVector(tuple(entries))
        assert spectrum(g).trivial == sum(g.entries)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 20).flatmap(lambda k: st.lists(finite, min_size=2 * k + 1, max_size=2 * k + 1)))
    def test_odd_nontrivial_closed_under_negation(self, entries):
        s = spectrum(GeneratorVector(tuple(entries)))
        nontrivial = np.sort(s.eigenvalues()[1:])
        assert np.array_equal(nontrivial, -nontrivial[::-1])

    def test_batch_iteration_roundtrip(self, rng):
        a = rng.normal(size=(5, 6))
        b = spectrum_batch(a)
        again = SpectrumBatch.from_spectra(list(b))
        np.testing.assert_array_equal(again.magnitudes, b.magnitudes)
        np.testing.assert_array_equal(again.even_extra, b.even_extra)
        assert b[2] == spectrum(GeneratorVector(tuple(a[2])))


class TestEigenvectors:
    def test_3x3_rotation_block_entries(self):
        th = 0.83
        r = rotation_block([th], even=False)
        s2 = 1 / math.sqrt(2)
        expected = [
            [s2 * np.exp(-0.5j * th), 1j * s2 * np.exp(-0.5j * th)],
            [s2 * np.exp(0.5j * th), -1j * s2 * np.exp(0.5j * th)],
        ]
        np.testing.assert_allclose(r, expected, atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 9, 16, 31])
    def test_orthogonal(self, rng, n):
        o = eigenvector_matrix(spectrum(gen(rng, n))).values
        np.testing.assert_allclose(o.T @ o, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(o, axis=0), 1.0, atol=1e-12)

    def test_reconstruct_five(self, rng):
        g = gen(rng, 5)
        assert np.max(np.abs(reconstruct(spectrum(g)).values - to_dense(g).values)) < 1e-10

    @pytest.mark.parametrize("g", [(1, 0, 0), (1, 1, 1)])
    def test_reconstruct_simple(self, g):
        g = GeneratorVector(g)
        np.testing.assert_allclose(reconstruct(spectrum(g)).values, to_dense(g).values, atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 4, 15, 64, 100, 101])
    def test_reconstruct_roundtrip(self, rng, n):
        for _ in range(3):
            g = gen(rng, n)
            assert np.max(np.abs(reconstruct(spectrum(g)).values - to_dense(g).values)) < 1e-10

    def test_columns_are_eigenvectors_in_lambda_order(self, rng):
        g = gen(rng, 7)
        s = spectrum(g)
        o = eigenvector_matrix(s).values
        h = to_dense(g).values
        np.testing.assert_allclose(h @ o, o * s.eigenvalues(), atol=1e-12)


class TestJacobi:
    def test_identity(self):
        np.testing.assert_allclose(jacobi_eigenvalues(np.eye(3)), [1, 1, 1])

    def test_permutation_like(self):
        np.testing.assert_allclose(jacobi_eigenvalues(to_dense(GeneratorVector((1, 0, 0)))), [-1, 1, 1], atol=1e-14)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(jacobi_eigenvalues(np.zeros((4, 4))), np.zeros(4))

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ContractViolation):
            jacobi_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_general_symmetric_vs_lapack(self, rng):
        m = rng.normal(size=(12, 12))
        m = m + m.T
        np.testing.assert_allclose(jacobi_eigenvalues(m), np.linalg.eigvalsh(m), atol=1e-11)

    def test_random_15_vs_closed_form(self, rng):
        g = gen(rng, 15)
        np.testing.assert_allclose(jacobi_eigenvalues(to_dense(g)), spectrum(g).sorted_eigenvalues(), atol=1e-9)

    @pytest.mark.parametrize("n", [3, 4, 5, 8])
    def test_batch_vs_closed_form(self, rng, n):
        a = rng.normal(size=(40, n))
        ev = jacobi_eigenvalues_batch(dense_stack(a))
        np.testing.assert_allclose(ev, spectrum_batch(a).sorted_eigenvalues(), atol=1e-9)


class TestMap3:
    def test_zero_magnitude(self):
        assert map_eigen_to_matrix3(3.0, 0.0, 1.234).entries == pytest.approx((1, 1, 1), abs=1e-15)

    def test_theta_zero(self):
        g = map_eigen_to_matrix3(1.0, 1.0, 0.0)
        assert g.entries == pytest.approx((1, 0, 0), abs=1e-15)
        s = spectrum(g)
        assert (s.trivial, s.magnitudes[0]) == pytest.approx((1.0, 1.0))

    def test_theta_quarter(self):
        r3 = 1 / math.sqrt(3)
        assert map_eigen_to_matrix3(0.0, 1.0, math.pi / 2).entries == pytest.approx((0, -r3, r3), abs=1e-15)

    def test_negative_magnitude(self):
        with pytest.raises(ContractViolation):
            map_eigen_to_matrix3(0.0, -1.0, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(finite, st.floats(1e-3, 100), st.floats(0, 2 * math.pi, exclude_max=True))
    def test_spectrum_recovers_parameters(self, e1, m, th):
        s = spectrum(map_eigen_to_matrix3(e1, m, th))
        assert s.trivial == pytest.approx(e1, abs=1e-10 * max(1, abs(e1) + m))
        assert s.magnitudes[0] == pytest.approx(m, abs=1e-10 * max(1, abs(e1) + m))
        dth = abs((s.phases[0] - th + math.pi) % (2 * math.pi) - math.pi)
        assert dth < 1e-10 * max(1, (abs(e1) + m) / m)


class TestJacobian3:
    def test_unit(self):
        assert jacobian3(0.0, 3 * math.sqrt(3) / 2, 0.0) == pytest.approx(1.0, rel=1e-15)

    def test_numeric_matches(self):
        an = jacobian3(1.0, 1.0, 0.7)
        assert an == pytest.approx(0.3849, abs=1e-4)
        assert jacobian3(1.0, 1.0, 0.7, numeric=True) == pytest.approx(an, rel=1e-6)

    def test_independent_of_e1_theta(self):
        vals = {jacobian3(e1, 0.8, th) for e1 in (-2.0, 0.0, 5.0) for th in (0.0, 1.0, 4.0)}
        assert len(vals) == 1

    def test_degenerate(self):
        with pytest.raises(DegenerateJacobianError):
            jacobian3(1.0, 0.0, 0.0)
