import math

import numpy as np
import pytest

from beccavity.numerics import (
    NumericsError, eig_dense, find_roots_scan, laplacian_1d,
    refine_smallest_eigenpair, solve_cubic_real,
)


class TestFindRootsScan:
    def test_parabola(self):
        roots = find_roots_scan(lambda x: x * x - 4.0, (0, 5), n_scan=100, tol=1e-12)
        assert len(roots) == 1
        assert roots.values[0] == pytest.approx(2.0, abs=1e-10)

    def test_sine(self):
        roots = find_roots_scan(math.sin, (1, 7), n_scan=200, tol=1e-12)
        assert len(roots) == 2
        assert roots.values[0] == pytest.approx(math.pi, abs=1e-10)
        assert roots.values[1] == pytest.approx(2 * math.pi, abs=1e-10)

    def test_no_real_roots(self):
        roots = find_roots_scan(lambda x: x * x + 1.0, (-5, 5), n_scan=100)
        assert len(roots) == 0

    def test_nonfinite_named(self):
        with pytest.raises(NumericsError, match="x="):
            find_roots_scan(lambda x: 1.0 / x, (-1, 1), n_scan=201)

    def test_roots_sorted_with_residuals(self):
        roots = find_roots_scan(lambda x: (x - 1) * (x + 2) * x, (-5, 5), n_scan=300)
        values = roots.values
        assert values == sorted(values)
        assert all(r.residual < 1e-9 for r in roots)

    def test_finds_all_simple_polynomial_roots(self):
        # random polynomials with known roots; scan density above twice the
        # root count over the interval
        rng = np.random.default_rng(42)
        for _ in range(30):
            n_roots = rng.integers(1, 6)
            true = np.sort(rng.uniform(-4, 4, n_roots))
            if np.min(np.diff(true), initial=1.0) < 1e-2:
                continue
            coeffs = np.poly(true)
            found = find_roots_scan(lambda x: np.polyval(coeffs, x), (-5, 5),
                                    n_scan=4096, tol=1e-13)
            assert len(found) == n_roots
            np.testing.assert_allclose(found.values, true, atol=1e-8)


class TestSolveCubicReal:
    def test_single_root(self):
        roots = solve_cubic_real(1, 0, 0, -8)
        assert roots.values == pytest.approx([2.0], abs=1e-12)

    def test_three_roots(self):
        roots = solve_cubic_real(1, -6, 11, -6)
        assert roots.values == pytest.approx([1.0, 2.0, 3.0], abs=1e-10)

    def test_complex_pair_discarded(self):
        roots = solve_cubic_real(1, 0, 1, 0)
        assert roots.values == pytest.approx([0.0], abs=1e-12)

    def test_not_cubic(self):
        with pytest.raises(NumericsError, match="not cubic"):
            solve_cubic_real(0, 1, 1, 1)

    def test_double_root_collapsed(self):
        roots = solve_cubic_real(1, -4, 5, -2)  # (x-1)^2 (x-2)
        assert len(roots) == 2
        assert roots.values == pytest.approx([1.0, 2.0], abs=1e-6)


class TestEigDense:
    def test_diagonal(self):
        dec = eig_dense(np.diag([1.0 + 0j, 2.0 + 3.0j]))
        np.testing.assert_allclose(dec.eigenvalues, [1.0, 2.0 + 3.0j], atol=1e-14)

    def test_rotation_generator(self):
        dec = eig_dense(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex))
        for expected in (-1j, 1j):
            assert np.min(np.abs(dec.eigenvalues - expected)) < 1e-14

    def test_defective_double_zero(self):
        # trace 0, determinant 0: double zero of the undriven atomic sector
        dec = eig_dense(np.array([[1.0, 1.0], [-1.0, -1.0]], dtype=complex))
        assert np.all(np.abs(dec.eigenvalues) < 1e-7)

    def test_residual_invariant_and_normalization(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
        dec = eig_dense(A)
        norm = np.linalg.norm(A, np.inf)
        for w, v in zip(dec.eigenvalues, dec.eigenvectors.T):
            assert np.max(np.abs(A @ v - w * v)) / np.max(np.abs(v)) < 1e-8 * norm
            assert np.max(np.abs(v)) == pytest.approx(1.0, rel=1e-12)

    def test_determinism_sorted(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(25, 25)) + 1j * rng.normal(size=(25, 25))
        w1 = eig_dense(A).eigenvalues
        w2 = eig_dense(A.copy()).eigenvalues
        np.testing.assert_array_equal(w1, w2)
        assert list(w1) == sorted(w1, key=lambda z: (z.real, z.imag))

    def test_rejects_nonsquare(self):
        with pytest.raises(NumericsError):
            eig_dense(np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        A = np.zeros((2, 2), dtype=complex)
        A[0, 0] = np.nan
        with pytest.raises(NumericsError):
            eig_dense(A)


class TestRefineSmallestEigenpair:
    def test_exact_null_vector(self):
        rng = np.random.default_rng(11)
        B = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        null = rng.normal(size=6) + 1j * rng.normal(size=6)
        null /= np.linalg.norm(null)
        A = B - np.outer(B @ null, null.conj())  # A @ null = 0 exactly-ish
        lam, vec = refine_smallest_eigenpair(A)
        assert abs(lam) < 1e-12 * np.linalg.norm(A, np.inf)
        assert abs(np.vdot(null, vec)) > 0.9999


class TestLaplacian:
    def test_exact_on_quadratic(self):
        L = laplacian_1d(5, 1.0)
        values = L @ np.array([0.0, 1.0, 4.0, 9.0, 16.0])
        np.testing.assert_allclose(values[1:4], [2.0, 2.0, 2.0], atol=1e-12)

    def test_stencil_shape(self):
        L = laplacian_1d(3, 0.5)
        inv_h2 = 4.0
        expected = inv_h2 * np.array([[-2, 1, 0], [1, -2, 1], [0, 1, -2]], dtype=float)
        np.testing.assert_allclose(L, expected)

    def test_particle_in_a_box(self):
        n, h = 200, 1.0 / 201
        L_box = (n + 1) * h
        w = np.linalg.eigvalsh(-laplacian_1d(n, h))
        assert np.min(w) == pytest.approx((math.pi / L_box) ** 2, rel=1e-4)

    def test_convergence_order(self):
        # halving h must cut the lowest-eigenvalue error by >= 3.8x
        def lowest_err(n):
            h = 1.0 / (n + 1)
            w = np.min(np.linalg.eigvalsh(-laplacian_1d(n, h)))
            return abs(w - math.pi**2)

        assert lowest_err(100) / lowest_err(201) >= 3.8

    def test_bad_inputs(self):
        with pytest.raises(NumericsError):
            laplacian_1d(2, 1.0)
        with pytest.raises(NumericsError):
            laplacian_1d(10, -1.0)
