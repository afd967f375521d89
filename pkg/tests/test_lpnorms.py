"""Square-function norms of symbol orbits t -> t^{-theta} phi(tA) x.

TestSpecValidation  the power-weight window and quadrature resolution
TestLpNorm          Beta-integral closed forms for the p-in-t norms
TestGram            the quadrature Gram matrix and its exact constant
TestGammaNorm       Monte Carlo estimator against the p = 2 collapse
TestTlNorm          coordinate-wise inner integrals and their duals
"""

import math

import numpy as np
import pytest

from sectorsum.contour import z2_over_1pz_4, z_over_1pz_sq
from sectorsum.core import MixedNormSpec, as_operator, dirichlet_laplacian_1d
from sectorsum.errors import WeightOutOfRange
from sectorsum.lpnorms import (SquareFunctionSpec, dual_tl_norm, gamma_norm,
                               lp_norm, square_function_gram, tl_norm)

BETA_22 = 1.0 / 6.0      # B(2,2) = Int t^2/(1+t)^4 dt/t
BETA_44 = 1.0 / 140.0    # B(4,4) = Int t^4/(1+t)^8 dt/t


def _beta(a, b):
    return math.gamma(a) * math.gamma(b) / math.gamma(a + b)


class TestSpecValidation:
    """Weight window checks and quadrature resolution."""

    def test_weight_inside_window_passes(self):
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), theta=0.5)
        spec.check_weight()  # (-1, 1) window

    def test_weight_outside_window_raises(self):
        for theta in (1.0, 1.5, -1.0, -2.0):
            spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), theta=theta)
            with pytest.raises(WeightOutOfRange):
                spec.check_weight()

    def test_resolve_quad_is_halfline(self):
        A = as_operator(np.diag([0.5, 4.0]))
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        q = spec.resolve_quad(A)
        assert q.kind == "halfline_dt_over_t"
        # the grid must straddle the reciprocal spectral range
        assert q.t_grid()[0] < 0.25 and q.t_grid()[-1] > 2.0

    def test_explicit_quad_wins(self):
        from sectorsum.contour import halfline_quadrature
        q = halfline_quadrature(tol=1e-6, decay_zero=1.0, decay_inf=1.0,
                                margin=1.0)
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), quad=q)
        assert spec.resolve_quad(as_operator(np.eye(2))) is q


class TestLpNorm:
    """Weighted p-in-t norms against Beta-integral closed forms."""

    def test_self_adjoint_p2_identity(self):
        """For symmetric positive A and phi = z/(1+z)^2 the squared
        p = 2 norm is ||x||^2 B(2,2) = ||x||^2/6, any x."""
        A = dirichlet_laplacian_1d(8, 1.0)
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        rng = np.random.default_rng(42)
        for _ in range(10):
            x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            got = lp_norm(A, x, spec) ** 2
            want = float(np.linalg.norm(x) ** 2) * BETA_22
            np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_scalar_weighted_beta(self):
        """dim 1, theta = 0, phi = z^2/(1+z)^4: the norm is
        |x| sqrt(B(4,4))."""
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4())
        got = lp_norm(as_operator([[1.0]]), np.array([2.0]), spec)
        np.testing.assert_allclose(got, 2.0 * math.sqrt(BETA_44), rtol=1e-10)

    def test_scalar_theta_shift(self):
        """theta shifts the Beta arguments: B(4-2theta, 4+2theta)
        for the squared symbol z^4/(1+t)^8."""
        theta = 0.25
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4(), theta=theta)
        got = lp_norm(as_operator([[1.0]]), np.array([1.0]), spec)
        want = math.sqrt(_beta(4.0 - 2.0 * theta, 4.0 + 2.0 * theta))
        np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_sup_norm_hits_symbol_max(self):
        """p = inf picks up sup_t |phi(t)| = 1/4 at t = 1."""
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), p=math.inf)
        got = lp_norm(as_operator([[1.0]]), np.array([2.0]), spec)
        np.testing.assert_allclose(got, 0.5, rtol=1e-12)

    def test_homogeneity(self):
        A = as_operator(np.diag([1.0, 3.0]))
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), p=4.0)
        x = np.array([1.0, -2.0 + 1j])
        np.testing.assert_allclose(lp_norm(A, 3.0 * x, spec),
                                   3.0 * lp_norm(A, x, spec), rtol=1e-12)

    def test_spectrum_invariance_for_positive_diagonal(self):
        """The dt/t measure is dilation invariant, so each positive
        eigenvalue sees the same integral."""
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        x = np.array([0.0, 1.0, 0.0])
        for d in ([1.0, 1.0, 1.0], [0.1, 5.0, 90.0]):
            got = lp_norm(as_operator(np.diag(d)), x, spec)
            np.testing.assert_allclose(got, math.sqrt(BETA_22), rtol=1e-10)


class TestGram:
    """G = Int (t^{-theta} phi(tA))^* (...) dt/t and its norm constant."""

    def test_diagonal_gram_is_scaled_identity(self):
        A = as_operator(np.diag([1.0, 3.0, 9.0]))
        g = square_function_gram(A, z_over_1pz_sq())
        np.testing.assert_allclose(g.gram, BETA_22 * np.eye(3), atol=1e-11)
        np.testing.assert_allclose(g.constant, math.sqrt(BETA_22),
                                   rtol=1e-10)

    def test_quadratic_form_matches_lp2(self):
        A = dirichlet_laplacian_1d(6, 1.0)
        g = square_function_gram(A, z_over_1pz_sq())
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), quad=g.quad)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        quad_form = float(np.real(x.conj() @ g.gram @ x))
        np.testing.assert_allclose(quad_form, lp_norm(A, x, spec) ** 2,
                                   rtol=1e-10)

    def test_refinement_stability(self):
        A = as_operator(np.diag([0.5, 2.0]))
        g = square_function_gram(A, z_over_1pz_sq())
        g2 = square_function_gram(A, z_over_1pz_sq(), quad=g.quad.refined())
        assert abs(g2.constant - g.constant) < 1e-10

    def test_gram_is_hermitian_psd(self):
        A = as_operator(np.array([[1.0, 0.3], [0.0, 2.0]]))
        g = square_function_gram(A, z_over_1pz_sq())
        np.testing.assert_allclose(g.gram, g.gram.conj().T, atol=1e-12)
        w = np.linalg.eigvalsh(g.gram)
        assert w.min() > -1e-12


class TestGammaNorm:
    """Gaussian Monte Carlo estimator of the orbit norm."""

    def test_collapses_to_lp2_euclidean(self):
        """E||sum g_j y_j||_2^2 = sum ||y_j||_2^2: the estimate agrees
        with the deterministic p = 2 norm within 3 standard errors."""
        rng = np.random.default_rng(20)
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        hits = 0
        cases = 12
        for i in range(cases):
            dim = int(rng.integers(2, 6))
            A = as_operator(np.diag(rng.uniform(0.3, 5.0, size=dim)))
            x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            est = gamma_norm(A, x, spec, samples=3000, seed=100 + i)
            want = lp_norm(A, x, spec)
            if abs(est.estimate - want) <= 3.0 * est.stderr:
                hits += 1
        assert hits >= cases - 1

    def test_zero_vector(self):
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        est = gamma_norm(as_operator(np.eye(2)), np.zeros(2), spec)
        assert est.estimate == 0.0 and est.stderr == 0.0

    def test_seed_determinism(self):
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        A = as_operator(np.diag([1.0, 2.0]))
        x = np.array([1.0, 1.0 + 0j])
        a = gamma_norm(A, x, spec, samples=500, seed=7)
        b = gamma_norm(A, x, spec, samples=500, seed=7)
        assert a.estimate == b.estimate and a.stderr == b.stderr

    def test_stderr_shrinks_with_samples(self):
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq())
        A = as_operator(np.diag([1.0, 4.0]))
        x = np.array([1.0, -1.0 + 0j])
        small = gamma_norm(A, x, spec, samples=500, seed=1)
        large = gamma_norm(A, x, spec, samples=50000, seed=1)
        assert large.stderr < small.stderr


class TestTlNorm:
    """Outer norms of coordinate-wise inner dt/t integrals."""

    def test_scalar_beta_oracle(self):
        """dim 1, q = 2, theta = 1/2, phi = z^2/(1+z)^4:
        value is |x| sqrt(B(3,5))."""
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4(), theta=0.5, p=2.0)
        got = tl_norm(as_operator([[1.0]]), np.array([2.0]), spec)
        np.testing.assert_allclose(got, 2.0 * math.sqrt(_beta(3.0, 5.0)),
                                   rtol=1e-10)

    def test_dim1_tl_equals_lp(self):
        """With one coordinate the inner integral is the whole norm."""
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4(), theta=0.25, p=2.0)
        A = as_operator([[1.0]])
        x = np.array([1.7])
        np.testing.assert_allclose(tl_norm(A, x, spec),
                                   lp_norm(A, x, spec), rtol=1e-10)

    def test_diagonal_dilation_invariance(self):
        """Positive diagonal spectra factor out of the inner integrals."""
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), p=2.0)
        A = as_operator(np.diag([1.0, 3.0, 9.0]))
        x = np.array([1.0, 2.0, -2.0])
        np.testing.assert_allclose(tl_norm(A, x, spec),
                                   np.linalg.norm(x) * math.sqrt(BETA_22),
                                   rtol=1e-10)

    def test_sup_inner_exponent(self):
        """q = inf takes the per-coordinate sup of |phi(t lambda) x|,
        here sup |phi| * 4 = 1; the grid samples it from below."""
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), p=math.inf)
        got = tl_norm(as_operator(np.diag([1.0, 2.0])),
                      np.array([4.0, 0.0]), spec)
        assert 0.99 < got <= 1.0 + 1e-12

    def test_weight_window_enforced(self):
        spec = SquareFunctionSpec(symbol=z_over_1pz_sq(), theta=1.5)
        with pytest.raises(WeightOutOfRange):
            tl_norm(as_operator([[1.0]]), np.array([1.0]), spec)

    def test_dual_symmetric_point_is_self_dual(self):
        """At q = 2, theta = 1/2 the dual parameters coincide with the
        primal ones, so on the scalar unit operator both sides agree."""
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4(), theta=0.5, p=2.0)
        A = as_operator([[1.0]])
        x = np.array([2.0])
        np.testing.assert_allclose(dual_tl_norm(A, x, spec),
                                   tl_norm(A, x, spec), rtol=1e-10)

    def test_dual_scales_with_inverse(self):
        """The dual route pulls the vector through A^{-T} once."""
        spec = SquareFunctionSpec(symbol=z2_over_1pz_4(), theta=0.5, p=2.0)
        a = 4.0
        got = dual_tl_norm(as_operator([[a]]), np.array([1.0]), spec)
        ref = dual_tl_norm(as_operator([[1.0]]), np.array([1.0]), spec)
        assert got < ref  # the factor 1/a shrinks it
        assert got > 0.0
