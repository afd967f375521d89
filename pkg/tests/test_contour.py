"""Holomorphic symbols, contour quadratures, and the sector calculus.

TestSymbols             closed-form values, decay windows, label parsing
TestQuadrature          log-trapezoid grids and their refinement
TestFunctionalCalculus  contour integrals against algebraic oracles
TestPowers              fractional and imaginary powers, all code paths
TestBipProfile          growth-rate fit of the imaginary-power norms
"""

import cmath
import math

import numpy as np
import pytest
import scipy.linalg as sla

from sectorsum.contour import (ContourQuadrature, bip_profile,
                               fractional_power, functional_calculus,
                               halfline_quadrature, imaginary_power,
                               matrix_fractional_power, phi_symbol,
                               power_shift, psi_symbol, rho_n_symbol,
                               sector_quadrature, symbol_by_label,
                               z2_over_1pz_4, z_over_1pz_cubed,
                               z_over_1pz_sq)
from sectorsum.core import LinearOperator, as_operator
from sectorsum.errors import (ConfigError, ContourTooTight, NotConverged,
                              SingularBase, SingularResolvent)

RHO = 2.0 * math.pi / 3.0


def _eig_apply(symbol, M):
    """Diagonalization oracle for symbol evaluation on a matrix."""
    w, V = sla.eig(M)
    return (V * symbol(w)) @ sla.inv(V)


class TestSymbols:
    """Pointwise values, decay bookkeeping, and matrix evaluators."""

    def test_rational_symbol_values(self):
        np.testing.assert_allclose(z_over_1pz_sq()(2.0), 2.0 / 9.0)
        np.testing.assert_allclose(z2_over_1pz_4()(2.0), 4.0 / 81.0)
        np.testing.assert_allclose(z_over_1pz_cubed()(2.0), 2.0 / 27.0)

    def test_psi_value_and_window(self):
        psi = psi_symbol(+1, RHO)
        np.testing.assert_allclose(psi(2.0), 1.0 / (cmath.exp(1j * RHO) + 2.0))
        assert psi.decay_at_zero == 0.0
        assert psi.decay_at_infinity == 1.0
        np.testing.assert_allclose(psi.holo_angle, math.pi - RHO)

    def test_phi_principal_branch(self):
        """phi_+ = z^{1/4} (z - e^{i rho})^{-1/2} with principal roots."""
        phi = phi_symbol(+1, RHO)
        z = 3.0
        want = z ** 0.25 / cmath.sqrt(z - cmath.exp(1j * RHO))
        np.testing.assert_allclose(complex(phi(z)), want, rtol=1e-14)
        assert phi.decay_at_zero == phi.decay_at_infinity == 0.25
        np.testing.assert_allclose(phi.holo_angle, RHO)

    def test_phi_on_branch_point_raises(self):
        phi = phi_symbol(+1, RHO)
        with pytest.raises(SingularResolvent):
            phi(cmath.exp(1j * RHO))

    def test_rho_n_approximates_one(self):
        """1 - rho_n(1) = 2/(n+1) exactly at z = 1."""
        for n in (1, 10, 400):
            np.testing.assert_allclose(1.0 - complex(rho_n_symbol(n)(1.0)),
                                       2.0 / (n + 1.0), rtol=1e-13)

    def test_matrix_eval_matches_diagonalization(self):
        M = np.array([[2.0, 1.0], [0.0, 5.0]], dtype=complex)
        for sym in (z_over_1pz_sq(), z2_over_1pz_4(), z_over_1pz_cubed(),
                    rho_n_symbol(3), psi_symbol(-1, RHO),
                    phi_symbol(+1, RHO)):
            got = sym.matrix_eval(M)
            np.testing.assert_allclose(got, _eig_apply(sym, M), rtol=1e-10,
                                       atol=1e-12, err_msg=sym.label)

    def test_power_shift_value_and_window(self):
        sym = power_shift(0.3, z_over_1pz_sq())
        np.testing.assert_allclose(complex(sym(2.0)),
                                   2.0 ** 0.3 * 2.0 / 9.0, rtol=1e-14)
        np.testing.assert_allclose(sym.decay_at_zero, 1.3)
        np.testing.assert_allclose(sym.decay_at_infinity, 0.7)

    def test_power_shift_outside_window_raises(self):
        with pytest.raises(ConfigError):
            power_shift(1.5, z_over_1pz_sq())
        with pytest.raises(ConfigError):
            power_shift(-2.5, z2_over_1pz_4())

    def test_envelope_constant_away_from_poles(self):
        """With the pole outside the declared sector the ratio sup is 1."""
        from sectorsum.contour import HolomorphicSymbol
        sym = HolomorphicSymbol(eval_fn=lambda z: z / (1.0 + z) ** 2,
                                holo_angle=math.pi / 2, decay_at_zero=1.0,
                                decay_at_infinity=1.0, label="narrow")
        c = sym.envelope_constant()
        assert 0.9 <= c <= 1.1

    def test_envelope_constant_sees_boundary_pole(self):
        """psi's pole sits on the sector boundary, inflating the constant."""
        c = psi_symbol(+1, math.pi / 2).envelope_constant()
        assert c >= 1.0 and math.isfinite(c)

    def test_symbol_by_label_round_trips(self):
        assert symbol_by_label("z_over_1pz_sq").label == "z_over_1pz_sq"
        assert symbol_by_label(" z2_over_1pz_4 ").label == "z2_over_1pz_4"
        assert symbol_by_label("rho_n(7)").label == "rho_n(7)"
        s = symbol_by_label("phi_plus", rho=RHO)
        np.testing.assert_allclose(complex(s(3.0)),
                                   complex(phi_symbol(+1, RHO)(3.0)))
        nested = symbol_by_label("power_shift(0.25,z_over_1pz_sq)")
        np.testing.assert_allclose(nested.decay_at_zero, 1.25)

    def test_symbol_by_label_errors(self):
        with pytest.raises(ConfigError):
            symbol_by_label("psi_plus")  # needs rho
        with pytest.raises(ConfigError):
            symbol_by_label("no_such_symbol")


class TestQuadrature:
    """Grid geometry of the log-trapezoid rules."""

    def test_weights_are_trapezoid(self):
        q = halfline_quadrature(tol=1e-8, decay_zero=1.0, decay_inf=1.0,
                                margin=1.0)
        w = q.weights()
        np.testing.assert_allclose(w[0], 0.5 * q.step)
        np.testing.assert_allclose(w[-1], 0.5 * q.step)
        np.testing.assert_allclose(w[1:-1], q.step)
        np.testing.assert_allclose(w.sum(), q.log_hi - q.log_lo, rtol=1e-12)

    def test_node_count_is_odd(self):
        """Odd counts keep the stride-2 subgrid a valid trapezoid rule."""
        for tol in (1e-4, 1e-8, 1e-12):
            q = sector_quadrature(1.5, tol=tol, decay_zero=1.0,
                                  decay_inf=1.0, margin=0.4)
            assert q.node_count % 2 == 1

    def test_refined_halves_step(self):
        q = halfline_quadrature(tol=1e-8, decay_zero=1.0, decay_inf=1.0,
                                margin=1.0)
        r = q.refined()
        np.testing.assert_allclose(r.step, q.step / 2.0, rtol=1e-12)
        assert r.log_lo == q.log_lo and r.log_hi == q.log_hi
        # coarse nodes survive refinement
        np.testing.assert_allclose(r.t_grid()[::2], q.t_grid(), rtol=1e-12)

    def test_dt_over_t_integral(self):
        """Quadrature of the constant 1 recovers the log-range length."""
        q = halfline_quadrature(tol=1e-10, decay_zero=2.0, decay_inf=2.0,
                                margin=1.0, scale_lo=0.5, scale_hi=2.0)
        total = float(np.sum(q.weights()))
        np.testing.assert_allclose(total, q.log_hi - q.log_lo, rtol=1e-12)

    def test_validation(self):
        with pytest.raises(ConfigError):
            ContourQuadrature("no_such_kind", None, 0.0, 1.0)
        with pytest.raises(ConfigError):
            ContourQuadrature("sector_boundary", None, 0.0, 1.0)
        with pytest.raises(ConfigError):
            ContourQuadrature("halfline_dt_over_t", None, 1.0, 0.0)


class TestFunctionalCalculus:
    """Contour integrals reproduce algebraic evaluations."""

    def test_diagonal_positive(self):
        A = as_operator(np.diag([0.5, 2.0, 7.0]))
        F = functional_calculus(A, z_over_1pz_sq())
        lam = np.array([0.5, 2.0, 7.0])
        np.testing.assert_allclose(np.diag(F.entries), lam / (1 + lam) ** 2,
                                   rtol=1e-9)
        off = F.entries - np.diag(np.diag(F.entries))
        assert np.abs(off).max() < 1e-10

    def test_resolvent_product_oracle(self):
        """phi(A) = A (I+A)^{-2} computed by direct solves."""
        M = np.array([[2.0, 1.0], [0.0, 5.0]])
        A = as_operator(M)
        F = functional_calculus(A, z_over_1pz_sq())
        P = sla.inv(np.eye(2) + M)
        np.testing.assert_allclose(F.entries, P @ M @ P, rtol=1e-9,
                                   atol=1e-11)

    def test_rho_n_oracle(self):
        M = np.array([[1.0, 0.3], [0.1, 4.0]])
        F = functional_calculus(as_operator(M), rho_n_symbol(3))
        want = 3.0 * sla.inv(3.0 * np.eye(2) + M) - sla.inv(np.eye(2) + 3 * M)
        np.testing.assert_allclose(F.entries, want, rtol=1e-9, atol=1e-11)

    def test_spectral_angle_must_clear_symbol_angle(self):
        A = as_operator(np.diag([cmath.exp(0.9j), 1.0]))
        with pytest.raises(ContourTooTight):
            functional_calculus(A, phi_symbol(+1, 0.5))

    def test_rejects_halfline_contour(self):
        q = halfline_quadrature(tol=1e-8, decay_zero=1.0, decay_inf=1.0,
                                margin=1.0)
        with pytest.raises(ConfigError):
            functional_calculus(as_operator([[1.0]]), z_over_1pz_sq(), quad=q)

    def test_contour_angle_must_enclose_spectrum(self):
        """Explicit contour inside the spectral sector is rejected."""
        A = as_operator(np.diag([cmath.exp(1.0j), 1.0]))
        q = ContourQuadrature("sector_boundary", 0.5, -20.0, 20.0, 801)
        with pytest.raises(ContourTooTight):
            functional_calculus(A, z_over_1pz_sq(), quad=q)

    def test_coarse_contour_raises_not_converged(self):
        A = as_operator(np.diag([1.0, 3.0]))
        q = ContourQuadrature("sector_boundary", math.pi / 2, -18.0, 18.0, 41)
        with pytest.raises(NotConverged):
            functional_calculus(A, z_over_1pz_sq(), quad=q, tol=1e-12)


class TestPowers:
    """Fractional and imaginary powers on every dispatch path."""

    def test_spd_fractional_power(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((5, 5))
        S = M @ M.T + 5.0 * np.eye(5)
        F = fractional_power(as_operator(S), 0.37)
        np.testing.assert_allclose(F.entries, sla.fractional_matrix_power(
            S, 0.37), rtol=1e-10, atol=1e-12)

    def test_diagonalizable_nonnormal(self):
        M = np.array([[2.0, 1.5], [0.2, 6.0]])
        F = fractional_power(as_operator(M), 1.6)
        np.testing.assert_allclose(F.entries, sla.fractional_matrix_power(
            M, 1.6), rtol=1e-10, atol=1e-12)

    def test_integer_powers_exact(self):
        M = np.array([[1.0, 2.0], [0.5, 3.0]])
        A = as_operator(M)
        np.testing.assert_allclose(fractional_power(A, 2.0).entries, M @ M,
                                   rtol=1e-14)
        np.testing.assert_allclose(fractional_power(A, 0.0).entries,
                                   np.eye(2), rtol=0, atol=0)
        np.testing.assert_allclose(fractional_power(A, -1.0).entries,
                                   sla.inv(M), rtol=1e-13)

    def test_defective_half_power_squares_back(self):
        """Jordan block forces the regularized contour route."""
        J = np.array([[1.0, 1.0], [0.0, 1.0]])
        F = fractional_power(as_operator(J), 0.5)
        np.testing.assert_allclose(F.entries @ F.entries, J, rtol=1e-8,
                                   atol=1e-8)

    def test_singular_base_raises(self):
        A = as_operator(np.diag([0.0, 1.0]))
        with pytest.raises(SingularBase):
            fractional_power(A, 0.5)
        with pytest.raises(SingularBase):
            imaginary_power(A, 1.0)

    def test_matrix_fractional_power_spd(self):
        rng = np.random.default_rng(6)
        M = rng.standard_normal((4, 4))
        S = M @ M.T + 4.0 * np.eye(4)
        np.testing.assert_allclose(matrix_fractional_power(S, 0.5),
                                   sla.sqrtm(S), rtol=1e-10, atol=1e-12)

    def test_imaginary_power_unitary_on_spd(self):
        rng = np.random.default_rng(7)
        M = rng.standard_normal((4, 4))
        S = M @ M.T + 4.0 * np.eye(4)
        U = imaginary_power(as_operator(S), 1.3).entries
        np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-11)

    def test_imaginary_power_group_law(self):
        M = np.array([[1.0, 0.4], [0.0, 3.0]])
        A = as_operator(M)
        lhs = imaginary_power(A, 0.3).entries @ imaginary_power(A, 0.4).entries
        rhs = imaginary_power(A, 0.7).entries
        np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-13)
        np.testing.assert_allclose(imaginary_power(A, 0.0).entries, np.eye(2),
                                   rtol=0, atol=0)

    def test_defective_imaginary_power_oracle(self):
        """For the Jordan block, A^{i sigma} = I + i sigma N exactly."""
        J = np.array([[1.0, 1.0], [0.0, 1.0]])
        sigma = 0.8
        U = imaginary_power(as_operator(J), sigma).entries
        want = np.array([[1.0, 1j * sigma], [0.0, 1.0]])
        np.testing.assert_allclose(U, want, rtol=1e-8, atol=1e-8)


class TestBipProfile:
    """Exponential growth-rate fits of sigma -> ||A^{i sigma}||."""

    def test_positive_diagonal_has_zero_rate(self):
        prof = bip_profile(as_operator(np.diag([1.0, 4.0])))
        assert 0.0 <= prof.theta <= 1e-12  # fit noise on exactly flat data
        np.testing.assert_allclose(prof.M, 1.0, rtol=1e-9)
        np.testing.assert_allclose(prof.norms, np.ones_like(prof.norms),
                                   rtol=1e-12)

    def test_rotation_rate_recovered(self):
        """For A = e^{i alpha} D, D positive, the rate is exactly alpha."""
        alpha = 0.5
        A = as_operator(cmath.exp(1j * alpha) * np.diag([1.0, 2.0]))
        prof = bip_profile(A)
        np.testing.assert_allclose(prof.theta, alpha, rtol=1e-9)
        np.testing.assert_allclose(prof.M, 1.0, rtol=1e-9)
        np.testing.assert_allclose(prof.bound_at(2.0),
                                   math.exp(alpha * 2.0) * prof.M, rtol=1e-9)
