import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from analysis import barriers
from analysis.barriers import (BarrierClass, RadialProfile, classify_barrier, cutoff_remainder_decay,
                               existence_supersolution, expansion_check, expansion_terms,
                               leading_log_coefficient, normalized_residual,
                               radial_p_laplace_residual, sample_grid, scaled_log_residual,
                               barrier_expectation)
from analysis.exponents import ProblemParams, gamma_roots, hardy_constants
from utils.errors import ConvergenceFailure, DomainError, NotInExistenceRegion


class TestProfile:

    def test_domain(self):
        assert RadialProfile(-1.0).min_log_r == -math.inf
        assert RadialProfile(-1.0, 0.5).min_log_r == 0.0
        assert RadialProfile(-1.0, 0.5, 0.5).min_log_r == math.e
        with pytest.raises(DomainError):
            RadialProfile(-1.0, 0.5, 0.5).check_domain(2.0)
        with pytest.raises(DomainError):
            RadialProfile(-1.0, scale=0.0)

    def test_log_derivatives(self):
        t = 5.0
        log_u, a, a_t = RadialProfile(-0.5, 1.0, 0.5, scale=2.0).log_derivatives(t)
        lam = math.log(t)
        assert log_u == pytest.approx(math.log(2.0) - 0.5 * t + math.log(t) + 0.5 * math.log(lam))
        assert a == pytest.approx(-0.5 + 1 / t + 0.5 / (t * lam))
        assert a_t == pytest.approx(-1 / t ** 2 - 0.5 * (lam + 1) / (t * lam) ** 2)

    def test_flat_profile_is_rejected(self):
        with pytest.raises(DomainError):
            normalized_residual(RadialProfile(0.0), ProblemParams(2.0, 3), 1.0)


class TestResidual:

    @pytest.mark.parametrize("p,N,mu", [(2.0, 3, 0.1), (3.0, 2, 0.02), (1.5, 4, 0.5), (3.0, 3, -0.5)])
    def test_power_solutions_are_exact(self, p, N, mu):
        params = ProblemParams(p, N, mu=mu)
        for gamma in gamma_roots(p, N, mu):
            for t in (-2.0, 1.0, 30.0):
                n, scale = normalized_residual(RadialProfile(gamma), params, t)
                assert abs(n) <= 1e-10 * scale
            assert radial_p_laplace_residual(RadialProfile(gamma), params, 3.0) == pytest.approx(0.0, abs=1e-12)

    def test_radius_must_be_positive(self):
        with pytest.raises(DomainError):
            radial_p_laplace_residual(RadialProfile(-1.0), ProblemParams(2.0, 3), 0.0)

    def test_powers_between_roots_are_super(self):
        params = ProblemParams(2.0, 3, mu=0.1)
        g_minus, g_plus = gamma_roots(2.0, 3, 0.1)
        inside = classify_barrier(RadialProfile(0.5 * (g_minus + g_plus)), params)
        outside = classify_barrier(RadialProfile(g_plus + 0.3), params)
        assert inside.classification == BarrierClass.SUPER
        assert outside.classification == BarrierClass.SUB

    @pytest.mark.parametrize("beta,tau,expected", [
        (-0.25, 0.0, BarrierClass.SUB),
        (0.5, 0.0, BarrierClass.SUPER),
        (1.25, 0.0, BarrierClass.SUB),
        (1.0, 0.5, BarrierClass.SUB),
    ])
    def test_log_corrected_barriers(self, laplace3, beta, tau, expected):
        assert barrier_expectation(2.0, 3, 0.0, beta, tau) == expected
        report = classify_barrier(RadialProfile(-0.5, beta, tau), laplace3)
        assert report.classification == expected
        assert report.threshold_log_r == pytest.approx(4.0)

    @pytest.mark.parametrize("beta,expected", [
        (-0.3, BarrierClass.SUB), (0.5, BarrierClass.SUPER), (1.3, BarrierClass.SUB)])
    def test_critical_dimension_barriers(self, beta, expected):
        params = ProblemParams(2.0, 2, mu=0.0)
        assert barrier_expectation(2.0, 2, 0.0, beta, 0.0) == expected
        assert classify_barrier(RadialProfile(0.0, beta), params).classification == expected

    def test_report_frame(self, laplace3):
        report = classify_barrier(RadialProfile(-0.5, 0.5), laplace3, n_samples=50)
        frame = report.to_frame()
        assert list(frame.columns) == ['log_r', 'r', 'residual', 'normalized']
        assert len(frame) == 50
        assert np.all(frame['normalized'] > 0)

    def test_sample_grid(self):
        assert sample_grid(1.0, 100.0, 3) == pytest.approx([1.0, 10.0, 100.0])
        assert sample_grid(-1.0, 1.0, 3) == pytest.approx([-1.0, 0.0, 1.0])
        with pytest.raises(DomainError):
            sample_grid(2.0, 2.0, 10)


class TestExpansion:

    def test_leading_coefficient(self, laplace3):
        assert leading_log_coefficient(RadialProfile(-0.5, 0.5), laplace3) == pytest.approx(0.25)

    @pytest.mark.parametrize("beta,tau", [(0.3, 0.0), (0.5, -0.4), (1.0, 0.7)])
    def test_laplacian_expansion_is_exact(self, laplace3, beta, tau):
        assert expansion_check(RadialProfile(-0.5, beta, tau), laplace3, log_r=50.0) == pytest.approx(0.0, abs=1e-14)

    def test_expansion_needs_p_not_n(self):
        with pytest.raises(DomainError):
            expansion_check(RadialProfile(0.0, 0.5), ProblemParams(2.0, 2), r=10.0)

    @pytest.mark.parametrize("p,N,beta", [(4.0, 2, 0.25), (1.5, 3, 0.5)])
    def test_expansion_error_decays_like_fourth_power(self, p, N, beta):
        profile = RadialProfile((p - N) / p, beta)
        near = expansion_check(profile, ProblemParams(p, N), log_r=40.0)
        far = expansion_check(profile, ProblemParams(p, N), log_r=80.0)
        assert abs(near) / abs(far) >= 12.0

    @pytest.mark.parametrize("p,N,beta,tau", [(4.0, 2, 0.25, 0.5), (1.5, 3, 0.5, -0.3)])
    def test_expansion_error_decays_with_log_log_factor(self, p, N, beta, tau):
        profile = RadialProfile((p - N) / p, beta, tau)
        near = expansion_check(profile, ProblemParams(p, N), log_r=200.0)
        far = expansion_check(profile, ProblemParams(p, N), log_r=400.0)
        assert abs(near) / abs(far) >= 6.0

    def test_tau_term_leads_when_beta_is_two_over_p(self):
        # 2 - beta p = 0 removes the 1/t^2 term; -tau (p-1) |gamma*|^(p-2) / (t^2 log t) is left
        p, N, tau, t = 4.0, 2, 0.5, 200.0
        params = ProblemParams(p, N)
        profile = RadialProfile((p - N) / p, 2.0 / p, tau)
        c_h, _, _ = hardy_constants(p, N)
        exact = expansion_check(profile, params, log_r=t) + expansion_terms(profile, p, N, t)
        leading = -tau * (p - 1) * abs((p - N) / p) ** (p - 2) / (t ** 2 * math.log(t))
        assert exact - c_h < 0
        assert abs(expansion_check(profile, params, log_r=t)) <= 0.05 * abs(exact - c_h)
        assert (exact - c_h) / leading == pytest.approx(1.0, abs=0.15)

    @settings(max_examples=60)
    @given(st.floats(min_value=-1.0, max_value=2.0), st.floats(min_value=-1.0, max_value=1.0),
           st.floats(min_value=20.0, max_value=500.0), st.floats(min_value=0.0, max_value=0.05))
    def test_scaled_residual_matches_direct(self, beta, tau, t, eps):
        p, N = 3.0, 2
        c_h, _, _ = hardy_constants(p, N)
        params = ProblemParams(p, N, mu=c_h, eps=eps)
        n, _ = normalized_residual(RadialProfile((p - N) / p, beta, tau), params, t)
        assert float(scaled_log_residual(p, N, eps, beta, tau, t)) == pytest.approx(n * t ** 2, abs=1e-7)

    def test_scaled_residual_at_p_equal_n(self):
        params = ProblemParams(3.0, 3, eps=0.1)
        t = 40.0
        n, _ = normalized_residual(RadialProfile(0.0, 0.6, -0.3), params, t)
        assert float(scaled_log_residual(3.0, 3, 0.1, 0.6, -0.3, t)) == pytest.approx(n * t ** 3, abs=1e-9)

    def test_scaled_residual_survives_huge_radii(self):
        # log log r = 600: far beyond what exp(log r) can hold
        value = float(scaled_log_residual(2.0, 3, 0.0, 0.5, -0.25, math.exp(600.0)))
        assert value == pytest.approx(0.25, abs=1e-3)


class TestExistence:

    def test_supersolution_above_critical_exponent(self):
        params = ProblemParams(2.0, 3, q=4.0, sigma=0.0)
        cert = existence_supersolution(params)
        assert cert.report.classification == BarrierClass.SUPER
        assert cert.profile.gamma == pytest.approx(-5.0 / 6.0)
        assert cert.profile.scale == 1.0
        assert cert.eps_margin is None

    def test_nonexistence_region_is_rejected(self):
        with pytest.raises(NotInExistenceRegion):
            existence_supersolution(ProblemParams(2.0, 3, q=2.0, sigma=0.0))

    def test_failed_scan_raises(self, monkeypatch):
        monkeypatch.setattr(barriers, 'nonlinear_residual', lambda profile, params, t: (-1.0, 1.0))
        with pytest.raises(ConvergenceFailure):
            existence_supersolution(ProblemParams(2.0, 3, q=4.0, sigma=0.0), n_samples=8,
                                    max_doublings=2)


class TestCutoffRemainder:

    def test_case_detection(self):
        g_minus, _ = gamma_roots(2.0, 3, 0.1)
        assert cutoff_remainder_decay(RadialProfile(g_minus), ProblemParams(2.0, 3),
                                      log10_R_list=(1.0, 2.0)).case == "i"
        with pytest.raises(DomainError):
            cutoff_remainder_decay(RadialProfile(-0.5, 0.3), ProblemParams(2.0, 3))

    @pytest.mark.parametrize("profile,params,case", [
        (RadialProfile(-0.5, 0.5, -0.25), ProblemParams(2.0, 3), "ii"),
        (RadialProfile(0.0, 0.5, -0.25), ProblemParams(2.0, 2), "iii"),
    ])
    def test_logarithmic_cutoff_remainder_decays(self, profile, params, case):
        fit = cutoff_remainder_decay(profile, params)
        integrals = fit.table['integral'].to_numpy()
        assert fit.case == case
        assert fit.predicted_exponent == pytest.approx(-0.5)
        assert np.all(integrals > 0)
        assert np.all(np.diff(integrals) < 0)
        assert fit.fitted_exponent < 0

    def test_power_profile_decays_at_least_at_predicted_rate(self):
        g_minus, _ = gamma_roots(2.0, 3, 0.1)
        fit = cutoff_remainder_decay(RadialProfile(g_minus), ProblemParams(2.0, 3))
        assert fit.predicted_exponent == pytest.approx(2 * g_minus + 1)
        assert fit.predicted_exponent < 0
        assert fit.fitted_exponent <= fit.predicted_exponent + 0.05
