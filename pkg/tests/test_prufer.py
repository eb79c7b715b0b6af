import math

import numpy as np
import pytest

from analysis.exponents import ProblemParams, gamma_roots, hardy_constants
from analysis.prufer import (AsymptoticCase, comparison_angle, eps_sandwich_run, fit_asymptotics,
                             fixed_points, integrate_large_subsolution, limit_angle,
                             perturbation_rate, prufer_rhs, reconstruction_residual)
from utils.errors import (DeltaOutOfRange, DomainError, NonpositivePotential, NotConverged,
                          WindowTooShort)


@pytest.fixture(scope="module")
def subcritical_run():
    return integrate_large_subsolution(ProblemParams(2.0, 3, mu=0.1), 1.0, 25.0)


class TestPhaseEquation:

    def test_rates_for_laplacian(self):
        dpsi, dlog_rho = prufer_rhs(ProblemParams(2.0, 3, mu=0.1), 2.0, 1.0)
        assert dpsi == pytest.approx(math.sqrt(0.1) + math.sin(1.0) * math.cos(1.0), rel=1e-7)
        assert dlog_rho == pytest.approx(math.sin(1.0) ** 2, rel=1e-7)

    def test_potential_must_be_positive(self):
        with pytest.raises(NonpositivePotential):
            prufer_rhs(ProblemParams(2.0, 3, mu=-0.1), 2.0, 1.0)

    def test_fixed_points_match_power_solutions(self):
        mu = 0.1
        fp = fixed_points(ProblemParams(2.0, 3, mu=mu))
        g_minus, g_plus = gamma_roots(2.0, 3, mu)
        assert math.pi / 2 < fp.psi_minus < math.pi
        assert 1 / math.tan(fp.psi_minus) == pytest.approx(g_minus / math.sqrt(mu), abs=1e-6)
        assert 1 / math.tan(fp.psi_plus) == pytest.approx(g_plus / math.sqrt(mu), abs=1e-6)
        assert fp.psi_star is None

    def test_double_root_angle(self):
        fp = fixed_points(ProblemParams(2.0, 3, mu=0.25))
        assert fp.psi_star == pytest.approx(3 * math.pi / 4, abs=1e-8)
        assert fp.psi_minus == fp.psi_plus == fp.psi_star

    def test_critical_dimension_angles(self):
        _, c_star, _ = hardy_constants(2.0, 2)
        fp = fixed_points(ProblemParams(2.0, 2, eps=0.5 * c_star))
        assert fp.psi_minus > fp.psi_plus
        assert limit_angle(ProblemParams(2.0, 2, eps=0.5 * c_star)) == fp.psi_plus

    @pytest.mark.parametrize("params,error", [
        (ProblemParams(2.0, 3, mu=0.1, eps=0.1), DomainError),
        (ProblemParams(2.0, 3, mu=0.0), NonpositivePotential),
        (ProblemParams(2.0, 2, mu=0.1, eps=0.1), DomainError),
    ])
    def test_fixed_point_preconditions(self, params, error):
        with pytest.raises(error):
            fixed_points(params)

    def test_comparison_angle_has_profile_slope(self):
        params = ProblemParams(2.0, 3, mu=0.25, eps=0.1)
        t, beta = 30.0, 0.6
        angle = comparison_angle(params, beta, t)
        slope = (-0.5 + beta / t) / math.sqrt(0.25 + 0.1 / t ** 2)
        assert 1 / math.tan(angle) == pytest.approx(slope, abs=1e-6)


class TestClosedForms:

    @pytest.mark.parametrize("params,label", [
        (ProblemParams(2.0, 3), "1 - (R/r)^1"),
        (ProblemParams(2.0, 2), "log r - log R"),
        (ProblemParams(3.0, 3), "log r - log R"),
    ])
    def test_labels_and_residual(self, params, label):
        run = integrate_large_subsolution(params, 1.0, 25.0)
        assert run.closed_form == label
        assert reconstruction_residual(run).max_normalized_residual <= 1e-6

    def test_negative_potential(self):
        params = ProblemParams(2.0, 3, mu=-0.5)
        run = integrate_large_subsolution(params, 2.0, 10.0)
        _, g_plus = gamma_roots(2.0, 3, -0.5)
        assert run.closed_form.startswith("r^")
        t = 5.0
        expected = math.log(math.exp(g_plus * t) - 2.0 ** g_plus)
        assert run.sample([t])[2][0] == pytest.approx(expected)
        with pytest.raises(NotConverged):
            perturbation_rate(run)

    @pytest.mark.parametrize("R,t_end,params", [
        (0.0, 10.0, ProblemParams(2.0, 3, mu=0.1)),
        (math.exp(12.0), 10.0, ProblemParams(2.0, 3, mu=0.1)),
        (2.0, 10.0, ProblemParams(2.0, 2, eps=0.1)),
    ])
    def test_bad_radii(self, R, t_end, params):
        with pytest.raises(DomainError):
            integrate_large_subsolution(params, R, t_end)


class TestPhaseRuns:

    def test_subcritical_growth(self, subcritical_run):
        _, g_plus = gamma_roots(2.0, 3, 0.1)
        fit = fit_asymptotics(subcritical_run, AsymptoticCase.SUBCRITICAL)
        assert fit.predicted_exponent == pytest.approx(g_plus)
        assert fit.rel_err <= 0.02
        fit_rho = fit_asymptotics(subcritical_run, AsymptoticCase.SUBCRITICAL, "log_rho")
        assert fit_rho.rel_err <= 0.02

    def test_reconstruction(self, subcritical_run):
        check = reconstruction_residual(subcritical_run)
        assert check.max_normalized_residual <= 1e-4
        assert check.max_flux_mismatch <= 1e-4

    def test_run_table(self, subcritical_run):
        frame = subcritical_run.to_frame()
        assert list(frame.columns) == ['t', 'psi', 'log_rho', 'log_u']
        assert frame['psi'].iloc[0] == 0.0
        assert frame['log_rho'].iloc[0] == 0.0
        assert np.all(np.diff(frame['t']) > 0)
        assert subcritical_run.R == 1.0

    def test_fit_window_must_follow_start(self):
        run = integrate_large_subsolution(ProblemParams(2.0, 3, mu=0.1), math.exp(10.0), 15.0)
        with pytest.raises(WindowTooShort):
            fit_asymptotics(run, AsymptoticCase.SUBCRITICAL)

    def test_subcritical_growth_for_p_above_n(self):
        run = integrate_large_subsolution(ProblemParams(3.0, 2, mu=0.02), 1.0, 25.0)
        _, g_plus = gamma_roots(3.0, 2, 0.02)
        fit = fit_asymptotics(run, AsymptoticCase.SUBCRITICAL)
        assert fit.predicted_exponent == pytest.approx(g_plus)
        assert fit.rel_err <= 0.02
        rate = perturbation_rate(run)
        assert rate.law == "power"
        assert rate.predicted == pytest.approx(-(3.0 * g_plus + 2 - 3.0))
        assert rate.rel_err <= 0.05

    def test_logarithmic_growth_at_p_equal_n(self):
        _, c_star, _ = hardy_constants(2.0, 2)
        run = integrate_large_subsolution(ProblemParams(2.0, 2, eps=0.5 * c_star), math.exp(2.0), 1e3)
        fit = fit_asymptotics(run, AsymptoticCase.CRITICAL_P_EQ_N)
        assert fit.predicted_exponent == pytest.approx((1 + math.sqrt(0.5)) / 2)
        assert fit.rel_err <= 0.05
        rate = perturbation_rate(run)
        assert rate.law == "log_power"
        assert rate.predicted == pytest.approx(-math.sqrt(0.5))
        assert rate.rel_err <= 0.05

    @pytest.mark.slow
    def test_critical_growth_on_long_run(self):
        run = integrate_large_subsolution(ProblemParams(2.0, 3, mu=0.25), 1.0, 1e4)
        fit = fit_asymptotics(run, AsymptoticCase.CRITICAL)
        assert fit.predicted_exponent == 1.0
        assert fit.rel_err <= 0.01
        rate = perturbation_rate(run)
        assert rate.law == "inverse_log"
        assert rate.predicted == pytest.approx(-1.0)
        assert rate.rel_err <= 0.01


class TestSandwich:

    def test_preconditions(self):
        c_h, c_star, _ = hardy_constants(3.0, 2)
        with pytest.raises(DomainError):
            eps_sandwich_run(ProblemParams(3.0, 2, mu=0.5 * c_h, eps=0.5 * c_star), 0.05)
        with pytest.raises(DomainError):
            eps_sandwich_run(ProblemParams(2.0, 2, eps=0.1), 0.05)
        with pytest.raises(DeltaOutOfRange):
            eps_sandwich_run(ProblemParams(3.0, 2, mu=c_h, eps=0.5 * c_star), 0.2)

    @pytest.mark.slow
    def test_phase_stays_between_comparison_angles(self):
        c_h, c_star, _ = hardy_constants(3.0, 2)
        report = eps_sandwich_run(ProblemParams(3.0, 2, mu=c_h, eps=0.5 * c_star), 0.05)
        assert report.holds
        assert report.t_delta >= 4.0
