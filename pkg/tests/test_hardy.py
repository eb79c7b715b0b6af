import math

import numpy as np
import pytest

from analysis.barriers import BarrierClass, RadialProfile
from analysis.exponents import ProblemParams, hardy_constants
from analysis.hardy import (CutoffFamily, RadialTestFunction, certified_radius, default_alpha,
                            dirichlet_energy, energy_form, family_form, family_setup,
                            improved_hardy_check, near_extremal_test_function,
                            nonexistence_witness, picone_check, picone_terms,
                            random_test_function, rayleigh_min, rayleigh_quotient,
                            sharpness_family)
from utils.errors import ConfigError, DomainError


@pytest.fixture
def hat():
    """0, 1, 0 on the nodes 1, 2, 3"""
    return RadialTestFunction.hat(1.0, 3.0)


class TestTestFunctions:

    def test_hat(self, hat):
        assert hat.values.tolist() == [0.0, 1.0, 0.0]
        assert hat.derivative.tolist() == [1.0, -1.0]
        assert hat(1.5) == pytest.approx(0.5)
        assert hat.derivative_at(np.array([1.5, 2.5])).tolist() == [1.0, -1.0]

    @pytest.mark.parametrize("grid,values", [
        ([1.0, 2.0], [0.0, 0.0]),
        ([1.0, 3.0, 2.0], [0.0, 1.0, 0.0]),
        ([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]),
        ([1.0, 2.0, 3.0], [0.0, 1.0, 0.5]),
        ([1.0, 2.0, 3.0], [0.0, np.nan, 0.0]),
    ])
    def test_invalid(self, grid, values):
        with pytest.raises(DomainError):
            RadialTestFunction(np.array(grid), np.array(values))

    def test_from_function_pins_ends(self):
        v = RadialTestFunction.from_function(np.sqrt, np.linspace(1.0, 4.0, 7))
        assert v.values[0] == v.values[-1] == 0.0
        assert v.values[3] == pytest.approx(math.sqrt(2.5))

    def test_random_draws_stay_in_annulus(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = random_test_function(rng, 10.0)
            assert 10.0 <= v.grid[0] and v.grid[-1] <= 10.0 * math.exp(4.0) * (1 + 1e-12)
            assert np.all(v.values >= 0)


class TestForms:

    def test_dirichlet_energy_is_exact(self, hat):
        assert dirichlet_energy(hat, 2.0, 3) == pytest.approx(26.0 / 3.0)

    def test_rayleigh_quotient_of_hat(self, hat):
        assert rayleigh_quotient(hat, 2.0, 3) == pytest.approx(13.0, rel=1e-10)

    def test_form_terms(self, hat):
        form = energy_form(hat, ProblemParams(2.0, 3, mu=0.25))
        assert form.hardy_term == pytest.approx(0.25 * 2.0 / 3.0, rel=1e-10)
        assert form.log_term == 0.0
        assert form.total == pytest.approx(26.0 / 3.0 - 1.0 / 6.0, rel=1e-10)

    def test_log_term_needs_support_beyond_one(self):
        v = RadialTestFunction.hat(0.5, 2.0)
        with pytest.raises(DomainError):
            energy_form(v, ProblemParams(2.0, 3, eps=0.1))


class TestRayleigh:

    def test_laplacian_matches_annulus_value(self):
        quotient, minimizer = rayleigh_min(2.0, 3, 1.0, 1e4, 128)
        # exact infimum over the annulus for p = 2
        annulus = 0.25 + math.pi ** 2 / math.log(1e4) ** 2
        assert annulus - 1e-9 <= quotient <= annulus + 5e-3
        assert np.max(np.abs(minimizer.values)) == pytest.approx(1.0)
        assert minimizer.values[0] == minimizer.values[-1] == 0.0

    def test_quotient_decreases_toward_hardy_constant(self):
        near, _ = rayleigh_min(2.0, 3, 1.0, 1e2, 128)
        far, _ = rayleigh_min(2.0, 3, 1.0, 1e4, 128)
        assert near >= far >= 0.25

    def test_minimizers_agree(self):
        eigh, _ = rayleigh_min(2.0, 3, 1.0, 1e3, 64, method="eigh")
        lbfgs, _ = rayleigh_min(2.0, 3, 1.0, 1e3, 64, method="lbfgs")
        assert lbfgs == pytest.approx(eigh, rel=1e-3)

    def test_nonquadratic_stays_above_hardy_constant(self):
        c_h, _, _ = hardy_constants(3.0, 2)
        quotient, _ = rayleigh_min(3.0, 2, 1.0, 1e3, 32)
        assert quotient > c_h * (1 - 1e-3)

    @pytest.mark.parametrize("kwargs", [
        dict(n_grid=8),
        dict(rho_in=10.0, R_out=5.0),
        dict(method="newton"),
        dict(p=3.0, method="eigh"),
    ])
    def test_invalid(self, kwargs):
        args = dict(p=2.0, N=3, rho_in=1.0, R_out=100.0, n_grid=32)
        args.update(kwargs)
        with pytest.raises(ConfigError):
            rayleigh_min(**args)


class TestImprovedHardy:

    def test_certified_radius_profile(self):
        radius = certified_radius(2.0, 3)
        assert radius.profile.gamma == -0.5
        assert radius.profile.beta == 0.5
        assert radius.log_rho >= 4.0
        assert radius.rho == pytest.approx(math.exp(radius.log_rho))

    def test_near_extremal_draws_are_nonnegative(self):
        rho = certified_radius(2.0, 3).rho
        rng = np.random.default_rng(0)
        for _ in range(10):
            v = near_extremal_test_function(rng, 2.0, 3, rho)
            scale = energy_form(v, ProblemParams(2.0, 3)).dirichlet
            assert improved_hardy_check(2.0, 3, rho, v) >= -1e-10 * scale

    def test_doubled_mu_turns_draws_negative(self):
        rho = certified_radius(2.0, 3).rho
        c_h, c_star, _ = hardy_constants(2.0, 3)
        excess = ProblemParams(2.0, 3, mu=2 * c_h, eps=c_star)
        rng = np.random.default_rng(0)
        for _ in range(10):
            v = near_extremal_test_function(rng, 2.0, 3, rho)
            assert energy_form(v, excess).total < 0

    def test_long_span_is_nearly_extremal(self):
        rho = certified_radius(2.0, 3).rho
        v = near_extremal_test_function(np.random.default_rng(1), 2.0, 3, rho, log_log_span=3.5)
        scale = energy_form(v, ProblemParams(2.0, 3)).dirichlet
        assert 0 <= improved_hardy_check(2.0, 3, rho, v) < 0.05 * scale

    def test_near_extremal_support(self):
        rho = certified_radius(2.0, 3).rho
        v = near_extremal_test_function(np.random.default_rng(2), 2.0, 3, rho)
        assert v.grid[0] >= rho
        assert math.log(v.grid[-1]) <= 200.0 + 1e-9
        assert v.values[0] == v.values[-1] == 0.0
        assert np.all(v.values[1:-1] > 0)

    def test_near_extremal_needs_room(self):
        with pytest.raises(DomainError):
            near_extremal_test_function(np.random.default_rng(0), 2.0, 3, math.exp(199.5))

    def test_support_must_follow_radius(self, hat):
        with pytest.raises(DomainError):
            improved_hardy_check(2.0, 3, 2.0, hat)


class TestCutoffFamilies:

    def test_theta(self):
        family = CutoffFamily(1.0, math.log(100.0))
        values = family.theta(np.array([1.0, 1.75, 2.0, 50.0, 100.0, 1000.0, 1e4]))
        assert values == pytest.approx([0.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.0])

    def test_huge_radius_is_carried_as_log(self):
        assert CutoffFamily(1.0, 800.0).R == math.inf

    @pytest.mark.parametrize("rho,log_R,alpha", [(10.0, 2.0, 1.0), (1.0, 5.0, 0.5)])
    def test_invalid(self, rho, log_R, alpha):
        with pytest.raises(DomainError):
            CutoffFamily(rho, log_R, alpha)

    def test_default_alpha(self):
        assert default_alpha(3.0) == 1.0
        assert default_alpha(1.5) > 2.0 / 1.5

    def test_family_needs_gamma_star(self):
        params = ProblemParams(2.0, 3, mu=0.25)
        with pytest.raises(DomainError):
            family_form(params, CutoffFamily(1.0, 10.0), RadialProfile(-0.4))

    @pytest.mark.parametrize("case", ["eps_above_Cstar", "mu_above_CH"])
    def test_forms_decrease_along_family(self, case):
        log_R = [k * math.log(10.0) for k in (3, 6, 12)]
        frame = sharpness_family(2.0, 3, case, log_R)
        assert list(frame.columns) == ['log_R', 'log_log_R', 'ramp', 'plateau', 'tail', 'form']
        assert np.all(np.diff(frame['form']) < 0)
        assert frame['form'].to_numpy() == pytest.approx(
            (frame['ramp'] + frame['plateau'] + frame['tail']).to_numpy())

    def test_family_setup(self):
        c_h, c_star, _ = hardy_constants(2.0, 3)
        params, phi, rho = family_setup(2.0, 3, "eps_above_Cstar", excess=0.1)
        assert params.mu == c_h
        assert params.eps == pytest.approx(c_star + 0.1)
        assert (phi.gamma, phi.beta, phi.tau) == (-0.5, 0.5, -0.25)
        assert rho == pytest.approx(math.exp(math.e))
        with pytest.raises(ConfigError):
            family_setup(2.0, 3, "supercritical")
        with pytest.raises(ConfigError):
            family_setup(2.0, 3, "critical", tau=0.1)


class TestWitness:

    def test_potential_above_hardy_constant(self):
        c_h, _, _ = hardy_constants(2.0, 3)
        cert = nonexistence_witness(2.0, 3, c_h + 0.05)
        assert cert is not None
        assert cert.form == -2.0
        assert cert.scale > 0
        assert cert.profile.gamma == -0.5

    def test_no_witness_below_hardy_constant(self):
        c_h, _, _ = hardy_constants(2.0, 3)
        assert nonexistence_witness(2.0, 3, c_h - 0.05) is None
        assert nonexistence_witness(2.0, 3, c_h, 0.1) is None

    @pytest.mark.slow
    def test_remainder_above_optimal_constant(self):
        c_h, c_star, _ = hardy_constants(2.0, 3)
        cert = nonexistence_witness(2.0, 3, c_h, c_star + 0.05)
        assert cert is not None
        assert cert.params.eps == pytest.approx(c_star + 0.05)
        value = family_form(cert.params, cert.family, cert.profile).total
        assert value * cert.scale ** 2 == pytest.approx(-2.0, rel=1e-9)


class TestPicone:

    def test_multiple_of_profile_has_zero_remainder(self):
        phi = np.array([1.0, 2.0])
        phi_r = np.array([0.5, -0.3])
        L, R, _ = picone_terms(3.0 * phi, 3.0 * phi_r, phi, phi_r, 2.5)
        assert L == pytest.approx([0.0, 0.0], abs=1e-12)
        assert R == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_identity_on_random_draws(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p = float(rng.uniform(1.2, 4.0))
            phi = RadialProfile(float(rng.uniform(-2.0, 2.0)), float(rng.uniform(0.0, 1.0)))
            report = picone_check(random_test_function(rng, math.e), phi, p, n_samples=8)
            assert report.max_identity_gap <= 1e-9
            assert report.min_L >= -1e-12

    def test_negative_w_is_rejected(self):
        w = RadialTestFunction(np.array([3.0, 4.0, 5.0]), np.array([0.0, -1.0, 0.0]))
        with pytest.raises(DomainError):
            picone_check(w, RadialProfile(-0.5), 2.0)
