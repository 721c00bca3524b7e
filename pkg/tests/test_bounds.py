"""Tests for the bound recursions, stepsize conditions and steady-state errors."""

import math

import numpy as np
import pytest

from helpers import SQUARE_TARGETS, make_config, variance_noise
from dptrack.core.bounds import (
    NoCaseMatchesError,
    NotContractiveError,
    StepsizeTooLargeError,
    closed_form_discrepancy,
    closed_form_theta,
    cor1_stepsize_bound,
    geometric_rate,
    lemma1_system,
    monotonicity_table,
    prior_stepsize_bound,
    propagate_bound,
    steady_state_error,
    theta_partials,
    thm1_stepsize_check,
    thm3_stepsize_bound,
    thm3_system,
    thm4_stepsize_bound,
)
from dptrack.core.engine import monte_carlo
from dptrack.core.errors import HypothesisViolated
from dptrack.core.objectives import make_rendezvous, make_ridge
from dptrack.core.topology import (
    make_ring_weights,
    norm_w_minus_i_sq,
    random_weights,
    ring_for_spectra,
    spectral_profile,
)
from dptrack.models.bounds import BoundSystem, ProblemConstants
from dptrack.models.run_config import Schedule, VariantSpec


def constants(mu=1.0, ell=2.0, n=4, rho_w=0.85, rho_wo=0.3, d_i_sq=3.0, sigma_sq=0.01, c_star=0.0):
    """Problem constants with worst-case W_o norms for the given spectra."""
    base = ProblemConstants(
        mu=mu,
        ell=ell,
        n=n,
        r=2,
        rho_w=rho_w,
        rho_wo=rho_wo,
        d_i_sq=d_i_sq,
        norm_wo_sq=0.0,
        norm_v_sq=0.0,
        sigma_eta_sq=sigma_sq,
        sigma_xi_sq=sigma_sq,
        c_star=c_star,
    )
    return base.with_spectra(rho_w, rho_wo)


def constant_schedule(alpha):
    return Schedule(alpha=alpha, gamma=1.0, p=0.0, q=0.0, m=1.0)


class TestBoundRecursion:
    def test_constant_schedule_is_dominated_by_steady_state_system(self):
        pc = constants()
        A_k, B_k = lemma1_system(pc, constant_schedule(0.01), 7)
        bs = thm3_system(pc, 0.01)
        assert np.all(A_k <= bs.A * (1 + 1e-12))
        assert np.all(B_k <= bs.B * (1 + 1e-12))
        for i, j in [(0, 0), (1, 1), (2, 0), (2, 2)]:
            assert A_k[i, j] == pytest.approx(bs.A[i, j], rel=1e-12)
        assert B_k[0] == pytest.approx(bs.B[0], rel=1e-12)
        assert B_k[1] == pytest.approx(bs.B[1], rel=1e-12)

    def test_schedule_hypothesis(self):
        with pytest.raises(HypothesisViolated):
            lemma1_system(constants(), constant_schedule(1.0), 0)

    def test_nonnegative_entries(self):
        sched = Schedule(alpha=0.01, gamma=1.0, p=0.5, q=0.8, m=2.0)
        for k in (0, 1, 10, 100):
            A, B = lemma1_system(constants(c_star=0.5), sched, k)
            assert np.all(A >= 0)
            assert np.all(B >= 0)

    def test_decaying_gamma_adds_heterogeneity_term(self):
        pc = constants(c_star=0.0)
        sched = Schedule(alpha=0.01, gamma=1.0, p=0.5, q=0.8, m=2.0)
        _, without = lemma1_system(pc, sched, 3)
        _, with_heterogeneity = lemma1_system(constants(c_star=5.0), sched, 3)
        assert with_heterogeneity[2] > without[2]
        assert with_heterogeneity[0] == without[0]

    def test_divergence_is_reported(self):
        pc = constants(mu=2.0, ell=2.0, rho_w=0.99, sigma_sq=0.0)
        traj = propagate_bound(pc, constant_schedule(0.2), 1.0, 1.0, 1.0, 50)
        assert traj.diverged

    def test_small_stepsize_does_not_diverge(self):
        pc = constants(mu=2.0, ell=2.0, rho_w=0.5, sigma_sq=0.0)
        traj = propagate_bound(pc, constant_schedule(1e-4), 1.0, 1.0, 1.0, 200)
        assert not traj.diverged
        assert len(traj.u) == 201

    def test_negative_initial_bound(self):
        with pytest.raises(ValueError):
            propagate_bound(constants(), constant_schedule(0.01), -1.0, 0.0, 0.0, 5)

    @pytest.mark.slow
    def test_contains_monte_carlo_errors(self):
        obj = make_ridge(4, 2, 1.0, seed=7)
        wm = make_ring_weights(0.3, 0.5)
        noise_spec = VariantSpec("scale", {"b_eta": 0.05, "b_xi": 0.05})
        noise = make_config(noise=noise_spec).resolve_noise(4, 2)
        pc = ProblemConstants.from_parts(spectral_profile(wm), obj, noise)
        alpha = 0.9 * thm3_stepsize_bound(pc)
        config = make_config(alpha=alpha, horizon=500, noise=noise_spec, seed=5)
        assert thm3_system(pc, alpha).contractive

        result = monte_carlo(config, wm, obj, trials=50)
        mean = result.mean
        traj = propagate_bound(pc, config.schedule, mean.opt_err[0], mean.cons_err[0], mean.track_err[0], 500)
        assert not traj.diverged
        norms = np.sqrt(traj.u**2 + traj.x**2 + traj.y**2)
        assert np.all(np.isfinite(norms))
        assert norms[-1] < norms.max()
        for channel in ("opt_err", "cons_err", "track_err"):
            bound = traj.channel(channel)
            slack = 3 * result.std_error(channel)
            assert np.all(mean.channel(channel) <= bound + slack)


class TestSteadyState:
    def test_transcribed_entries(self):
        pc = constants(mu=1.0, ell=2.0, n=4, rho_w=0.85, d_i_sq=3.0)
        alpha = 0.01
        t_w = 1 - 0.85**2
        A = thm3_system(pc, alpha).A
        assert A[0, 0] == pytest.approx(0.99)
        assert A[0, 1] == pytest.approx(2 * 0.01 * 4 / 4)
        assert A[0, 2] == 0.0
        assert A[1, 0] == 0.0
        assert A[1, 1] == pytest.approx((1 + 0.7225) / 2)
        assert A[1, 2] == pytest.approx(2e-4 / t_w)
        assert A[2, 0] == pytest.approx(32 * 4 * 1e-4 * 16 * 3 / t_w)
        assert A[2, 1] == pytest.approx(64 * 3 * 4 / t_w)
        assert A[2, 2] == pytest.approx(0.86125 + 16 * 1e-4 * 4 * 3 / t_w)

    def test_no_noise_no_error(self):
        bs = thm3_system(constants(sigma_sq=0.0), 0.0005)
        assert bs.contractive
        assert bs.theta == 0.0

    def test_diagonal_system(self):
        bs = BoundSystem(A=np.diag([0.5, 0.8, 0.1]), B=np.array([1.0, 2.0, 3.0]), rho_A=0.8)
        theta1, theta2, theta = steady_state_error(bs, 3)
        assert theta1 == pytest.approx(2.0)
        assert theta2 == pytest.approx(10.0)
        assert theta == pytest.approx(2 * 3 * 2.0 + 2 * 10.0)

    def test_not_contractive(self):
        bs = BoundSystem(A=np.diag([1.0, 0.5, 0.5]), B=np.ones(3), rho_A=1.0)
        with pytest.raises(NotContractiveError):
            steady_state_error(bs, 4)

    @pytest.mark.parametrize("rho_w", [0.3, 0.6, 0.85, 0.95])
    def test_contractive_below_stepsize_bound(self, rho_w):
        pc = constants(rho_w=rho_w)
        assert thm3_system(pc, 0.99 * thm3_stepsize_bound(pc)).contractive

    def test_contractive_on_random_networks(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            profile = spectral_profile(random_weights(n, rng))
            mu = float(rng.uniform(0.05, 2.0))
            pc = constants(mu=mu, ell=mu * float(rng.uniform(1.0, 5.0)), n=n, d_i_sq=profile.d_i_sq)
            pc = pc.with_spectra(profile.rho_w, profile.rho_wo)
            assert thm3_system(pc, 0.99 * thm3_stepsize_bound(pc)).rho_A < 1

    def test_stepsize_hypothesis(self):
        with pytest.raises(HypothesisViolated):
            thm3_system(constants(mu=1.0, ell=2.0), 0.5)

    def test_scales_with_square_of_off_diagonal_radius(self):
        alpha = 0.0005
        low = thm3_system(constants(rho_wo=0.2), alpha).theta
        high = thm3_system(constants(rho_wo=0.4), alpha).theta
        assert high == pytest.approx(4 * low, rel=1e-10)

    @pytest.mark.parametrize("rho_w", [0.2, 0.5, 0.85, 0.95])
    def test_closed_form_matches_linear_solve(self, rho_w):
        pc = constants(rho_w=rho_w)
        alpha = 0.5 * thm3_stepsize_bound(pc)
        assert closed_form_discrepancy(pc, alpha) < 1e-6
        bs = thm3_system(pc, alpha)
        theta1, theta2 = closed_form_theta(pc, alpha)
        assert theta1 == pytest.approx(bs.theta1, rel=1e-6)
        assert theta2 == pytest.approx(bs.theta2, rel=1e-6)


class TestStepsizeBounds:
    def test_shrinks_as_network_slows(self):
        bounds = [thm3_stepsize_bound(constants(rho_w=rho)) for rho in (0.5, 0.9, 0.99, 0.999)]
        assert all(a > b for a, b in zip(bounds, bounds[1:]))
        assert bounds[-1] < 1e-6

    def test_shrinks_as_strong_convexity_vanishes(self):
        bounds = [thm3_stepsize_bound(constants(mu=mu, ell=2.0)) for mu in (1.0, 0.1, 1e-3, 1e-6)]
        assert all(a > b for a, b in zip(bounds, bounds[1:]))
        assert bounds[-1] < 1e-4

    def test_monotonicity_bound_is_tighter(self):
        for rho_w in (0.3, 0.7, 0.9):
            pc = constants(rho_w=rho_w)
            assert thm4_stepsize_bound(pc) <= thm3_stepsize_bound(pc)

    def test_improves_on_prior_analysis(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            wm = random_weights(n, rng)
            profile = spectral_profile(wm)
            mu = float(rng.uniform(0.01, 2.0))
            ell = mu * float(rng.uniform(1.0, 10.0))
            pc = ProblemConstants(
                mu=mu,
                ell=ell,
                n=n,
                r=2,
                rho_w=profile.rho_w,
                rho_wo=profile.rho_wo,
                d_i_sq=profile.d_i_sq,
                norm_wo_sq=profile.norm_wo_sq,
                norm_v_sq=profile.norm_v_sq,
                sigma_eta_sq=0.01,
                sigma_xi_sq=0.01,
                c_star=0.0,
                norm_w_minus_i_sq=norm_w_minus_i_sq(wm),
            )
            assert cor1_stepsize_bound(pc) > prior_stepsize_bound(pc)

    def test_prior_bound_needs_norm(self):
        with pytest.raises(ValueError):
            prior_stepsize_bound(constants())


class TestDecayRegimes:
    def test_case_one(self):
        check = thm1_stepsize_check(constants(), p=0.0, q=0.3, alpha=1e-6, gamma=1.0)
        assert check.case == 1
        assert check.satisfied
        assert check.exponents == {"opt_err": 0.6, "cons_err": 0.6, "track_err": 0.6}

    def test_case_one_too_large(self):
        check = thm1_stepsize_check(constants(), p=0.0, q=0.3, alpha=1.0, gamma=1.0)
        assert not check.satisfied
        assert check.binding in check.constraints

    def test_case_two(self):
        check = thm1_stepsize_check(constants(mu=1.0, ell=2.0), p=0.6, q=0.9, alpha=1.0, gamma=1.3, m=10.0)
        assert check.case == 2
        assert check.satisfied
        assert check.exponents["opt_err"] == pytest.approx(1.2)
        assert check.exponents["cons_err"] == pytest.approx(1.2)

    def test_case_two_needs_large_stepsize(self):
        check = thm1_stepsize_check(constants(mu=1.0, ell=2.0), p=0.6, q=0.9, alpha=0.1, gamma=1.0, m=10.0)
        assert not check.satisfied
        assert check.binding == "min(2q-p,2p)/mu"

    def test_case_two_initial_stepsize(self):
        check = thm1_stepsize_check(constants(mu=1.0, ell=2.0), p=0.6, q=0.9, alpha=2.0, gamma=1.0, m=1.0)
        assert not check.satisfied
        assert check.binding == "2/(mu+L)"

    def test_case_three(self):
        check = thm1_stepsize_check(constants(), p=1.5, q=1.0, alpha=0.01, gamma=1.0)
        assert check.case == 3
        assert check.exponents["opt_err"] == 0.0
        assert check.exponents["track_err"] == pytest.approx(2.0)

    @pytest.mark.parametrize("p,q", [(0.0, 0.0), (0.5, 0.3), (1.5, 0.5)])
    def test_no_regime(self, p, q):
        with pytest.raises(NoCaseMatchesError):
            thm1_stepsize_check(constants(), p=p, q=q, alpha=0.01, gamma=1.0)

    def test_geometric_rate(self):
        assert geometric_rate(math.exp(-2)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            geometric_rate(1.0)


class TestMonotonicity:
    @pytest.fixture
    def template(self):
        return constants(mu=0.01, ell=0.02, n=4, d_i_sq=3.0, sigma_sq=0.01)

    def test_increases_with_off_diagonal_radius(self, template):
        table = monotonicity_table(template, 0.01, [0.9], [0.1, 0.2, 0.3, 0.4, 0.5])
        assert table.strictly_increasing("rho_wo")
        assert all(row.fd_sign_rhowo == 1 for row in table.rows)
        assert all(row.admissible for row in table.rows)

    def test_increases_with_rho_w(self, template):
        table = monotonicity_table(template, 0.01, [0.5, 0.6, 0.7, 0.8, 0.9], [0.3])
        assert table.strictly_increasing("rho_w")
        assert all(row.fd_sign_rhow == 1 for row in table.rows)

    def test_grid_shape(self, template):
        table = monotonicity_table(template, 0.01, [0.8, 0.9], [0.1, 0.2, 0.3])
        assert table.theta_grid().shape == (2, 3)

    def test_random_partials_are_positive(self, rng):
        for _ in range(200):
            mu = float(rng.uniform(0.01, 1.0))
            pc = constants(
                mu=mu,
                ell=mu * float(rng.uniform(1.0, 3.0)),
                rho_w=float(rng.uniform(0.2, 0.9)),
                rho_wo=float(rng.uniform(0.1, 0.5)),
                sigma_sq=float(rng.uniform(0.001, 1.0)),
            )
            d_rw, d_ro = theta_partials(pc, 0.5 * thm4_stepsize_bound(pc))
            assert d_rw > 0
            assert d_ro > 0

    def test_strict_table_rejects_large_stepsize(self, template):
        with pytest.raises(StepsizeTooLargeError):
            monotonicity_table(template, 40.0, [0.9], [0.3])

    def test_lenient_table_marks_rows(self, template):
        table = monotonicity_table(template, 40.0, [0.9], [0.3], strict=False)
        assert not table.rows[0].admissible
        assert math.isnan(table.rows[0].theta)

    @pytest.mark.slow
    def test_simulated_plateaus_follow_the_bound(self):
        square = make_rendezvous(SQUARE_TARGETS)
        config = make_config(alpha=0.01, horizon=2000, noise=variance_noise(0.01), seed=41)

        def plateau(rho_w, rho_wo, channel):
            result = monte_carlo(config, ring_for_spectra(rho_w, rho_wo), square, trials=50)
            return result.plateau(channel)

        by_rho_wo = [plateau(0.9, rho_wo, "opt_err") for rho_wo in (0.1, 0.3, 0.5)]
        for (low, low_se), (high, high_se) in zip(by_rho_wo, by_rho_wo[1:]):
            assert high >= low - 3 * (low_se + high_se)

        by_rho_w = [plateau(rho_w, 0.3, "cons_err") for rho_w in (0.75, 0.85, 0.95)]
        for (low, low_se), (high, high_se) in zip(by_rho_w, by_rho_w[1:]):
            assert high >= low - 3 * (low_se + high_se)
