"""Tests for sensitivities, privacy budgets and noise calibration."""

import math

import numpy as np
import pytest

from dptrack.core.errors import HypothesisViolated
from dptrack.core.privacy import (
    budget,
    budget_curve,
    c_coefficient,
    calibrate_noise,
    channel_coefficients,
    eulerian_numbers,
    eulerian_polynomial,
    finite_horizon_budget,
    infinite_horizon_budget,
    sensitivity_closed_form,
    sensitivity_recursion_oracle,
    staircase_sum,
    tail_start,
)
from dptrack.models.privacy import PrivacyQuery
from dptrack.models.run_config import Schedule

W_DIAG = (0.4, 0.5, 0.7)


def decaying_schedule(p=3.5, q=0.5, m=1.0, alpha=0.05, gamma=1.0):
    return Schedule(alpha=alpha, gamma=gamma, p=p, q=q, m=m)


def make_query(horizon=50, b_eta=1.0, b_xi=1.0, schedule=None, c_grad=2.0, r=2, w_diag=W_DIAG):
    return PrivacyQuery(
        schedule=schedule or decaying_schedule(),
        c_grad=c_grad,
        r=r,
        w_diag=w_diag,
        horizon=horizon,
        b_eta=b_eta,
        b_xi=b_xi,
    )


class TestCoefficient:
    def test_lag_one(self):
        for w in (0.1, 0.5, 0.9):
            assert c_coefficient(5, 4, w) == pytest.approx(-1.0)

    def test_lag_two(self):
        assert c_coefficient(2, 0, 0.3) == pytest.approx(1 - 2 * 0.3)

    def test_lag_three(self):
        assert c_coefficient(3, 0, 0.5) == pytest.approx(0.5 * (2 - 3 * 0.5))

    def test_needs_earlier_time(self):
        with pytest.raises(IndexError):
            c_coefficient(3, 3, 0.5)


class TestSensitivity:
    def test_closed_form_matches_recursion(self, rng):
        for _ in range(100):
            horizon = int(rng.integers(1, 51))
            sched = Schedule(
                alpha=float(rng.uniform(0.001, 0.5)),
                gamma=float(rng.uniform(0.5, 2.0)),
                p=float(rng.uniform(0, 4)),
                q=float(rng.uniform(0, 2)),
                m=float(rng.integers(1, 5)),
            )
            w_ii = float(rng.uniform(0.05, 0.95))
            closed = sensitivity_closed_form(horizon, sched, w_ii, 1.5, 3)
            oracle = sensitivity_recursion_oracle(horizon, sched, w_ii, 1.5, 3)
            for got, want in zip(closed, oracle):
                np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)

    def test_double_sum_by_hand(self):
        sched = Schedule(alpha=0.1, gamma=1.0, p=1.0, q=0.0, m=1.0)
        w = 0.6
        horizon = 6
        delta_s, delta_x = sensitivity_closed_form(horizon, sched, w, 1.0, 1)
        for k in range(1, horizon + 1):
            s_expected = sum(2 * w ** (k - 1 - t) / (1 + t) for t in range(k))
            x_expected = sum(2 * 0.1 * abs(c_coefficient(k, t, w)) / (1 + t) for t in range(k))
            assert delta_s[k] == pytest.approx(s_expected, rel=1e-13)
            assert delta_x[k] == pytest.approx(x_expected, rel=1e-13)

    def test_first_iteration(self):
        sched = decaying_schedule(alpha=0.2, gamma=3.0, m=2.0, p=1.0)
        delta_s, delta_x = sensitivity_closed_form(1, sched, 0.5, 1.5, 4)
        gamma_0 = 3.0 / 2.0
        assert delta_s[0] == 0.0
        assert delta_x[0] == 0.0
        assert delta_s[1] == pytest.approx(2 * 2 * 1.5 * gamma_0)
        assert delta_x[1] == pytest.approx(2 * 2 * 1.5 * 0.2 * gamma_0)

    def test_zero_gradient_bound(self):
        delta_s, delta_x = sensitivity_closed_form(20, decaying_schedule(), 0.5, 0.0, 2)
        assert not delta_s.any()
        assert not delta_x.any()

    def test_nonnegative(self):
        delta_s, delta_x = sensitivity_closed_form(200, decaying_schedule(p=0.5, q=0.1), 0.3, 1.0, 2)
        assert np.all(delta_s >= 0)
        assert np.all(delta_x >= 0)


class TestFiniteBudget:
    def test_grows_with_horizon(self):
        query = make_query(horizon=300, schedule=decaying_schedule(p=0.5, q=0.2))
        curve = budget_curve(query)
        assert np.all(np.diff(curve) >= 0)
        assert curve[-1] == pytest.approx(finite_horizon_budget(query).epsilon)

    def test_scale_invariance(self):
        base = finite_horizon_budget(make_query(b_eta=0.5, b_xi=0.25)).epsilon
        scaled = finite_horizon_budget(make_query(b_eta=1.5, b_xi=0.75)).epsilon
        assert scaled == pytest.approx(base / 3, rel=1e-12)

    def test_vanishes_with_large_scales(self):
        assert finite_horizon_budget(make_query(b_eta=1e12, b_xi=1e12)).epsilon < 1e-9

    def test_per_iteration_terms_sum_to_worst_agent(self):
        report = finite_horizon_budget(make_query(horizon=40))
        worst = report.agents[report.worst_agent]
        assert len(report.s_per_iteration) == 40
        assert sum(report.s_per_iteration) == pytest.approx(worst.s_channel)
        assert sum(report.x_per_iteration) == pytest.approx(worst.x_channel)
        assert report.epsilon == max(report.epsilons)

    def test_needs_scales(self):
        with pytest.raises(ValueError):
            finite_horizon_budget(make_query(b_eta=None))

    def test_report_dict(self):
        data = finite_horizon_budget(make_query(horizon=10)).to_dict()
        assert data["horizon"] == 10
        assert len(data["agents"]) == 3
        assert set(data["per_iteration"]) == {"s_channel", "x_channel"}


class TestInfiniteBudget:
    def test_dominates_long_finite_horizon(self):
        finite = finite_horizon_budget(make_query(horizon=10_000))
        infinite = infinite_horizon_budget(make_query(horizon=None))
        for f, i in zip(finite.agents, infinite.agents):
            assert f.s_channel <= i.s_channel
            assert f.x_channel <= i.x_channel
        assert finite.epsilon <= infinite.epsilon

    def test_dominates_every_prefix(self):
        curve = budget_curve(make_query(horizon=2000, schedule=decaying_schedule(p=4.0, q=1.0, m=2.0)))
        bound = infinite_horizon_budget(make_query(horizon=None, schedule=decaying_schedule(p=4.0, q=1.0, m=2.0)))
        assert np.all(curve <= bound.epsilon)

    @pytest.mark.parametrize("p,q", [(1.0, 0.0), (2.5, 0.5), (3.0, 1.0)])
    def test_divergent_tail(self, p, q):
        with pytest.raises(HypothesisViolated):
            infinite_horizon_budget(make_query(horizon=None, schedule=decaying_schedule(p=p, q=q)))

    def test_dispatch(self):
        query = make_query(horizon=None)
        assert budget(query).epsilon == infinite_horizon_budget(query).epsilon
        assert budget(query).horizon is None

    def test_non_integer_m_is_flagged(self):
        report = infinite_horizon_budget(make_query(horizon=None, schedule=decaying_schedule(m=1.5)))
        assert report.m_rounded
        assert report.tail_start == 3
        assert report.to_dict()["m_rounded"] is True

    def test_integer_m(self):
        report = infinite_horizon_budget(make_query(horizon=None))
        assert not report.m_rounded
        assert report.tail_start == 2


class TestEulerian:
    def test_rows(self):
        assert eulerian_numbers(0) == [1]
        assert eulerian_numbers(1) == [1]
        assert eulerian_numbers(2) == [1, 1]
        assert eulerian_numbers(3) == [1, 4, 1]
        assert eulerian_numbers(4) == [1, 11, 11, 1]

    def test_row_sums_are_factorials(self):
        for n in range(1, 9):
            assert sum(eulerian_numbers(n)) == math.factorial(n)

    def test_polynomial(self):
        assert eulerian_polynomial(0, 0.3) == 1.0
        assert eulerian_polynomial(3, 0.5) == pytest.approx(1 + 4 * 0.5 + 0.25)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            eulerian_numbers(-1)

    @pytest.mark.parametrize("order", range(6))
    @pytest.mark.parametrize("w", [0.2, 0.5, 0.8])
    def test_staircase_closed_form(self, order, w):
        assert staircase_sum(order, w) == pytest.approx(staircase_sum(order, w, terms=2000), rel=1e-10)

    def test_geometric_staircase(self):
        assert staircase_sum(1, 0.5) == pytest.approx(2.0)


def test_tail_start():
    assert tail_start(1.0) == (2, False)
    assert tail_start(4.0) == (5, False)
    assert tail_start(2.2) == (4, True)


class TestCalibration:
    @pytest.mark.parametrize("horizon", [50, None])
    def test_round_trip(self, horizon):
        query = make_query(horizon=horizon, b_eta=None, b_xi=None)
        b_eta, b_xi = calibrate_noise(1.0, 0.5, query)
        assert budget(query.with_scales(b_eta, b_xi)).epsilon == pytest.approx(1.0, rel=1e-9)

    def test_doubling_target_halves_scales(self):
        query = make_query(b_eta=None, b_xi=None)
        b_eta, b_xi = calibrate_noise(0.5, 0.3, query)
        b_eta2, b_xi2 = calibrate_noise(1.0, 0.3, query)
        assert b_eta2 == pytest.approx(b_eta / 2, rel=1e-12)
        assert b_xi2 == pytest.approx(b_xi / 2, rel=1e-12)

    def test_split_between_channels(self):
        query = make_query(b_eta=None, b_xi=None, w_diag=(0.5, 0.5, 0.5))
        b_eta, b_xi = calibrate_noise(2.0, 0.25, query)
        report = finite_horizon_budget(query.with_scales(b_eta, b_xi))
        worst = report.agents[report.worst_agent]
        assert worst.s_channel == pytest.approx(0.5, rel=1e-9)
        assert worst.x_channel == pytest.approx(1.5, rel=1e-9)

    def test_channel_coefficients_reproduce_budget(self):
        query = make_query(b_eta=0.7, b_xi=0.2)
        report = finite_horizon_budget(query)
        for (s_coef, x_coef), agent in zip(channel_coefficients(query), report.agents):
            assert agent.epsilon == pytest.approx(s_coef / 0.7 + x_coef / 0.2, rel=1e-12)

    def test_zero_sensitivity(self):
        with pytest.raises(HypothesisViolated):
            calibrate_noise(1.0, 0.5, make_query(c_grad=0.0, b_eta=None, b_xi=None))

    @pytest.mark.parametrize("eps,split", [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0), (1.0, 1.0)])
    def test_invalid_arguments(self, eps, split):
        with pytest.raises(ValueError):
            calibrate_noise(eps, split, make_query(b_eta=None, b_xi=None))


@pytest.mark.parametrize("w_diag", [(0.5, 1.0), (0.0, 0.5)])
def test_self_weight_must_be_strictly_inside_unit_interval(w_diag):
    with pytest.raises(HypothesisViolated):
        make_query(w_diag=w_diag)
