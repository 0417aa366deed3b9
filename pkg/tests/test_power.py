import math

import numpy as np
import pytest

from helpers import stage1_grid_oracle
from irsrelay.power import (
    Binding,
    PowerBudget,
    Stage1Allocation,
    min_power_for_rate,
    relay_power_grid,
    solve_stage1,
    solve_stage2,
    split_budget,
    total_rate,
)


def stage1_objective(alloc):
    return alloc.c_sd + alloc.c_sr


class TestBudget:
    def test_split(self):
        budget = PowerBudget(p_s=0.5, p_r=1.0, p_max=1.0, noise_power=0.1)
        split = split_budget(budget, 0.75)
        assert split.p_s_eff == pytest.approx(0.25)
        assert split_budget(budget, 0.2).p_s_eff == pytest.approx(0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            PowerBudget(p_s=2.0, p_r=1.0, p_max=1.0, noise_power=0.1)
        with pytest.raises(ValueError):
            PowerBudget(p_s=0.5, p_r=1.0, p_max=1.0, noise_power=0.0)

    def test_grid(self):
        budget = PowerBudget(p_s=0.5, p_r=0.8, p_max=1.0, noise_power=0.1)
        grid = relay_power_grid(budget, 5)
        np.testing.assert_allclose(grid, [0.0, 0.2, 0.4, 0.6, 0.8])


class TestStage2:
    def test_single_gain_unit_budget(self):
        powers, rate = solve_stage2(np.array([1.0]), 1.0, 1.0)
        np.testing.assert_allclose(powers, [1.0])
        assert rate == pytest.approx(1.0)

    def test_zero_draw(self):
        powers, rate = solve_stage2(np.array([2.0, 1.0]), 0.0, 1.0)
        np.testing.assert_array_equal(powers, [0.0, 0.0])
        assert rate == 0.0

    def test_weak_mode_dropped(self):
        powers, rate = solve_stage2(np.array([2.0, 0.5]), 1.0, 1.0)
        np.testing.assert_allclose(powers, [1.0, 0.0], atol=1e-12)
        assert rate == pytest.approx(math.log2(3.0))

    def test_empty_gains(self):
        powers, rate = solve_stage2(np.zeros(0), 0.7, 1.0)
        assert powers.size == 0
        assert rate == 0.0

    def test_zero_gains_skipped(self):
        powers, rate = solve_stage2(np.array([0.0, 3.0, 0.0]), 1.0, 1.0)
        assert powers[0] == powers[2] == 0.0
        assert powers[1] == pytest.approx(1.0)
        assert rate == pytest.approx(2.0)


class TestMinPowerForRate:
    def test_single_channel_exact(self):
        powers = min_power_for_rate(np.array([1.0]), 1.0, 1.0)
        np.testing.assert_allclose(powers, [1.0])

    def test_meets_rate_exactly_when_all_active(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            count = rng.integers(1, 5)
            gains = rng.uniform(0.2, 5.0, count)
            noise = rng.uniform(0.2, 2.0)
            target = rng.uniform(0.1, 6.0)
            powers = min_power_for_rate(gains, target, noise)
            achieved = np.sum(np.log2(1.0 + gains * powers / noise))
            assert achieved == pytest.approx(target, abs=1e-6)
            assert np.all(powers >= 0)

    def test_active_set_reduction_drops_weakest(self):
        # a wildly weak channel must receive nothing for a small target
        gains = np.array([10.0, 1e-4])
        powers = min_power_for_rate(gains, 0.5, 1.0)
        assert powers[1] == 0.0
        achieved = np.sum(np.log2(1.0 + gains * powers))
        assert achieved == pytest.approx(0.5, abs=1e-9)

    def test_minimality_against_grid(self):
        # no split on a fine grid meets the rate with less total power
        gains = np.array([2.0, 0.7])
        noise = 0.5
        target = 2.0
        powers = min_power_for_rate(gains, target, noise)
        total = powers.sum()
        p1 = np.linspace(0.0, 3.0 * total, 20_001)
        rate1 = np.log2(1.0 + gains[0] * p1 / noise)
        needed2 = (2.0 ** np.maximum(target - rate1, 0.0) - 1.0) * noise / gains[1]
        assert np.min(p1 + needed2) >= total - 1e-6

    def test_zero_target(self):
        np.testing.assert_array_equal(min_power_for_rate(np.array([1.0, 2.0]), 0.0, 1.0), [0.0, 0.0])


class TestStage1:
    def test_uniform_gains_slack(self):
        alloc = solve_stage1(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 4.0, 100.0, 1.0)
        np.testing.assert_allclose(alloc.powers_sd, [1.0, 1.0])
        np.testing.assert_allclose(alloc.powers_sr, [1.0, 1.0])
        assert alloc.binding is Binding.SLACK

    def test_single_relay_stream_pinned(self):
        alloc = solve_stage1(np.zeros(0), np.array([1.0]), 10.0, 1.0, 1.0)
        np.testing.assert_allclose(alloc.powers_sr, [1.0])
        assert alloc.c_sr == pytest.approx(1.0)
        assert alloc.binding is Binding.TIGHT

    def test_tight_case_worked_example(self):
        # sd gain 1, sr gain 4, budget 2, cap 1: the joint split over-serves
        # the relay link, so it is pinned at 0.25 W and 1.75 W waterfills on
        # the direct link
        alloc = solve_stage1(np.array([1.0]), np.array([4.0]), 2.0, 1.0, 1.0)
        assert alloc.binding is Binding.TIGHT
        np.testing.assert_allclose(alloc.powers_sr, [0.25])
        np.testing.assert_allclose(alloc.powers_sd, [1.75])
        assert alloc.c_sr == pytest.approx(1.0)
        assert alloc.c_sd == pytest.approx(math.log2(2.75))
        oracle = stage1_grid_oracle(np.array([1.0]), np.array([4.0]), 2.0, 1.0, 1.0)
        assert stage1_objective(alloc) == pytest.approx(oracle, abs=1e-3)

    def test_shared_water_level_in_slack_phase(self):
        sd = np.array([1.5, 0.8])
        sr = np.array([2.5])
        noise = 0.7
        alloc = solve_stage1(sd, sr, 5.0, 1000.0, noise)
        assert alloc.binding is Binding.SLACK
        levels = []
        for gains, powers in ((sd, alloc.powers_sd), (sr, alloc.powers_sr)):
            for gain, power in zip(gains, powers):
                if power > 0:
                    levels.append(power + noise / gain)
        assert max(levels) - min(levels) <= 1e-9 * max(1.0, max(levels))

    def test_budget_spent_exactly(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            sd = rng.uniform(0.1, 4.0, rng.integers(1, 3))
            sr = rng.uniform(0.1, 4.0, rng.integers(1, 3))
            budget = rng.uniform(0.1, 5.0)
            cap = rng.uniform(0.0, 3.0)
            alloc = solve_stage1(sd, sr, budget, cap, 1.0)
            spent = alloc.powers_sd.sum() + alloc.powers_sr.sum()
            assert spent == pytest.approx(budget, rel=1e-9, abs=1e-12)
            assert alloc.c_sr <= cap + 1e-9

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(40):
            sd = rng.uniform(0.1, 3.0, rng.integers(0, 3))
            sr = rng.uniform(0.1, 3.0, rng.integers(0, 3))
            if sd.size + sr.size == 0:
                sd = np.array([1.0])
            budget = rng.uniform(0.3, 4.0)
            noise = rng.uniform(0.3, 2.0)
            cap = rng.uniform(0.0, 4.0)
            alloc = solve_stage1(sd, sr, budget, cap, noise)
            oracle = stage1_grid_oracle(sd, sr, budget, cap, noise)
            assert stage1_objective(alloc) >= oracle - 1e-9
            assert abs(stage1_objective(alloc) - oracle) < 1e-3

    def test_monotone_in_budget_and_cap(self):
        sd = np.array([1.0, 0.5])
        sr = np.array([2.0])
        rates = [
            total_rate(solve_stage1(sd, sr, budget, 1.5, 1.0), 1.5)
            for budget in np.linspace(0.1, 6.0, 30)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
        rates = [
            total_rate(solve_stage1(sd, sr, 3.0, cap, 1.0), cap)
            for cap in np.linspace(0.0, 4.0, 30)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))

    def test_zero_budget(self):
        alloc = solve_stage1(np.array([1.0]), np.array([1.0]), 0.0, 1.0, 1.0)
        assert alloc.c_sd == alloc.c_sr == 0.0
        assert alloc.powers_sd.sum() + alloc.powers_sr.sum() == 0.0


class TestTotalRate:
    def test_direct_example(self):
        alloc = Stage1Allocation(
            powers_sd=np.array([1.0]),
            powers_sr=np.array([1.0]),
            c_sd=2.0,
            c_sr=3.0,
            binding=Binding.TIGHT,
        )
        assert total_rate(alloc, 1.0) == pytest.approx(1.5)

    def test_forwarding_bound(self):
        alloc = solve_stage1(np.array([3.0]), np.array([7.0]), 2.0, 100.0, 1.0)
        # direct construction of the halved two-stage rate
        assert total_rate(alloc, 1.0) == pytest.approx(0.5 * (alloc.c_sd + 1.0))

    def test_relay_silent(self):
        alloc = solve_stage1(np.array([1.0]), np.zeros(0), 2.0, 0.0, 1.0)
        assert total_rate(alloc, 0.0) == pytest.approx(0.5 * alloc.c_sd)

    def test_solver_output_saturates_min(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            sd = rng.uniform(0.1, 3.0, 2)
            sr = rng.uniform(0.1, 3.0, 2)
            cap = rng.uniform(0.0, 2.0)
            alloc = solve_stage1(sd, sr, rng.uniform(0.2, 4.0), cap, 1.0)
            assert min(alloc.c_sr, cap) == pytest.approx(alloc.c_sr, abs=1e-9)
