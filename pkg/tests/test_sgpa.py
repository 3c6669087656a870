"""The iterative solver: update rules, fixed-rate convergence, full solve."""

import numpy as np
import pytest

from caralloc.core import ProblemInstance, RelaxedAllocation, check_feasibility, evaluate_wsu
from caralloc.baselines import greedy_unconstrained
from caralloc.sgpa import (
    DegenerateInstanceError,
    SgpaConfig,
    capped_simplex_normalize,
    relaxed_wsu_trace,
    solve,
    update_alpha,
    update_beta,
    update_gamma,
    write_trace_csv,
)
from caralloc.simharness import GenParams, sample_instance


def make_instance(weights, phi, caps, m0):
    phi = np.asarray(phi, dtype=float)
    K, M, N = phi.shape
    return ProblemInstance(
        num_ues=K,
        num_ccs=M,
        num_rbs_per_cc=N,
        weights=weights,
        utilities=phi,
        ue_cc_caps=caps,
        system_cc_cap=m0,
    )


class TestConfig:
    def test_defaults(self):
        cfg = SgpaConfig()
        assert cfg.max_iterations == 20
        assert cfg.snap_tolerance == 1e-9
        assert cfg.zero_tolerance == 1e-12
        assert cfg.convergence_tolerance == 1e-10
        assert cfg.initialization == "uniform"

    def test_from_dict(self):
        cfg = SgpaConfig.from_dict(
            {"max_iterations": 5, "snap_tolerance": 1e-6, "zero_tolerance": 1e-9,
             "convergence_tolerance": 1e-8, "initialization": "uniform"}
        )
        assert cfg.max_iterations == 5 and cfg.snap_tolerance == 1e-6

    def test_from_dict_rejects_unknown_fields(self):
        with pytest.raises(ValueError):
            SgpaConfig.from_dict({"iterations": 5})

    def test_rejects_bad_snap(self):
        with pytest.raises(ValueError):
            SgpaConfig(snap_tolerance=0.6)

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(ValueError):
            SgpaConfig(zero_tolerance=0.0)


class TestUpdateAlpha:
    def test_reweighting_hand_example(self):
        # One block, two users: shares [0.5, 0.5], products [4, 1] -> [0.8, 0.2].
        phi = np.array([[[4.0]], [[1.0]]])
        inst = make_instance([1.0, 1.0], phi, [1, 1], 1)
        prev = RelaxedAllocation(np.full((2, 1, 1), 0.5), np.ones((2, 1)), np.ones(1))
        out = update_alpha(inst, prev)
        np.testing.assert_allclose(out[:, 0, 0], [0.8, 0.2])

    def test_equal_rates_preserve_direction(self):
        phi = np.array([[[3.0]], [[3.0]]])
        inst = make_instance([1.0, 1.0], phi, [1, 1], 1)
        prev = RelaxedAllocation(
            np.array([[[0.9]], [[0.1]]]), np.ones((2, 1)), np.ones(1)
        )
        out = update_alpha(inst, prev)
        np.testing.assert_allclose(out[:, 0, 0], [0.9, 0.1])

    def test_iterated_update_converges_to_argmax(self):
        rng = np.random.default_rng(0)
        phi = rng.uniform(0.1, 1.0, (4, 1, 1))
        inst = make_instance(np.ones(4), phi, [1, 1, 1, 1], 1)
        alpha = np.full((4, 1, 1), 0.25)
        beta = np.ones((4, 1))
        gamma = np.ones(1)
        for _ in range(50):
            alpha = update_alpha(inst, RelaxedAllocation(alpha, beta, gamma))
        expected = np.zeros(4)
        expected[np.argmax(phi[:, 0, 0])] = 1.0
        np.testing.assert_allclose(alpha[:, 0, 0], expected, atol=1e-6)

    def test_zero_column_is_held(self):
        phi = np.zeros((2, 1, 2))
        phi[:, 0, 0] = [1.0, 2.0]  # second block has zero utility for everyone
        inst = make_instance([1.0, 1.0], phi, [1, 1], 1)
        prev = RelaxedAllocation(np.full((2, 1, 2), 0.5), np.ones((2, 1)), np.ones(1))
        out = update_alpha(inst, prev)
        np.testing.assert_array_equal(out[:, 0, 1], [0.5, 0.5])
        assert out[:, 0, 0].sum() == pytest.approx(1.0)


class TestUpdateBeta:
    def test_capped_normalization_hand_example(self):
        # Rates per carrier [9, 3, 3], uniform previous shares 1/3, cap 1:
        # scores [3, 1, 1] -> kappa 5 -> [0.6, 0.2, 0.2].
        phi = np.array([[[9.0], [3.0], [3.0]]])
        inst = make_instance([1.0], phi, [1], 3)
        prev = RelaxedAllocation(np.ones((1, 3, 1)), np.full((1, 3), 1.0 / 3.0), np.ones(3))
        out = update_beta(inst, prev)
        np.testing.assert_allclose(out[0], [0.6, 0.2, 0.2])

    def test_slack_cap_saturates_everything(self):
        rng = np.random.default_rng(1)
        phi = rng.uniform(0.1, 1.0, (2, 3, 2))
        inst = make_instance([1.0, 1.0], phi, [3, 3], 3)
        prev = RelaxedAllocation(
            np.full((2, 3, 2), 0.5), rng.uniform(0.1, 1.0, (2, 3)), np.ones(3)
        )
        out = update_beta(inst, prev)
        np.testing.assert_array_equal(out, np.ones((2, 3)))

    def test_zero_rate_carrier_absorbs_to_zero(self):
        phi = np.array([[[2.0], [0.0]]])  # carrier 1 worthless
        inst = make_instance([1.0], phi, [1], 2)
        prev = RelaxedAllocation(np.ones((1, 2, 1)), np.full((1, 2), 0.5), np.ones(2))
        out = update_beta(inst, prev)
        assert out[0, 1] == 0.0
        again = update_beta(inst, RelaxedAllocation(np.ones((1, 2, 1)), out, np.ones(2)))
        assert again[0, 1] == 0.0

    def test_all_zero_rates_hold_row(self):
        phi = np.zeros((2, 2, 1))
        phi[1] = 1.0  # only user 1 sees anything
        inst = make_instance([1.0, 1.0], phi, [1, 1], 2)
        prev = RelaxedAllocation(np.full((2, 2, 1), 0.5), np.full((2, 2), 0.4), np.ones(2))
        out = update_beta(inst, prev)
        np.testing.assert_array_equal(out[0], [0.4, 0.4])  # held
        assert out[1].sum() == pytest.approx(1.0)


class TestUpdateGamma:
    def test_slack_cap_saturates(self):
        rng = np.random.default_rng(2)
        phi = rng.uniform(0.1, 1.0, (2, 2, 2))
        inst = make_instance([1.0, 1.0], phi, [2, 2], 2)
        prev = RelaxedAllocation(np.full((2, 2, 2), 0.5), np.ones((2, 2)), np.full(2, 0.5))
        np.testing.assert_array_equal(update_gamma(inst, prev), [1.0, 1.0])

    def test_capped_hand_example(self):
        # Scores gamma*rate = [3, 1], cap 1 -> kappa 4 -> [0.75, 0.25].
        phi = np.array([[[6.0], [2.0]]])
        inst = make_instance([1.0], phi, [2], 1)
        prev = RelaxedAllocation(np.ones((1, 2, 1)), np.ones((1, 2)), np.full(2, 0.5))
        out = update_gamma(inst, prev)
        np.testing.assert_allclose(out, [0.75, 0.25])

    def test_symmetric_tie_makes_no_progress(self):
        phi = np.array([[[2.0], [2.0]]])
        inst = make_instance([1.0], phi, [2], 1)
        prev = RelaxedAllocation(np.ones((1, 2, 1)), np.ones((1, 2)), np.full(2, 0.5))
        np.testing.assert_allclose(update_gamma(inst, prev), [0.5, 0.5])

    def test_degenerate_instance_raises(self):
        inst = make_instance([1.0], np.zeros((1, 2, 1)), [1], 1)
        prev = RelaxedAllocation(np.ones((1, 2, 1)), np.ones((1, 2)), np.full(2, 0.5))
        with pytest.raises(DegenerateInstanceError):
            update_gamma(inst, prev)


class TestFixedRateIteration:
    """The one-vector update with constant rates, where the limit is known."""

    @staticmethod
    def iterate(rates, cap, x0, steps, snap=1e-9, zero=1e-12):
        trajectory = [np.asarray(x0, dtype=float)]
        kappas = []
        x = trajectory[0]
        for _ in range(steps):
            sol = capped_simplex_normalize(x * rates, cap)
            kappas.append(sol.kappa)
            x = sol.x.copy()
            x[x >= 1 - snap] = 1.0
            x[x <= zero] = 0.0
            trajectory.append(x)
        return np.array(trajectory), np.array(kappas)

    def test_converges_to_top_cap_indicator(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            size = int(rng.integers(4, 12))
            cap = int(rng.integers(1, size))
            rates = np.sort(rng.uniform(0.5, 3.0, size))[::-1]
            if np.min(rates[:-1] / rates[1:]) < 1.05:
                continue  # keep the run length bounded
            x0 = capped_simplex_normalize(rng.uniform(0.5, 1.5, size), cap).x
            trajectory, _ = self.iterate(rates, cap, x0, 600)
            expected = np.concatenate([np.ones(cap), np.zeros(size - cap)])
            np.testing.assert_array_equal(trajectory[-1], expected)

    def test_zero_rate_entries_die_immediately(self):
        rates = np.array([2.0, 1.0, 0.0])
        x0 = np.array([0.3, 0.3, 0.4])
        trajectory, _ = self.iterate(rates, 1, x0, 5)
        assert np.all(trajectory[1:, 2] == 0.0)

    def test_best_unsaturated_entry_strictly_climbs(self):
        """At every step before the fixed point, the entry with the largest
        rate among the non-saturated ones strictly increases."""
        rng = np.random.default_rng(6)
        for _ in range(20):
            size = 10
            cap = 3
            rates = np.sort(rng.uniform(0.5, 5.0, size))[::-1]
            x0 = capped_simplex_normalize(rng.uniform(0.5, 1.5, size), cap).x
            trajectory, _ = self.iterate(rates, cap, x0, 400)
            target = np.concatenate([np.ones(cap), np.zeros(size - cap)])
            for i in range(trajectory.shape[0] - 1):
                if np.array_equal(trajectory[i], target):
                    break
                if (trajectory[i] == 1.0).sum() >= cap:
                    continue  # all slots taken: only the tail is still dying
                unsaturated = np.flatnonzero(trajectory[i] < 1.0)
                best = unsaturated[np.argmax(rates[unsaturated])]
                after = trajectory[i + 1, best]
                assert after > trajectory[i, best] or after == 1.0

    def test_kappa_below_best_unsaturated_rate(self):
        """While saturation slots remain open, the normalization multiplier
        stays strictly below the best rate among non-saturated entries."""
        rng = np.random.default_rng(7)
        for _ in range(10):
            rates = np.sort(rng.uniform(0.5, 5.0, 10))[::-1]
            x0 = capped_simplex_normalize(rng.uniform(0.5, 1.5, 10), 3).x
            trajectory, kappas = self.iterate(rates, 3, x0, 200)
            checked = 0
            for i, kappa in enumerate(kappas):
                if (trajectory[i] == 1.0).sum() >= 3:
                    break
                unsaturated = np.flatnonzero(trajectory[i] < 1.0)
                assert kappa < rates[unsaturated].max()
                checked += 1
            assert checked > 0

    def test_saturated_entries_stay_saturated(self):
        rng = np.random.default_rng(8)
        rates = np.sort(rng.uniform(0.5, 5.0, 8))[::-1]
        x0 = capped_simplex_normalize(rng.uniform(0.5, 1.5, 8), 2).x
        trajectory, _ = self.iterate(rates, 2, x0, 300)
        for p in range(8):
            hits = np.flatnonzero(trajectory[:, p] == 1.0)
            if hits.size:
                assert np.all(trajectory[hits[0] :, p] == 1.0)


class TestSolve:
    def test_trivial_instance_converges_in_one_iteration(self):
        inst = make_instance([1.0], [[[2.0]]], [1], 1)
        result = solve(inst)
        assert result.converged
        assert result.iterations_run == 1
        assert result.relaxed.alpha[0, 0, 0] == 1.0
        assert result.relaxed.beta[0, 0] == 1.0
        assert result.relaxed.gamma[0] == 1.0
        assert result.wsu == 2.0

    def test_slack_caps_match_greedy_winners(self):
        for seed in range(10):
            inst = sample_instance(
                GenParams(K=4, M=3, N=5, ue_cc_cap=3, system_cc_cap_limit=3, seed=seed)
            )
            result = solve(inst)
            greedy = greedy_unconstrained(inst)
            np.testing.assert_array_equal(result.binary.alpha, greedy.allocation.alpha)
            assert result.wsu == evaluate_wsu(inst, greedy.allocation)

    def test_iterate_sum_identities_hold(self):
        for seed in range(20):
            inst = sample_instance(
                GenParams(K=3, M=5, N=3, ue_cc_cap=2, system_cc_cap_limit=3, seed=seed)
            )
            result = solve(inst, SgpaConfig(record_trace=True))
            assert max(rec.sum_residual for rec in result.trace) < 1e-9

    def test_result_invariants(self):
        inst = sample_instance(GenParams(K=3, M=4, N=3, ue_cc_cap=2, system_cc_cap_limit=2, seed=3))
        cfg = SgpaConfig(max_iterations=15)
        result = solve(inst, cfg)
        assert result.iterations_run <= 15
        assert result.wsu == evaluate_wsu(inst, result.binary)
        assert check_feasibility(inst, result.binary).ok

    def test_custom_initialization(self):
        inst = make_instance([1.0, 1.0], np.ones((2, 2, 2)) * [[[1.0]], [[2.0]]], [1, 1], 2)
        start = RelaxedAllocation(
            np.full((2, 2, 2), 0.5), np.full((2, 2), 0.5), np.full(2, 0.5)
        )
        result = solve(inst, SgpaConfig(initialization=start))
        assert check_feasibility(inst, result.binary).ok

    def test_custom_initialization_dimension_mismatch(self):
        inst = make_instance([1.0], [[[1.0]]], [1], 1)
        start = RelaxedAllocation(np.ones((2, 1, 1)), np.ones((2, 1)), np.ones(1))
        with pytest.raises(ValueError):
            solve(inst, SgpaConfig(initialization=start))

    def test_deactivated_carriers_zero_their_subtree(self):
        inst = sample_instance(GenParams(K=3, M=6, N=3, ue_cc_cap=2, system_cc_cap_limit=2, seed=9))
        result = solve(inst, SgpaConfig(max_iterations=300))
        dead = result.relaxed.gamma == 0.0
        assert dead.any()
        assert np.all(result.relaxed.beta[:, dead] == 0.0)
        assert np.all(result.relaxed.alpha[:, dead, :] == 0.0)


class TestTrace:
    def test_single_iteration_series(self):
        inst = make_instance([1.0], [[[2.0]]], [1], 1)
        result = solve(inst, SgpaConfig(max_iterations=1, record_trace=True))
        series = relaxed_wsu_trace(result)
        assert series == [(1, 2.0)]

    def test_fixed_point_series_is_constant(self):
        inst = make_instance([1.0], [[[2.0]]], [1], 1)
        start = RelaxedAllocation(np.ones((1, 1, 1)), np.ones((1, 1)), np.ones(1))
        result = solve(inst, SgpaConfig(max_iterations=5, initialization=start, record_trace=True))
        values = {wsu for _, wsu in relaxed_wsu_trace(result)}
        assert values == {2.0}

    def test_untraced_run_raises(self):
        inst = make_instance([1.0], [[[2.0]]], [1], 1)
        result = solve(inst)
        with pytest.raises(ValueError):
            relaxed_wsu_trace(result)

    def test_series_finite_on_random_instance(self):
        inst = sample_instance(GenParams(K=4, M=5, N=4, ue_cc_cap=2, system_cc_cap_limit=3, seed=21))
        result = solve(inst, SgpaConfig(max_iterations=30, record_trace=True))
        series = relaxed_wsu_trace(result)
        assert len(series) == result.iterations_run
        assert all(np.isfinite(wsu) for _, wsu in series)

    def test_csv_export(self, tmp_path):
        inst = sample_instance(GenParams(K=2, M=2, N=2, ue_cc_cap=1, system_cc_cap_limit=2, seed=0))
        result = solve(inst, SgpaConfig(max_iterations=4, record_trace=True))
        path = tmp_path / "trace.csv"
        write_trace_csv(result, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "iteration,relaxed_wsu,max_change"
        assert len(lines) == 1 + result.iterations_run
