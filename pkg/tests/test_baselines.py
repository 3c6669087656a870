"""Greedy, LP-rounding heuristic, and the exhaustive-search oracle."""

import numpy as np
import pytest

from caralloc.baselines import (
    BudgetExceededError,
    OracleBudget,
    brute_force_oracle,
    greedy_unconstrained,
    heuristic_solve,
    oracle_enumeration_count,
)
from caralloc.core import ProblemInstance, check_feasibility, evaluate_wsu
from caralloc.sgpa import solve
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


def permuted_instance(instance, ue_perm, cc_perm):
    return make_instance(
        instance.weights[ue_perm],
        instance.utilities[np.ix_(ue_perm, cc_perm)],
        instance.ue_cc_caps[ue_perm],
        instance.system_cc_cap,
    )


class TestGreedy:
    def test_higher_utility_wins(self):
        inst = make_instance([1.0, 1.0], [[[5.0]], [[3.0]]], [1, 1], 1)
        result = greedy_unconstrained(inst)
        assert result.allocation.alpha[0, 0, 0] == 1
        assert result.allocation.alpha[1, 0, 0] == 0

    def test_weight_can_flip_the_winner(self):
        inst = make_instance([1.0, 10.0], [[[5.0]], [[1.0]]], [1, 1], 1)
        result = greedy_unconstrained(inst)
        assert result.allocation.alpha[1, 0, 0] == 1  # 10*1 > 1*5

    def test_tie_goes_to_lowest_index(self):
        inst = make_instance([1.0, 1.0], [[[2.0]], [[2.0]]], [1, 1], 1)
        result = greedy_unconstrained(inst)
        assert result.allocation.alpha[0, 0, 0] == 1

    def test_matches_oracle_when_caps_are_slack(self):
        for seed in range(15):
            inst = sample_instance(
                GenParams(K=3, M=3, N=2, ue_cc_cap=3, system_cc_cap_limit=3, seed=seed)
            )
            greedy = greedy_unconstrained(inst)
            assert greedy.within_caps
            assert check_feasibility(inst, greedy.allocation).ok
            _, oracle_wsu = brute_force_oracle(inst)
            assert evaluate_wsu(inst, greedy.allocation) == pytest.approx(oracle_wsu, abs=1e-9)

    def test_flags_cap_violations(self):
        rng = np.random.default_rng(0)
        inst = make_instance(
            np.ones(2), rng.uniform(0.5, 1.0, (2, 4, 2)), [1, 1], 4
        )
        result = greedy_unconstrained(inst)
        assert not result.within_caps


class TestHeuristic:
    def test_reduces_to_greedy_with_slack_caps(self):
        for seed in range(10):
            inst = sample_instance(
                GenParams(K=3, M=3, N=4, ue_cc_cap=3, system_cc_cap_limit=3, seed=seed)
            )
            heuristic = heuristic_solve(inst)
            greedy = greedy_unconstrained(inst)
            np.testing.assert_array_equal(heuristic.alpha, greedy.allocation.alpha)

    def test_single_ue_lp_vertex_by_hand(self):
        # Per-carrier gains [5, 1] with a single-carrier cap: the LP puts the
        # whole budget on carrier 0 and every one of its blocks goes to the UE.
        phi = np.array([[[2.5, 2.5], [0.5, 0.5]]])
        inst = make_instance([1.0], phi, [1], 2)
        out = heuristic_solve(inst)
        np.testing.assert_array_equal(out.beta, [[1, 0]])
        np.testing.assert_array_equal(out.alpha[0, 0], [1, 1])
        np.testing.assert_array_equal(out.alpha[0, 1], [0, 0])

    def test_never_beats_oracle(self):
        for seed in range(30):
            inst = sample_instance(
                GenParams(K=2, M=3, N=2, ue_cc_cap=1, system_cc_cap_limit=2, seed=seed)
            )
            wsu = evaluate_wsu(inst, heuristic_solve(inst))
            _, oracle_wsu = brute_force_oracle(inst)
            assert wsu <= oracle_wsu + 1e-9

    def test_output_feasible(self):
        rng = np.random.default_rng(1)
        for seed in range(20):
            K = int(rng.integers(2, 5))
            M = int(rng.integers(2, 6))
            inst = sample_instance(
                GenParams(
                    K=K,
                    M=M,
                    N=int(rng.integers(2, 4)),
                    ue_cc_cap=int(rng.integers(1, M + 1)),
                    system_cc_cap_limit=int(rng.integers(1, M + 1)),
                    seed=seed,
                )
            )
            assert check_feasibility(inst, heuristic_solve(inst)).ok


class TestOracle:
    def test_two_carrier_hand_case(self):
        # Single UE limited to one carrier: takes the better one.
        inst = make_instance([1.5], [[[3.0], [7.0]]], [1], 2)
        alloc, wsu = brute_force_oracle(inst)
        assert wsu == pytest.approx(1.5 * 7.0)
        np.testing.assert_array_equal(alloc.beta, [[0, 1]])

    def test_enumeration_count_formula(self):
        # M=3, M0=2, caps [1, 1]: sizes 0,1,2 -> 1*1 + 3*(2*2) + 3*(3*3) = 40.
        assert oracle_enumeration_count(3, [1, 1], 2) == 40

    def test_budget_guard(self):
        inst = sample_instance(
            GenParams(K=4, M=6, N=2, ue_cc_cap=3, system_cc_cap_limit=6, seed=0)
        )
        with pytest.raises(BudgetExceededError) as err:
            brute_force_oracle(inst, OracleBudget(max_enumerations=10))
        assert err.value.required == oracle_enumeration_count(6, [3] * 4, 6)

    def test_invariant_under_index_permutations(self):
        rng = np.random.default_rng(2)
        for seed in range(10):
            inst = sample_instance(
                GenParams(K=3, M=3, N=2, ue_cc_cap=1, system_cc_cap_limit=2, seed=seed)
            )
            _, wsu = brute_force_oracle(inst)
            ue_perm = rng.permutation(3)
            cc_perm = rng.permutation(3)
            _, wsu_perm = brute_force_oracle(permuted_instance(inst, ue_perm, cc_perm))
            assert wsu == pytest.approx(wsu_perm, abs=1e-9)

    def test_monotone_in_caps(self):
        for seed in range(10):
            base = GenParams(K=2, M=4, N=2, ue_cc_cap=1, system_cc_cap_limit=2, seed=seed)
            inst = sample_instance(base)
            _, wsu = brute_force_oracle(inst)
            looser_ue = make_instance(
                inst.weights, inst.utilities, [2, 2], inst.system_cc_cap
            )
            _, wsu_ue = brute_force_oracle(looser_ue)
            looser_sys = make_instance(inst.weights, inst.utilities, [1, 1], 3)
            _, wsu_sys = brute_force_oracle(looser_sys)
            assert wsu_ue >= wsu - 1e-12
            assert wsu_sys >= wsu - 1e-12

    def test_dominates_other_algorithms(self):
        for seed in range(20):
            inst = sample_instance(
                GenParams(K=3, M=4, N=2, ue_cc_cap=2, system_cc_cap_limit=2, seed=seed)
            )
            alloc, wsu = brute_force_oracle(inst)
            assert check_feasibility(inst, alloc).ok
            assert solve(inst).wsu <= wsu + 1e-9
            assert evaluate_wsu(inst, heuristic_solve(inst)) <= wsu + 1e-9
