"""Reference allocation algorithms.

* per-block winner-takes-all greedy (optimal when both carrier caps are slack),
* a two-stage LP rounding heuristic of comparable cost to the iterative solver,
* an exhaustive search over carrier activations and per-user carrier subsets,
  exact on small instances and used as a test oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (
    BinaryAllocation,
    ProblemInstance,
    evaluate_wsu,
    top_cap_indicator,
)
from .lp import LinearProgram, LpStatus, solve_lp

__all__ = [
    "OracleBudget",
    "BudgetExceededError",
    "GreedyResult",
    "greedy_unconstrained",
    "heuristic_solve",
    "brute_force_oracle",
    "oracle_enumeration_count",
]


@dataclass(frozen=True)
class OracleBudget:
    """Hard cap on how many (activation set, carrier subsets) combinations
    the exhaustive search may evaluate."""

    max_enumerations: int = 10_000_000

    def __post_init__(self):
        if self.max_enumerations < 1:
            raise ValueError("max_enumerations must be positive")


class BudgetExceededError(RuntimeError):
    def __init__(self, required: int, budget: OracleBudget):
        super().__init__(
            f"exhaustive search needs {required} enumerations, "
            f"budget allows {budget.max_enumerations}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class GreedyResult:
    """Greedy output plus whether it happened to respect both carrier caps."""

    allocation: BinaryAllocation
    within_caps: bool


def greedy_unconstrained(instance: ProblemInstance) -> GreedyResult:
    """Winner-takes-all per resource block.

    Every block goes to the user with the largest weighted utility on it
    (ties to the lowest user index); carrier admissions and activations are
    derived as indicators of what got used. Carrier caps are ignored, which
    is optimal exactly when they are slack; ``within_caps`` reports whether
    the output respects them anyway.
    """
    scores = instance.weights[:, None, None] * instance.utilities
    winners = np.argmax(scores, axis=0)  # (M, N); first max -> lowest k

    K, M, N = instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc
    alpha = np.zeros((K, M, N), dtype=np.int8)
    mm, nn = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    alpha[winners, mm, nn] = 1
    beta = (alpha.sum(axis=2) > 0).astype(np.int8)
    gamma = (beta.sum(axis=0) > 0).astype(np.int8)
    within_caps = bool(
        np.all(beta.sum(axis=1) <= instance.ue_cc_caps)
        and gamma.sum() <= instance.system_cc_cap
    )
    return GreedyResult(BinaryAllocation(alpha, beta, gamma), within_caps)


def _carrier_selection_lp(gains: np.ndarray, caps: np.ndarray, system_cap: int) -> LinearProgram:
    """Exact linearization of maximizing sum of gains[k, m] * beta[k, m] * gamma[m].

    Variables are ordered [t (K*M), beta (K*M), gamma (M)], all in [0, 1],
    with t <= beta, t <= gamma, per-user sum beta <= cap, sum gamma <=
    system cap. At an optimum t = min(beta, gamma) because the gains are
    nonnegative, so the t-objective equals the intended product objective.
    """
    K, M = gains.shape
    km = K * M
    n = 2 * km + M
    num_rows = 2 * km + K + 1
    A = np.zeros((num_rows, n))
    b = np.zeros(num_rows)

    def t_idx(k, m):
        return k * M + m

    def beta_idx(k, m):
        return km + k * M + m

    gamma_off = 2 * km

    row = 0
    for k in range(K):
        for m in range(M):
            A[row, t_idx(k, m)] = 1.0
            A[row, beta_idx(k, m)] = -1.0
            row += 1
    for k in range(K):
        for m in range(M):
            A[row, t_idx(k, m)] = 1.0
            A[row, gamma_off + m] = -1.0
            row += 1
    for k in range(K):
        A[row, km + k * M : km + (k + 1) * M] = 1.0
        b[row] = float(caps[k])
        row += 1
    A[row, gamma_off:] = 1.0
    b[row] = float(system_cap)

    c = np.zeros(n)
    c[:km] = gains.ravel()
    bounds = np.column_stack([np.zeros(n), np.ones(n)])
    return LinearProgram(c, A, b, bounds)


def heuristic_solve(instance: ProblemInstance) -> BinaryAllocation:
    """Two-stage baseline: LP carrier selection, round, then per-block winners.

    Stage one pretends every user holds every block (alpha = 1), reducing the
    problem to picking carrier admissions and activations; that bilinear
    objective is linearized exactly with auxiliary variables and solved as an
    LP. Stage two rounds activations and admissions the same way the
    iterative solver quantizes, then assigns each block on an active carrier
    to the admitted user with the largest weighted utility. Blocks on active
    carriers with no admitted user stay unallocated.
    """
    K, M, N = instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc
    gains = instance.weights[:, None] * instance.utilities.sum(axis=2)

    lp = _carrier_selection_lp(gains, instance.ue_cc_caps, instance.system_cc_cap)
    sol = solve_lp(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"carrier-selection LP came back {sol.status.value}")

    km = K * M
    beta_relaxed = sol.x[km : 2 * km].reshape(K, M)
    gamma_relaxed = sol.x[2 * km :]

    gamma_bin = top_cap_indicator(gamma_relaxed, instance.system_cc_cap)
    active = gamma_bin == 1
    beta_bin = np.zeros((K, M), dtype=np.int8)
    for k in range(K):
        beta_bin[k] = top_cap_indicator(beta_relaxed[k], int(instance.ue_cc_caps[k]), eligible=active)

    weighted = instance.weights[:, None, None] * instance.utilities
    alpha_bin = np.zeros((K, M, N), dtype=np.int8)
    for m in np.flatnonzero(active):
        members = beta_bin[:, m] == 1
        if not members.any():
            continue
        candidates = np.where(members[:, None], weighted[:, m, :], -1.0)
        winners = np.argmax(candidates, axis=0)
        alpha_bin[winners, m, np.arange(N)] = 1

    return BinaryAllocation(alpha_bin, beta_bin, gamma_bin)


def oracle_enumeration_count(num_ccs: int, caps, system_cap: int) -> int:
    """Number of (activation set, per-user subset) combinations the
    exhaustive search would evaluate."""
    caps = np.asarray(caps, dtype=int)
    total = 0
    for size in range(min(system_cap, num_ccs) + 1):
        per_ue = 1
        for cap in caps:
            per_ue *= sum(math.comb(size, j) for j in range(min(int(cap), size) + 1))
        total += math.comb(num_ccs, size) * per_ue
    return total


def brute_force_oracle(
    instance: ProblemInstance, budget: Optional[OracleBudget] = None
) -> Tuple[BinaryAllocation, float]:
    """Exact optimum by exhaustive enumeration.

    Activation sets are walked in ascending size, lexicographic within each
    size; so are each user's carrier subsets. With all carrier memberships
    fixed, the best block assignment decouples per block (winner-takes-all
    among the members), so only the membership combinations need walking.
    Ties keep the first combination found. Raises BudgetExceededError (with
    the required count) before doing any work that would blow the budget.
    """
    budget = budget if budget is not None else OracleBudget()
    required = oracle_enumeration_count(
        instance.num_ccs, instance.ue_cc_caps, instance.system_cc_cap
    )
    if required > budget.max_enumerations:
        raise BudgetExceededError(required, budget)

    K, M, N = instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc
    weighted = instance.weights[:, None, None] * instance.utilities

    best_value = -1.0
    best_active: tuple = ()
    best_membership: Optional[np.ndarray] = None

    for size in range(instance.system_cc_cap + 1):
        for active in itertools.combinations(range(M), size):
            active_arr = np.array(active, dtype=int)
            w_active = weighted[:, active_arr, :] if size else np.zeros((K, 0, N))

            per_ue_subsets = []
            for k in range(K):
                cap = min(int(instance.ue_cc_caps[k]), size)
                masks = []
                for count in range(cap + 1):
                    for chosen in itertools.combinations(range(size), count):
                        mask = np.zeros(size, dtype=bool)
                        mask[list(chosen)] = True
                        masks.append(mask)
                per_ue_subsets.append(masks)

            for combo in itertools.product(*per_ue_subsets):
                membership = np.array(combo, dtype=bool).reshape(K, size)
                value = float(
                    (w_active * membership[:, :, None]).max(axis=0).sum()
                ) if size else 0.0
                if value > best_value:
                    best_value = value
                    best_active = active
                    best_membership = membership

    alpha = np.zeros((K, M, N), dtype=np.int8)
    beta = np.zeros((K, M), dtype=np.int8)
    gamma = np.zeros(M, dtype=np.int8)
    if best_active:
        active_arr = np.array(best_active, dtype=int)
        gamma[active_arr] = 1
        beta[:, active_arr] = best_membership.astype(np.int8)
        for pos, m in enumerate(active_arr):
            members = best_membership[:, pos]
            if not members.any():
                continue
            candidates = np.where(members[:, None], weighted[:, m, :], -1.0)
            winners = np.argmax(candidates, axis=0)
            alpha[winners, m, np.arange(N)] = 1

    allocation = BinaryAllocation(alpha, beta, gamma)
    return allocation, evaluate_wsu(instance, allocation)
