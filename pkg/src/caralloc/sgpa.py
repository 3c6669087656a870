"""Iterative allocation solver with closed-form multiplicative updates.

The binary allocation problem is relaxed to continuous shares in (0, 1] and
attacked through a sequence of convexified subproblems, each of which has a
closed-form optimum: every variable is rescaled by its current marginal rate
and renormalized onto a capped simplex (sum fixed by the relevant cap, each
entry at most 1). Iterating this update drives the shares toward 0/1 values;
a final quantization step rounds whatever has not converged yet.

The normalization multiplier is found exactly by a breakpoint scan over the
sorted rates (no root-finding); see :func:`capped_simplex_normalize`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from .core import (
    BinaryAllocation,
    ProblemInstance,
    RelaxedAllocation,
    evaluate_wsu,
    quantize,
)

__all__ = [
    "DegenerateInstanceError",
    "SgpaConfig",
    "NormalizationSolution",
    "IterationRecord",
    "SgpaResult",
    "capped_simplex_normalize",
    "update_alpha",
    "update_beta",
    "update_gamma",
    "beta_rates",
    "gamma_rates",
    "solve",
    "relaxed_wsu_trace",
    "write_trace_csv",
]


class DegenerateInstanceError(ValueError):
    """Raised when every rate feeding a required update is zero."""


@dataclass
class SgpaConfig:
    """Solver knobs.

    * ``snap_tolerance``: values within this distance of 1 are set to exactly
      1, emulating what finite precision would eventually do anyway.
    * ``zero_tolerance``: values at or below this are set to exactly 0 and
      thereby removed from their active set for all later iterations.
    * ``initialization``: "uniform" spreads each variable block evenly over
      its cap (alpha = 1/K, beta row k = 1/M_k, gamma = 1/M0); alternatively
      pass a RelaxedAllocation to start from.
    """

    max_iterations: int = 20
    snap_tolerance: float = 1e-9
    zero_tolerance: float = 1e-12
    convergence_tolerance: float = 1e-10
    initialization: Union[str, RelaxedAllocation] = "uniform"
    record_trace: bool = False

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")
        self.max_iterations = int(self.max_iterations)
        for name in ("snap_tolerance", "zero_tolerance", "convergence_tolerance"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")
        if self.snap_tolerance >= 0.5:
            raise ValueError("snap_tolerance must be below 0.5")
        if not isinstance(self.initialization, RelaxedAllocation) and self.initialization != "uniform":
            raise ValueError('initialization must be "uniform" or a RelaxedAllocation')

    @classmethod
    def from_dict(cls, doc: dict) -> "SgpaConfig":
        known = {
            "max_iterations",
            "snap_tolerance",
            "zero_tolerance",
            "convergence_tolerance",
            "initialization",
            "record_trace",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown solver config fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class NormalizationSolution:
    """Outcome of one capped-simplex normalization.

    ``x[p] = min(1, v[p] / kappa)`` for positive inputs, 0 for zero inputs;
    ``saturated_count`` is the number of entries equal to 1.
    """

    kappa: float
    x: np.ndarray
    saturated_count: int


def capped_simplex_normalize(v, cap: int) -> NormalizationSolution:
    """Scale nonnegative scores onto the capped simplex {0 <= x <= 1, sum = cap}.

    Finds kappa > 0 with ``sum_p min(1, v_p / kappa) = cap`` and returns
    ``x_p = min(1, v_p / kappa)``; zero scores map to zero. When fewer than
    ``cap`` scores are positive, no such kappa exists: the positive entries
    all saturate at 1 instead (kappa = smallest positive score) and the sum
    falls short of the cap.

    The solve is exact, not iterative: with the positive scores sorted
    descending, the number of saturated entries t is the unique value in
    {0, ..., cap-1} for which kappa = (sum of scores below position t) /
    (cap - t) lands between the scores at positions t and t+1. O(P log P).
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("scores must be a nonempty 1-D array")
    cap = int(cap)
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if cap > v.size:
        raise ValueError(f"cap {cap} exceeds the number of entries {v.size}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValueError("scores must be finite and nonnegative")

    positive = v > 0
    num_positive = int(positive.sum())
    if num_positive == 0:
        raise ValueError("at least one score must be positive")

    if num_positive <= cap:
        kappa = float(v[positive].min())
        x = np.where(positive, 1.0, 0.0)
        return NormalizationSolution(kappa=kappa, x=x, saturated_count=num_positive)

    vs = np.sort(v[positive])[::-1]
    tail_sums = np.cumsum(vs[::-1])[::-1]  # tail_sums[t] = vs[t:].sum()
    upper = np.inf
    for t in range(cap):
        kappa = tail_sums[t] / (cap - t)
        # Exact arithmetic puts kappa in (vs[t], upper] at exactly one t. The
        # relative slack admits float-degenerate boundaries (a tiny tail entry
        # absorbed by the sum can land kappa exactly on vs[t]); neighbouring t
        # values give the same x to within the slack there.
        if kappa <= upper * (1.0 + 1e-12) and kappa >= vs[t] * (1.0 - 1e-12):
            x = np.minimum(1.0, v / kappa)
            x[~positive] = 0.0
            return NormalizationSolution(
                kappa=float(kappa), x=x, saturated_count=int((x == 1.0).sum())
            )
        upper = vs[t]
    raise RuntimeError("no saturation level satisfied the breakpoint conditions")


def _weighted_utilities(instance: ProblemInstance) -> np.ndarray:
    return instance.weights[:, None, None] * instance.utilities


def update_alpha(instance: ProblemInstance, prev: RelaxedAllocation) -> np.ndarray:
    """One block-share update: renormalize each (carrier, block) column.

    new_alpha[k, m, n] is proportional to
    ``prev_alpha[k, m, n] * prev_beta[k, m] * w_k * phi[k, m, n]`` with each
    (m, n) column scaled to sum to 1. The carrier activations cancel between
    numerator and denominator and must not appear. A column whose products
    are all zero is left at its previous values (it earns nothing either way).
    """
    scores = prev.alpha * prev.beta[:, :, None] * _weighted_utilities(instance)
    denom = scores.sum(axis=0, keepdims=True)
    safe = np.where(denom > 0.0, denom, 1.0)
    return np.where(denom > 0.0, scores / safe, prev.alpha)


def beta_rates(instance: ProblemInstance, prev: RelaxedAllocation) -> np.ndarray:
    """Effective per-(user, carrier) rate feeding the carrier-share update."""
    per_cc = np.einsum("kmn,kmn->km", prev.alpha, _weighted_utilities(instance))
    return prev.gamma[None, :] * per_cc


def update_beta(instance: ProblemInstance, prev: RelaxedAllocation) -> np.ndarray:
    """One carrier-share update per user: capped-simplex normalization of the
    previous shares scaled by their rates, with the user's carrier cap as the
    target sum. A user whose rates are all zero keeps its previous row."""
    v = prev.beta * beta_rates(instance, prev)
    out = prev.beta.copy()
    for k in range(instance.num_ues):
        if v[k].max() > 0.0:
            out[k] = capped_simplex_normalize(v[k], int(instance.ue_cc_caps[k])).x
    return out


def gamma_rates(instance: ProblemInstance, prev: RelaxedAllocation) -> np.ndarray:
    """Effective per-carrier rate feeding the activation update."""
    per_cc = np.einsum("kmn,kmn->km", prev.alpha, _weighted_utilities(instance))
    return np.einsum("km,km->m", prev.beta, per_cc)


def update_gamma(instance: ProblemInstance, prev: RelaxedAllocation) -> np.ndarray:
    """One activation update: capped-simplex normalization with the system cap."""
    v = prev.gamma * gamma_rates(instance, prev)
    if not np.any(v > 0.0):
        raise DegenerateInstanceError("all carrier rates are zero")
    return capped_simplex_normalize(v, instance.system_cc_cap).x


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration diagnostics.

    ``sum_residual`` is the worst deviation of the raw (pre-snap) update from
    its normalization identities: block columns summing to 1, carrier-share
    rows and activations summing to min(cap, number of positive scores).
    ``zero_rate_ues`` lists users whose carrier-share row was held because
    every score was zero.
    """

    iteration: int
    relaxed_wsu: float
    max_change: float
    sum_residual: float
    zero_rate_ues: tuple


@dataclass
class SgpaResult:
    relaxed: RelaxedAllocation
    binary: BinaryAllocation
    wsu: float
    iterations_run: int
    converged: bool
    trace: Optional[List[IterationRecord]] = None


def _snap(arr: np.ndarray, snap_tol: float, zero_tol: float) -> np.ndarray:
    arr = arr.copy()
    arr[arr >= 1.0 - snap_tol] = 1.0
    arr[arr <= zero_tol] = 0.0
    return arr


def _uniform_initialization(instance: ProblemInstance) -> tuple:
    K, M, N = instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc
    alpha = np.full((K, M, N), 1.0 / K)
    beta = np.repeat((1.0 / instance.ue_cc_caps)[:, None], M, axis=1)
    gamma = np.full(M, 1.0 / instance.system_cc_cap)
    return alpha, beta, gamma


def solve(instance: ProblemInstance, config: Optional[SgpaConfig] = None) -> SgpaResult:
    """Run the iterative solver and quantize the final iterate.

    All three variable blocks are updated in parallel from the previous
    iterate (pure Jacobi sweep). After each sweep, values within
    ``snap_tolerance`` of 1 are snapped to 1 and values at or below
    ``zero_tolerance`` are zeroed; iteration stops early once the largest
    change across all variables falls below ``convergence_tolerance``.
    """
    cfg = config if config is not None else SgpaConfig()

    if isinstance(cfg.initialization, RelaxedAllocation):
        init = cfg.initialization
        if init.dims() != (instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc):
            raise ValueError("custom initialization does not match the instance dimensions")
        alpha, beta, gamma = init.alpha.copy(), init.beta.copy(), init.gamma.copy()
    else:
        alpha, beta, gamma = _uniform_initialization(instance)

    trace: Optional[List[IterationRecord]] = [] if cfg.record_trace else None
    phi = instance.utilities
    w = instance.weights
    iterations_run = 0
    converged = False

    for iteration in range(1, cfg.max_iterations + 1):
        prev = RelaxedAllocation(alpha, beta, gamma, floor=cfg.zero_tolerance)
        new_alpha = update_alpha(instance, prev)
        new_beta = update_beta(instance, prev)
        new_gamma = update_gamma(instance, prev)

        residual = 0.0
        zero_rate: tuple = ()
        if cfg.record_trace:
            residual, zero_rate = _sum_identity_residual(
                instance, prev, new_alpha, new_beta, new_gamma
            )

        new_alpha = _snap(new_alpha, cfg.snap_tolerance, cfg.zero_tolerance)
        new_beta = _snap(new_beta, cfg.snap_tolerance, cfg.zero_tolerance)
        new_gamma = _snap(new_gamma, cfg.snap_tolerance, cfg.zero_tolerance)

        # Active-set removal cascades: a carrier whose activation hit exact
        # zero can never recover (its rates are identically zero from here
        # on), so the shares under it are permanently inert. Zeroing them
        # keeps them from freezing at stale fractional values; live dynamics
        # are unaffected because every path through them carries the zero.
        dead = new_gamma == 0.0
        if dead.any():
            new_beta[:, dead] = 0.0
            new_alpha[:, dead, :] = 0.0

        max_change = max(
            float(np.abs(new_alpha - alpha).max()),
            float(np.abs(new_beta - beta).max()),
            float(np.abs(new_gamma - gamma).max()),
        )
        alpha, beta, gamma = new_alpha, new_beta, new_gamma
        iterations_run = iteration

        if cfg.record_trace:
            relaxed_wsu = float(np.einsum("k,m,km,kmn,kmn->", w, gamma, beta, alpha, phi))
            trace.append(
                IterationRecord(
                    iteration=iteration,
                    relaxed_wsu=relaxed_wsu,
                    max_change=max_change,
                    sum_residual=residual,
                    zero_rate_ues=zero_rate,
                )
            )

        if max_change < cfg.convergence_tolerance:
            converged = True
            break

    final = RelaxedAllocation(alpha, beta, gamma, floor=cfg.zero_tolerance)
    binary = quantize(instance, final)
    return SgpaResult(
        relaxed=final,
        binary=binary,
        wsu=evaluate_wsu(instance, binary),
        iterations_run=iterations_run,
        converged=converged,
        trace=trace,
    )


def _sum_identity_residual(instance, prev, new_alpha, new_beta, new_gamma):
    """Worst deviation of the raw update from its normalization identities."""
    scores = prev.alpha * prev.beta[:, :, None] * _weighted_utilities(instance)
    live_cols = scores.sum(axis=0) > 0
    residual = 0.0
    if live_cols.any():
        col_sums = new_alpha.sum(axis=0)
        residual = float(np.abs(col_sums[live_cols] - 1.0).max())

    v_beta = prev.beta * beta_rates(instance, prev)
    zero_rate = []
    for k in range(instance.num_ues):
        positives = int((v_beta[k] > 0).sum())
        if positives == 0:
            zero_rate.append(k)
            continue
        expected = min(int(instance.ue_cc_caps[k]), positives)
        residual = max(residual, abs(float(new_beta[k].sum()) - expected))

    v_gamma = prev.gamma * gamma_rates(instance, prev)
    positives = int((v_gamma > 0).sum())
    expected = min(instance.system_cc_cap, positives)
    residual = max(residual, abs(float(new_gamma.sum()) - expected))
    return residual, tuple(zero_rate)


def relaxed_wsu_trace(result: SgpaResult) -> List[tuple]:
    """The (iteration, relaxed objective) series of a traced run."""
    if result.trace is None:
        raise ValueError("solver was run without trace recording")
    return [(rec.iteration, rec.relaxed_wsu) for rec in result.trace]


def write_trace_csv(result: SgpaResult, path) -> None:
    """Write the trace as CSV with columns iteration, relaxed_wsu, max_change."""
    if result.trace is None:
        raise ValueError("solver was run without trace recording")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "relaxed_wsu", "max_change"])
        for rec in result.trace:
            writer.writerow([rec.iteration, repr(rec.relaxed_wsu), repr(rec.max_change)])
