"""Seeded random instance generation and Monte-Carlo sweep harness.

Randomness comes from numpy's Philox counter-based generator. Every stream
is keyed by ``SeedSequence(seed, spawn_key=...)``: a sweep derives the trial
stream from (base seed, grid index, trial index), so results are a pure
function of the configuration no matter how trials are scheduled. The
generator name is recorded in the sweep metadata.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import __version__
from .baselines import (
    OracleBudget,
    brute_force_oracle,
    greedy_unconstrained,
    heuristic_solve,
    oracle_enumeration_count,
)
from .core import ProblemInstance, evaluate_wsu
from .sgpa import SgpaConfig, capped_simplex_normalize, solve

__all__ = [
    "GENERATOR_NAME",
    "GenParams",
    "SweepConfig",
    "ResultRow",
    "capacity_utilities",
    "sample_instance",
    "run_sweep",
    "fig1_experiment",
    "write_results_csv",
    "write_metadata",
]

GENERATOR_NAME = "numpy.random.Philox"

SWEEP_ALGORITHMS = ("sgpa", "heuristic", "greedy", "oracle")

CSV_HEADER = ["algorithm", "M", "Mk", "M0", "trials", "mean_wsu", "stderr_wsu", "mean_solve_seconds"]


def _rng(seed: int, stream_key: Tuple[int, ...] = ()) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream_key)))


@dataclass(frozen=True)
class GenParams:
    """Description of the random instance family.

    ``ue_cc_cap`` may be a scalar (same cap for every user) or one value per
    user. The effective system cap is ``min(M, system_cc_cap_limit)``, so the
    limit may exceed the carrier count. SNRs are drawn uniformly in dB,
    channel gains are unit-mean exponential, and each block utility is the
    normalized link capacity of its channel.
    """

    K: int
    M: int
    N: int
    ue_cc_cap: Union[int, Sequence[int]]
    system_cc_cap_limit: int
    snr_db_range: Tuple[float, float] = (-10.0, 20.0)
    weight_mode: str = "equal"
    seed: int = 0
    stream_key: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.K < 2 or self.M < 2 or self.N < 2:
            raise ValueError("generated instances need K >= 2, M >= 2, N >= 2")
        caps = self.caps_array()
        if np.any(caps < 1) or np.any(caps > self.M):
            raise ValueError("ue_cc_cap must lie in [1, M]")
        if self.system_cc_cap_limit < 1:
            raise ValueError("system_cc_cap_limit must be >= 1")
        low, high = self.snr_db_range
        if not low < high:
            raise ValueError("snr_db_range must satisfy low < high")
        if self.weight_mode not in ("equal", "uniform_simplex"):
            raise ValueError('weight_mode must be "equal" or "uniform_simplex"')

    def caps_array(self) -> np.ndarray:
        if np.isscalar(self.ue_cc_cap):
            return np.full(self.K, int(self.ue_cc_cap), dtype=int)
        caps = np.asarray(self.ue_cc_cap, dtype=int)
        if caps.shape != (self.K,):
            raise ValueError(f"ue_cc_cap must be scalar or length {self.K}")
        return caps

    @property
    def effective_system_cap(self) -> int:
        return min(self.M, self.system_cc_cap_limit)

    @classmethod
    def from_dict(cls, doc: dict) -> "GenParams":
        doc = dict(doc)
        if "snr_db_range" in doc:
            doc["snr_db_range"] = tuple(doc["snr_db_range"])
        if "stream_key" in doc:
            doc["stream_key"] = tuple(doc["stream_key"])
        return cls(**doc)


def capacity_utilities(gains: np.ndarray, snr_db: np.ndarray, num_rbs: int) -> np.ndarray:
    """Normalized link capacity per block: log2(1 + gain * linear SNR) / N.

    ``gains`` is (K, M, N); ``snr_db`` is (K, M) and shared by all blocks of
    a carrier (or any shape broadcastable against the gains).
    """
    gains = np.asarray(gains, dtype=float)
    snr_db = np.asarray(snr_db, dtype=float)
    if snr_db.ndim == 2 and gains.ndim == 3:
        snr_db = snr_db[:, :, None]
    snr_linear = 10.0 ** (snr_db / 10.0)
    return np.log2(1.0 + gains * snr_linear) / float(num_rbs)


def sample_instance(params: GenParams) -> ProblemInstance:
    """Draw one instance; deterministic for fixed (seed, stream_key).

    Draw order is fixed: channel gains, then per-(user, carrier) SNRs, then
    weights (skipped in equal-weight mode).
    """
    rng = _rng(params.seed, params.stream_key)
    K, M, N = params.K, params.M, params.N
    gains = rng.exponential(1.0, size=(K, M, N))
    snr_db = rng.uniform(params.snr_db_range[0], params.snr_db_range[1], size=(K, M))
    phi = capacity_utilities(gains, snr_db, N)

    if params.weight_mode == "equal":
        weights = np.ones(K)
    else:
        draws = rng.exponential(1.0, size=K)
        weights = draws / draws.sum()

    return ProblemInstance(
        num_ues=K,
        num_ccs=M,
        num_rbs_per_cc=N,
        weights=weights,
        utilities=phi,
        ue_cc_caps=params.caps_array(),
        system_cc_cap=params.effective_system_cap,
    )


@dataclass(frozen=True)
class SweepConfig:
    """One Monte-Carlo experiment: algorithms x grid x trials.

    The grid is the cartesian product of ``m_grid`` and ``mk_grid`` (each
    defaulting to the template's single value), walked M-major. Trial t of
    grid point g draws its instance from stream (base_seed, g, t); all
    algorithms see the same instance.
    """

    algorithms: Tuple[str, ...]
    gen: GenParams
    trials: int
    base_seed: int
    m_grid: Optional[Tuple[int, ...]] = None
    mk_grid: Optional[Tuple[int, ...]] = None
    sgpa: SgpaConfig = field(default_factory=SgpaConfig)
    oracle_budget: OracleBudget = field(default_factory=OracleBudget)
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        for name in self.algorithms:
            if name not in SWEEP_ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}; pick from {SWEEP_ALGORITHMS}")

    def grid_points(self) -> List[Tuple[int, int, int]]:
        ms = tuple(self.m_grid) if self.m_grid else (self.gen.M,)
        base_caps = self.gen.caps_array()
        if self.mk_grid:
            mks = tuple(self.mk_grid)
        else:
            mks = (int(base_caps[0]),)
        points = []
        index = 0
        for m in ms:
            for mk in mks:
                points.append((index, int(m), int(mk)))
                index += 1
        return points

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        doc["algorithms"] = tuple(doc["algorithms"])
        doc["gen"] = GenParams.from_dict(doc["gen"])
        if doc.get("m_grid") is not None:
            doc["m_grid"] = tuple(doc["m_grid"])
        if doc.get("mk_grid") is not None:
            doc["mk_grid"] = tuple(doc["mk_grid"])
        if "sgpa" in doc:
            doc["sgpa"] = SgpaConfig.from_dict(doc["sgpa"])
        if "oracle_budget" in doc:
            doc["oracle_budget"] = OracleBudget(int(doc["oracle_budget"]))
        return cls(**doc)

    @classmethod
    def from_json_file(cls, path) -> "SweepConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ResultRow:
    algorithm: str
    M: int
    Mk: int
    M0: int
    trials: int
    mean_wsu: float
    stderr_wsu: float
    mean_solve_seconds: float
    skipped: bool = False
    skip_reason: str = ""


def _run_trial(args) -> dict:
    """One grid trial: sample the instance once, run every algorithm on it."""
    config, grid_index, m, mk, trial_index = args
    params = replace(
        config.gen,
        M=m,
        ue_cc_cap=mk,
        seed=config.base_seed,
        stream_key=(grid_index, trial_index),
    )
    instance = sample_instance(params)
    out = {}
    for algorithm in config.algorithms:
        if algorithm == "sgpa":
            start = time.perf_counter()
            result = solve(instance, config.sgpa)
            elapsed = time.perf_counter() - start
            wsu = result.wsu
        elif algorithm == "heuristic":
            start = time.perf_counter()
            allocation = heuristic_solve(instance)
            elapsed = time.perf_counter() - start
            wsu = evaluate_wsu(instance, allocation)
        elif algorithm == "greedy":
            start = time.perf_counter()
            greedy = greedy_unconstrained(instance)
            elapsed = time.perf_counter() - start
            wsu = evaluate_wsu(instance, greedy.allocation)
        elif algorithm == "oracle":
            start = time.perf_counter()
            _, wsu = brute_force_oracle(instance, config.oracle_budget)
            elapsed = time.perf_counter() - start
        else:  # pragma: no cover - guarded by SweepConfig validation
            raise ValueError(algorithm)
        out[algorithm] = (wsu, elapsed)
    return out


def run_sweep(config: SweepConfig) -> List[ResultRow]:
    """Run the sweep and aggregate one row per (grid point, algorithm).

    Deterministic apart from the timing column. A grid point whose exhaustive
    search would exceed the budget gets its oracle row marked skipped (the
    other algorithms still run).
    """
    rows: List[ResultRow] = []
    for grid_index, m, mk in config.grid_points():
        caps = np.full(config.gen.K, mk)
        m0 = min(m, config.gen.system_cc_cap_limit)

        algorithms = list(config.algorithms)
        skipped_rows = []
        if "oracle" in algorithms:
            required = oracle_enumeration_count(m, caps, m0)
            if required > config.oracle_budget.max_enumerations:
                algorithms.remove("oracle")
                skipped_rows.append(
                    ResultRow(
                        algorithm="oracle",
                        M=m,
                        Mk=mk,
                        M0=m0,
                        trials=0,
                        mean_wsu=float("nan"),
                        stderr_wsu=float("nan"),
                        mean_solve_seconds=float("nan"),
                        skipped=True,
                        skip_reason=(
                            f"needs {required} enumerations, budget "
                            f"{config.oracle_budget.max_enumerations}"
                        ),
                    )
                )

        trial_config = replace(config, algorithms=tuple(algorithms))
        tasks = [
            (trial_config, grid_index, m, mk, trial_index)
            for trial_index in range(config.trials)
        ]
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                trial_results = list(pool.map(_run_trial, tasks, chunksize=8))
        else:
            trial_results = [_run_trial(task) for task in tasks]

        for algorithm in algorithms:
            wsus = np.array([res[algorithm][0] for res in trial_results])
            times = np.array([res[algorithm][1] for res in trial_results])
            stderr = float(wsus.std(ddof=1) / np.sqrt(len(wsus))) if len(wsus) > 1 else 0.0
            rows.append(
                ResultRow(
                    algorithm=algorithm,
                    M=m,
                    Mk=mk,
                    M0=m0,
                    trials=config.trials,
                    mean_wsu=float(wsus.mean()),
                    stderr_wsu=stderr,
                    mean_solve_seconds=float(times.mean()),
                )
            )
        rows.extend(skipped_rows)
    return rows


def write_results_csv(rows: Sequence[ResultRow], path) -> None:
    """Fixed-schema CSV; skipped rows keep their key columns, numeric cells empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            if row.skipped:
                writer.writerow([row.algorithm, row.M, row.Mk, row.M0, row.trials, "", "", ""])
            else:
                writer.writerow(
                    [
                        row.algorithm,
                        row.M,
                        row.Mk,
                        row.M0,
                        row.trials,
                        repr(row.mean_wsu),
                        repr(row.stderr_wsu),
                        repr(row.mean_solve_seconds),
                    ]
                )


def write_metadata(config: SweepConfig, rows: Sequence[ResultRow], path) -> None:
    """Sidecar JSON: seed, generator identity, package version, skipped rows."""
    doc = {
        "base_seed": config.base_seed,
        "generator": GENERATOR_NAME,
        "version": __version__,
        "algorithms": list(config.algorithms),
        "trials": config.trials,
        "skipped": [
            {"algorithm": r.algorithm, "M": r.M, "Mk": r.Mk, "reason": r.skip_reason}
            for r in rows
            if r.skipped
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def fig1_experiment(
    M: int,
    M_k: int,
    iterations: int,
    seed: int,
    min_rate_ratio: float = 1.25,
    snap_tolerance: float = 1e-9,
    zero_tolerance: float = 1e-12,
) -> np.ndarray:
    """Carrier-share iteration in isolation, for convergence studies.

    Blocks and activations are pinned to 1, so only one user's carrier-share
    row iterates against a fixed vector of effective per-carrier rates. The
    rates are unit-mean exponential draws sorted descending, so the target
    carriers are always indices 0..M_k-1. Returns the (iterations + 1, M)
    trajectory; row 0 is a random positive initialization summing to M_k.

    The number of iterations needed to resolve the boundary between kept and
    dropped carriers grows like 1 / log(r[M_k-1] / r[M_k]), so draws are
    rejected until that ratio reaches ``min_rate_ratio``; pass 1.0 to accept
    any draw.
    """
    if not M >= M_k >= 1:
        raise ValueError("need M >= M_k >= 1")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    rng = _rng(seed)

    while True:
        rates = np.sort(rng.exponential(1.0, size=M))[::-1]
        if M_k == M or rates[M_k] == 0:
            break
        if rates[M_k - 1] / rates[M_k] >= min_rate_ratio:
            break

    start = capped_simplex_normalize(rng.uniform(0.5, 1.5, size=M), M_k).x
    trajectory = np.empty((iterations + 1, M))
    trajectory[0] = start
    x = start
    for i in range(1, iterations + 1):
        x = capped_simplex_normalize(x * rates, M_k).x.copy()
        x[x >= 1.0 - snap_tolerance] = 1.0
        x[x <= zero_tolerance] = 0.0
        trajectory[i] = x
    return trajectory
