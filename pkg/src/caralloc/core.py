"""Problem data model for joint carrier / resource-block allocation.

Holds the immutable problem description (per-user weights, per-block
utilities, carrier caps), the weighted-sum-utility objective, feasibility
checking against the hard constraints, and the quantization step that turns
a continuous allocation into a feasible 0/1 one.

Conventions used throughout the package:

* ``K`` users, ``M`` carriers, ``N`` resource blocks per carrier.
* ``alpha[k, m, n]`` -- user k holds block n of carrier m.
* ``beta[k, m]``  -- user k is admitted to carrier m.
* ``gamma[m]``    -- carrier m is active.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "ProblemInstance",
    "RelaxedAllocation",
    "BinaryAllocation",
    "FeasibilityReport",
    "evaluate_wsu",
    "evaluate_relaxed_wsu",
    "check_feasibility",
    "quantize",
    "top_cap_indicator",
]

#: Default lower clamp for strictly positive relaxed values.
DEFAULT_FLOOR = 1e-12


class DimensionMismatchError(ValueError):
    """An allocation does not match the instance dimensions."""


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable description of one allocation problem.

    K users, each with a positive weight ``weights[k]`` and a cap
    ``ue_cc_caps[k]`` on how many carriers it may use; M carriers of N
    blocks each, with at most ``system_cc_cap`` carriers active in total;
    and a nonnegative utility ``utilities[k, m, n]`` earned when user k is
    given block (m, n).

    Instances are deep-copied on construction and their arrays are marked
    read-only, so one instance can be shared freely across workers.
    """

    num_ues: int
    num_ccs: int
    num_rbs_per_cc: int
    weights: np.ndarray
    utilities: np.ndarray
    ue_cc_caps: np.ndarray
    system_cc_cap: int

    def __post_init__(self):
        K = int(self.num_ues)
        M = int(self.num_ccs)
        N = int(self.num_rbs_per_cc)
        if K < 1 or M < 1 or N < 1:
            raise ValueError("dimensions must be positive integers")
        w = np.asarray(self.weights, dtype=float)
        phi = np.asarray(self.utilities, dtype=float)
        caps = np.asarray(self.ue_cc_caps, dtype=int)
        m0 = int(self.system_cc_cap)
        if w.shape != (K,):
            raise ValueError(f"weights must have shape ({K},), got {w.shape}")
        if phi.shape != (K, M, N):
            raise ValueError(f"utilities must have shape ({K}, {M}, {N}), got {phi.shape}")
        if caps.shape != (K,):
            raise ValueError(f"ue_cc_caps must have shape ({K},), got {caps.shape}")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if not np.all(np.isfinite(phi)) or np.any(phi < 0):
            raise ValueError("utilities must be finite and nonnegative")
        if np.any(caps < 1) or np.any(caps > M):
            raise ValueError("every per-user carrier cap must lie in [1, M]")
        if not 1 <= m0 <= M:
            raise ValueError("system carrier cap must lie in [1, M]")
        object.__setattr__(self, "num_ues", K)
        object.__setattr__(self, "num_ccs", M)
        object.__setattr__(self, "num_rbs_per_cc", N)
        object.__setattr__(self, "weights", _frozen_array(w, float))
        object.__setattr__(self, "utilities", _frozen_array(phi, float))
        object.__setattr__(self, "ue_cc_caps", _frozen_array(caps, int))
        object.__setattr__(self, "system_cc_cap", m0)

    @property
    def K(self) -> int:
        return self.num_ues

    @property
    def M(self) -> int:
        return self.num_ccs

    @property
    def N(self) -> int:
        return self.num_rbs_per_cc

    def to_dict(self) -> dict:
        """JSON-ready document: {"K", "M", "N", "weights", "Mk", "M0", "phi"}."""
        return {
            "K": self.num_ues,
            "M": self.num_ccs,
            "N": self.num_rbs_per_cc,
            "weights": self.weights.tolist(),
            "Mk": self.ue_cc_caps.tolist(),
            "M0": self.system_cc_cap,
            "phi": self.utilities.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemInstance":
        try:
            return cls(
                num_ues=int(doc["K"]),
                num_ccs=int(doc["M"]),
                num_rbs_per_cc=int(doc["N"]),
                weights=doc["weights"],
                utilities=doc["phi"],
                ue_cc_caps=doc["Mk"],
                system_cc_cap=int(doc["M0"]),
            )
        except KeyError as exc:
            raise ValueError(f"instance document is missing field {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


@dataclass
class RelaxedAllocation:
    """Continuous-valued allocation iterate.

    Values live in [0, 1]. Strictly positive entries below ``floor`` are
    lifted to ``floor`` so near-underflow survivors are not silently lost;
    exact zeros are kept as-is (they mark entries deliberately removed from
    play by the solver).
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        beta = np.array(self.beta, dtype=float)
        gamma = np.array(self.gamma, dtype=float)
        if alpha.ndim != 3 or beta.ndim != 2 or gamma.ndim != 1:
            raise ValueError("alpha must be 3-D, beta 2-D, gamma 1-D")
        K, M, N = alpha.shape
        if beta.shape != (K, M) or gamma.shape != (M,):
            raise DimensionMismatchError(
                f"inconsistent shapes: alpha {alpha.shape}, beta {beta.shape}, gamma {gamma.shape}"
            )
        if not (self.floor > 0):
            raise ValueError("floor must be positive")
        for name, arr in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            if arr.size and (arr.min() < -1e-9 or arr.max() > 1 + 1e-9):
                raise ValueError(f"{name} values must lie in [0, 1]")
            np.clip(arr, 0.0, 1.0, out=arr)
            tiny = (arr > 0) & (arr < self.floor)
            arr[tiny] = self.floor
        self.alpha, self.beta, self.gamma = alpha, beta, gamma

    def dims(self) -> tuple:
        return self.alpha.shape

    def copy(self) -> "RelaxedAllocation":
        return RelaxedAllocation(self.alpha, self.beta, self.gamma, self.floor)


@dataclass
class BinaryAllocation:
    """A 0/1 allocation (not necessarily feasible; see check_feasibility)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name, raw in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            values = np.asarray(raw)
            if not np.isin(values, (0, 1)).all():
                raise ValueError(f"{name} entries must be 0 or 1")
            arrays[name] = values.astype(np.int8)
        alpha, beta, gamma = arrays["alpha"], arrays["beta"], arrays["gamma"]
        if alpha.ndim != 3 or beta.ndim != 2 or gamma.ndim != 1:
            raise ValueError("alpha must be 3-D, beta 2-D, gamma 1-D")
        K, M, N = alpha.shape
        if beta.shape != (K, M) or gamma.shape != (M,):
            raise DimensionMismatchError(
                f"inconsistent shapes: alpha {alpha.shape}, beta {beta.shape}, gamma {gamma.shape}"
            )
        self.alpha, self.beta, self.gamma = alpha, beta, gamma

    def dims(self) -> tuple:
        return self.alpha.shape

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BinaryAllocation":
        return cls(alpha=doc["alpha"], beta=doc["beta"], gamma=doc["gamma"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BinaryAllocation":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-constraint verdicts with the first violating index of each kind.

    * c1: at most one user per resource block,
    * c2: per-user carrier count within its cap,
    * c3: total active carriers within the system cap,
    * consistency: a held block implies carrier admission and activation.
    """

    c1_ok: bool
    c2_ok: bool
    c3_ok: bool
    consistency_ok: bool
    c1_violation: Optional[tuple] = None  # (m, n)
    c2_violation: Optional[int] = None  # k
    c3_violation: Optional[int] = None  # first active carrier beyond the cap
    consistency_violation: Optional[tuple] = None  # (k, m, n)

    @property
    def ok(self) -> bool:
        return self.c1_ok and self.c2_ok and self.c3_ok and self.consistency_ok

    def to_dict(self) -> dict:
        return {
            "feasible": self.ok,
            "c1_ok": self.c1_ok,
            "c2_ok": self.c2_ok,
            "c3_ok": self.c3_ok,
            "consistency_ok": self.consistency_ok,
            "c1_violation": self.c1_violation,
            "c2_violation": self.c2_violation,
            "c3_violation": self.c3_violation,
            "consistency_violation": self.consistency_violation,
        }


def _require_dims(instance: ProblemInstance, alloc) -> None:
    if alloc.dims() != (instance.num_ues, instance.num_ccs, instance.num_rbs_per_cc):
        raise DimensionMismatchError(
            f"allocation dims {alloc.dims()} do not match instance "
            f"({instance.num_ues}, {instance.num_ccs}, {instance.num_rbs_per_cc})"
        )


def evaluate_wsu(instance: ProblemInstance, alloc: BinaryAllocation) -> float:
    """Weighted sum utility of a 0/1 allocation.

    A block counts only when the whole chain holds: the carrier is active,
    the user is admitted to it, and the user holds the block. Inconsistent
    alpha entries therefore contribute nothing.
    """
    _require_dims(instance, alloc)
    chain = (
        alloc.alpha.astype(float)
        * alloc.beta[:, :, None].astype(float)
        * alloc.gamma[None, :, None].astype(float)
    )
    return float(np.einsum("k,kmn,kmn->", instance.weights, chain, instance.utilities))


def evaluate_relaxed_wsu(instance: ProblemInstance, alloc: RelaxedAllocation) -> float:
    """Weighted sum utility of a continuous allocation (product form)."""
    _require_dims(instance, alloc)
    return float(
        np.einsum(
            "k,m,km,kmn,kmn->",
            instance.weights,
            alloc.gamma,
            alloc.beta,
            alloc.alpha,
            instance.utilities,
        )
    )


def check_feasibility(instance: ProblemInstance, alloc: BinaryAllocation) -> FeasibilityReport:
    """Check the hard constraints; never raises on violation, reports instead."""
    _require_dims(instance, alloc)

    col_load = alloc.alpha.sum(axis=0)  # (M, N)
    c1_bad = np.argwhere(col_load > 1)
    c1_ok = c1_bad.size == 0
    c1_violation = tuple(int(i) for i in c1_bad[0]) if not c1_ok else None

    cc_counts = alloc.beta.sum(axis=1)
    c2_bad = np.flatnonzero(cc_counts > instance.ue_cc_caps)
    c2_ok = c2_bad.size == 0
    c2_violation = int(c2_bad[0]) if not c2_ok else None

    active = np.flatnonzero(alloc.gamma == 1)
    c3_ok = active.size <= instance.system_cc_cap
    c3_violation = int(active[instance.system_cc_cap]) if not c3_ok else None

    broken_chain = (alloc.alpha == 1) & (
        (alloc.beta[:, :, None] == 0) | (alloc.gamma[None, :, None] == 0)
    )
    cons_bad = np.argwhere(broken_chain)
    consistency_ok = cons_bad.size == 0
    consistency_violation = tuple(int(i) for i in cons_bad[0]) if not consistency_ok else None

    return FeasibilityReport(
        c1_ok=c1_ok,
        c2_ok=c2_ok,
        c3_ok=c3_ok,
        consistency_ok=consistency_ok,
        c1_violation=c1_violation,
        c2_violation=c2_violation,
        c3_violation=c3_violation,
        consistency_violation=consistency_violation,
    )


def top_cap_indicator(values: np.ndarray, cap: int, eligible: Optional[np.ndarray] = None) -> np.ndarray:
    """0/1 vector with ones on the ``cap`` largest eligible entries.

    Ties are broken toward the lowest index (stable sort), so the result is
    invariant under any strictly increasing transform of ``values``.
    """
    values = np.asarray(values, dtype=float)
    if eligible is None:
        idx = np.arange(values.size)
    else:
        idx = np.flatnonzero(eligible)
    order = idx[np.argsort(-values[idx], kind="stable")]
    out = np.zeros(values.size, dtype=np.int8)
    out[order[: min(int(cap), idx.size)]] = 1
    return out


def quantize(instance: ProblemInstance, relaxed: RelaxedAllocation) -> BinaryAllocation:
    """Round a continuous allocation to a feasible 0/1 allocation.

    Carriers first (top system-cap activation), then each user's carrier set
    (its top entries among the carriers just activated), then per-block
    winners among the users admitted to that carrier. Every stage only picks
    from what the previous stage kept, so the output satisfies all hard
    constraints by construction. A block on an active carrier with no
    admitted user stays unallocated.
    """
    _require_dims(instance, relaxed)
    K, M, N = relaxed.dims()

    gamma_bin = top_cap_indicator(relaxed.gamma, instance.system_cc_cap)
    active = gamma_bin == 1

    beta_bin = np.zeros((K, M), dtype=np.int8)
    for k in range(K):
        beta_bin[k] = top_cap_indicator(relaxed.beta[k], int(instance.ue_cc_caps[k]), eligible=active)

    alpha_bin = np.zeros((K, M, N), dtype=np.int8)
    for m in np.flatnonzero(active):
        members = beta_bin[:, m] == 1
        if not members.any():
            continue
        candidates = np.where(members[:, None], relaxed.alpha[:, m, :], -1.0)
        winners = np.argmax(candidates, axis=0)  # first max -> lowest user index
        alpha_bin[winners, m, np.arange(N)] = 1

    return BinaryAllocation(alpha_bin, beta_bin, gamma_bin)
