"""Generalized successive elimination under a fixed sampling budget.

A run splits its budget B evenly over s = ceil(log_eta K) stages.  Each
stage projects the active arms onto their span, spends the stage budget
according to the configured allocation strategy, fits the reward model,
and keeps the top ceil(|active| / eta) arms by estimated mean.  The single
survivor is the recommendation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import (Allocation, Design, allocate_budget, fw_d_optimal,
                     fw_g_optimal)
from .errors import ConfigurationError, EstimationFailureError, InvalidAllocationError
from .estimators import (ParameterEstimate, RegressionData, irls_glm,
                         least_squares, mean_estimates)
from .instances import (LOGISTIC, BanditInstance, ProjectedArmSet,
                        project_to_span, sample_rewards)

STRATEGIES = ("uniform", "fw-g", "fw-d", "static")
MODELS = ("linear", "logistic")


@dataclass(frozen=True)
class GseConfig:
    """Run parameters: budget, elimination rate, exploration and fit choices."""

    budget: int
    eta: float = 2.0
    strategy: str = "fw-g"
    model: str = "linear"
    forced_exploration: bool = False
    spend_remainder: bool = False
    fw_tol: float = 0.01
    fw_iterations: Optional[int] = None
    rank_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ConfigurationError("budget must be a positive integer")
        if not self.eta > 1.0:
            raise ConfigurationError("eta must exceed 1")
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(
                f"strategy {self.strategy!r} not one of {STRATEGIES}")
        if self.model not in MODELS:
            raise ConfigurationError(f"model {self.model!r} not one of {MODELS}")


@dataclass(frozen=True)
class StageSchedule:
    """Stage count, even per-stage budget, and the active-set size path."""

    stages: int
    per_stage_budget: int
    sizes: tuple[int, ...]  # sizes[0] = K, sizes[-1] = 1


@dataclass(frozen=True)
class StageTrace:
    """Everything one stage did: who was active, pulls, estimates, survivors."""

    stage: int
    arms: ProjectedArmSet
    counts: np.ndarray
    mu_hat: np.ndarray
    survivors: tuple[int, ...]
    estimator_converged: bool
    estimator_iterations: int
    used_fallback: bool
    design: Optional[Design]


@dataclass(frozen=True)
class RunResult:
    """Outcome of one elimination run."""

    recommended: int
    success: bool
    traces: tuple[StageTrace, ...]
    total_pulls: int


class DesignCache:
    """Memo for projections and exploration designs keyed by active-id sets.

    Projection and design solving are deterministic functions of the active
    arm subset, so replications over a fixed instance can share the work.
    """

    def __init__(self) -> None:
        self._projections: dict = {}
        self._designs: dict = {}

    def projection(self, instance: BanditInstance, ids: tuple[int, ...],
                   rank_tol: float) -> ProjectedArmSet:
        key = (ids, rank_tol)
        hit = self._projections.get(key)
        if hit is None:
            hit = project_to_span(instance.features[list(ids)], ids=ids,
                                  rank_tol=rank_tol)
            self._projections[key] = hit
        return hit

    def design(self, active: ProjectedArmSet, strategy: str, tol: float,
               iterations: Optional[int]) -> Design:
        key = (active.original_ids, strategy, tol, iterations)
        hit = self._designs.get(key)
        if hit is None:
            solver = fw_g_optimal if strategy == "fw-g" else fw_d_optimal
            hit = solver(active.projected, iterations=iterations, tol=tol)
            self._designs[key] = hit
        return hit


# ---------------------------------------------------------------------------
# Stage schedule
# ---------------------------------------------------------------------------


def _ceil_div(m: int, eta: float) -> int:
    if float(eta).is_integer():
        e = int(eta)
        return (m + e - 1) // e
    # guard keeps exact ratios from rounding up twice in floats
    return math.ceil(m / eta - 1e-12)


def stage_schedule(K: int, eta: float, budget: int) -> StageSchedule:
    """Stage count s, per-stage budget floor(B / s), and size path K -> 1.

    Sizes follow the elimination recursion size_t = ceil(size_{t-1} / eta);
    for integer eta the step count equals ceil(log_eta K) exactly.

    Raises
    ------
    ConfigurationError
        If the recursion cannot reach one arm (eta below 2 stalls at two
        arms) or the budget gives some stage no pulls.
    """
    if K < 2:
        raise ConfigurationError("need at least two arms")
    if not eta > 1.0:
        raise ConfigurationError("eta must exceed 1")
    sizes = [K]
    while sizes[-1] > 1:
        nxt = _ceil_div(sizes[-1], eta)
        if nxt >= sizes[-1]:
            raise ConfigurationError(
                f"eta={eta} cannot reduce {sizes[-1]} arms; use eta >= 2")
        sizes.append(nxt)
    s = len(sizes) - 1
    n = budget // s
    if n < 1:
        raise ConfigurationError(f"budget {budget} gives {s} stages no pulls")
    return StageSchedule(stages=s, per_stage_budget=n, sizes=tuple(sizes))


# ---------------------------------------------------------------------------
# Stage exploration
# ---------------------------------------------------------------------------


def _spanning_prefix(projected: np.ndarray) -> list[int]:
    """Greedy lowest-index subset of rows spanning the projected space."""
    d = projected.shape[1]
    basis: list[np.ndarray] = []
    chosen: list[int] = []
    for i, row in enumerate(projected):
        r = row.copy()
        for q in basis:
            r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm > 1e-9 * max(np.linalg.norm(row), 1.0):
            basis.append(r / norm)
            chosen.append(i)
            if len(chosen) == d:
                return chosen
    raise InvalidAllocationError("active arms do not span their projection")


def explore(instance: BanditInstance, active: ProjectedArmSet, n: int,
            config: GseConfig, rng: np.random.Generator,
            cache: Optional[DesignCache] = None,
            ) -> tuple[Allocation, RegressionData, Optional[Design]]:
    """Spend ``n`` pulls on the active arms and return the stacked data.

    Pulls are ordered by active-arm index, each arm's pulls contiguous, so
    a run is reproducible from (instance, config, seed) alone.  The rows of
    the returned data are projected features; rewards come from the
    original arms.
    """
    m, d_t = active.n_arms, active.dim
    if n < d_t:
        raise InvalidAllocationError(f"stage budget {n} below span dimension {d_t}")
    counts = np.zeros(m, dtype=int)
    budget = n
    if config.forced_exploration:
        for i in _spanning_prefix(active.projected):
            counts[i] += 1
        budget = n - d_t
    design: Optional[Design] = None
    if config.strategy == "uniform":
        base, rem = divmod(budget, m)
        counts += base
        counts[:rem] += 1  # equal remainders; lowest indices win
    elif budget == 0:
        pass  # forced pulls consumed the whole stage; nothing left to round
    else:
        if cache is not None:
            design = cache.design(active, config.strategy, config.fw_tol,
                                  config.fw_iterations)
        else:
            solver = fw_g_optimal if config.strategy == "fw-g" else fw_d_optimal
            design = solver(active.projected, iterations=config.fw_iterations,
                            tol=config.fw_tol)
        counts += allocate_budget(budget, design, active.projected).counts
    pull_ids = np.repeat(np.asarray(active.original_ids), counts)
    xs = np.repeat(active.projected, counts, axis=0)
    ys = sample_rewards(instance, pull_ids, rng)
    return Allocation(counts=counts), RegressionData(xs=xs, ys=ys), design


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------


def eliminate(active_ids: tuple[int, ...], mu_hat: np.ndarray,
              eta: float) -> tuple[int, ...]:
    """Keep the ceil(m / eta) arms with the highest estimated means.

    Ties rank the lower arm id first; survivors come back in ascending id
    order.
    """
    m = len(active_ids)
    if mu_hat.shape[0] != m:
        raise ValueError("one estimate per active arm required")
    keep = _ceil_div(m, eta)
    ids = np.asarray(active_ids)
    order = np.lexsort((ids, -mu_hat))  # primary: highest mean; then lowest id
    return tuple(sorted(int(i) for i in ids[order[:keep]]))


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def _fit_stage(data: RegressionData, config: GseConfig,
               ) -> tuple[ParameterEstimate, bool]:
    if config.model == "logistic":
        try:
            return irls_glm(data, LOGISTIC), False
        except EstimationFailureError:
            return least_squares(data), True
    return least_squares(data), False


def gse_run(instance: BanditInstance, config: GseConfig,
            rng: np.random.Generator,
            cache: Optional[DesignCache] = None) -> RunResult:
    """Run successive elimination and recommend the single surviving arm."""
    if config.strategy == "static":
        return static_single_stage_run(instance, config, rng, cache)
    if cache is None:
        cache = DesignCache()
    schedule = stage_schedule(instance.n_arms, config.eta, config.budget)
    full_span = cache.projection(instance, tuple(range(instance.n_arms)),
                                 config.rank_tol)
    if schedule.per_stage_budget < full_span.dim:
        raise ConfigurationError(
            f"per-stage budget {schedule.per_stage_budget} cannot span "
            f"dimension {full_span.dim}")
    remainder = config.budget - schedule.stages * schedule.per_stage_budget
    active: tuple[int, ...] = tuple(range(instance.n_arms))
    traces: list[StageTrace] = []
    total = 0
    for t in range(1, schedule.stages + 1):
        n_t = schedule.per_stage_budget
        if config.spend_remainder and t == schedule.stages:
            n_t += remainder
        proj = cache.projection(instance, active, config.rank_tol)
        alloc, data, design = explore(instance, proj, n_t, config, rng, cache)
        estimate, fellback = _fit_stage(data, config)
        mean_fn = LOGISTIC if (config.model == "logistic" and not fellback) else None
        mu_hat = mean_estimates(estimate, proj.projected, mean_fn)
        survivors = eliminate(active, mu_hat, config.eta)
        traces.append(StageTrace(stage=t, arms=proj, counts=alloc.counts,
                                 mu_hat=mu_hat, survivors=survivors,
                                 estimator_converged=estimate.converged,
                                 estimator_iterations=estimate.iterations,
                                 used_fallback=fellback, design=design))
        total += alloc.total
        active = survivors
    recommended = active[0]
    return RunResult(recommended=recommended,
                     success=recommended == instance.best_arm,
                     traces=tuple(traces), total_pulls=total)


def static_single_stage_run(instance: BanditInstance, config: GseConfig,
                            rng: np.random.Generator,
                            cache: Optional[DesignCache] = None) -> RunResult:
    """Single-stage baseline: one G-optimal allocation, one least-squares fit."""
    if cache is None:
        cache = DesignCache()
    active = cache.projection(instance, tuple(range(instance.n_arms)),
                              config.rank_tol)
    if config.budget < active.dim:
        raise ConfigurationError(
            f"budget {config.budget} cannot span dimension {active.dim}")
    design = cache.design(active, "fw-g", config.fw_tol, config.fw_iterations)
    alloc = allocate_budget(config.budget, design, active.projected)
    pull_ids = np.repeat(np.asarray(active.original_ids), alloc.counts)
    xs = np.repeat(active.projected, alloc.counts, axis=0)
    ys = sample_rewards(instance, pull_ids, rng)
    estimate = least_squares(RegressionData(xs=xs, ys=ys))
    mu_hat = mean_estimates(estimate, active.projected)
    recommended = int(active.original_ids[int(np.argmax(mu_hat))])
    trace = StageTrace(stage=1, arms=active, counts=alloc.counts, mu_hat=mu_hat,
                       survivors=(recommended,), estimator_converged=True,
                       estimator_iterations=estimate.iterations,
                       used_fallback=False, design=design)
    return RunResult(recommended=recommended,
                     success=recommended == instance.best_arm,
                     traces=(trace,), total_pulls=alloc.total)
