"""Error-probability upper bounds for budgeted successive elimination.

All logarithms here are base eta.  Two forms exist per reward model: a
closed form assuming each stage used a certified G-optimal allocation,
and a general form taking realized per-stage design norms.  Every bound
is clipped into [0, 1]; a zero noise variance gives zero error.

For the GLM bounds the gap that enters is the gap between linear
predictors, not between transformed means, and c_min is a lower bound on
the mean-function derivative near the true parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import UndefinedBoundError
from .gse import RunResult
from .instances import BanditInstance

DEFAULT_PROBES = 100_000


@dataclass(frozen=True)
class BoundInputs:
    """Quantities the bounds consume.

    Attributes
    ----------
    K, d:
        Number of arms and feature dimension.
    eta:
        Elimination rate; also the log base.
    sigma2:
        Noise variance proxy (sub-Gaussian parameter squared).
    delta_min:
        Smallest positive mean gap; for GLM bounds, the gap between
        linear predictors.
    budget:
        Total pulls; required by the G-optimal forms.
    c_min:
        Lower bound on the mean-function derivative; 1 for linear.
    norm_terms:
        Realized per-stage design norms; required by the general forms.
    """

    K: int
    d: int
    eta: float
    sigma2: float
    delta_min: float
    budget: Optional[int] = None
    c_min: float = 1.0
    norm_terms: Optional[tuple[float, ...]] = None


def _check_common(inputs: BoundInputs) -> None:
    if inputs.K < 2:
        raise UndefinedBoundError("need at least two arms")
    if not inputs.eta > 1.0:
        raise UndefinedBoundError("eta must exceed 1")
    if inputs.d < 1:
        raise UndefinedBoundError("dimension must be positive")
    if not inputs.delta_min > 0.0:
        raise UndefinedBoundError("bound needs a unique best arm (positive gap)")
    if inputs.sigma2 < 0.0 or not math.isfinite(inputs.sigma2):
        raise UndefinedBoundError("noise variance must be finite and nonnegative")


def _check_budget(inputs: BoundInputs) -> int:
    if inputs.budget is None or inputs.budget < 1:
        raise UndefinedBoundError("G-optimal bound needs a positive budget")
    return inputs.budget


def _check_norms(inputs: BoundInputs) -> float:
    terms = inputs.norm_terms
    if not terms:
        raise UndefinedBoundError("general bound needs per-stage norm terms")
    worst = max(terms)
    if not (math.isfinite(worst) and worst > 0.0):
        raise UndefinedBoundError("norm terms must be finite and positive")
    return worst


def _check_cmin(inputs: BoundInputs) -> float:
    if not (inputs.c_min > 0.0 and math.isfinite(inputs.c_min)):
        raise UndefinedBoundError("c_min must be positive and finite")
    return inputs.c_min


def _clip(value: float) -> float:
    return float(min(1.0, max(0.0, value)))


def _log_eta(x: float, eta: float) -> float:
    return math.log(x) / math.log(eta)


def bound_linear_gopt(inputs: BoundInputs) -> float:
    """Error bound for linear rewards with G-optimal stage allocations."""
    _check_common(inputs)
    B = _check_budget(inputs)
    if inputs.sigma2 == 0.0:
        return 0.0
    lgk = _log_eta(inputs.K, inputs.eta)
    expo = -B * inputs.delta_min ** 2 / (4.0 * inputs.sigma2 * inputs.d * lgk)
    return _clip(2.0 * inputs.eta * lgk * math.exp(expo))


def bound_linear_general(inputs: BoundInputs) -> float:
    """Error bound for linear rewards from realized design norms.

    ``norm_terms`` must hold, per stage, the largest squared V_t-inverse
    norm of any active arm's feature difference from the best arm.
    """
    _check_common(inputs)
    worst = _check_norms(inputs)
    if inputs.sigma2 == 0.0:
        return 0.0
    lgk = _log_eta(inputs.K, inputs.eta)
    expo = -inputs.delta_min ** 2 / (4.0 * inputs.sigma2 * worst)
    return _clip(2.0 * inputs.eta * lgk * math.exp(expo))


def bound_glm_gopt(inputs: BoundInputs) -> float:
    """Error bound for GLM rewards with G-optimal stage allocations."""
    _check_common(inputs)
    B = _check_budget(inputs)
    c = _check_cmin(inputs)
    if inputs.sigma2 == 0.0:
        return 0.0
    lgk = _log_eta(inputs.K, inputs.eta)
    expo = -B * inputs.delta_min ** 2 * c ** 2 / (
        8.0 * inputs.sigma2 * inputs.d * lgk)
    return _clip(2.0 * inputs.eta * lgk * math.exp(expo))


def bound_glm_general(inputs: BoundInputs) -> float:
    """Error bound for GLM rewards from realized design norms.

    ``norm_terms`` must hold, per stage, the largest squared V_t-inverse
    norm of any active arm's feature vector.
    """
    _check_common(inputs)
    worst = _check_norms(inputs)
    c = _check_cmin(inputs)
    if inputs.sigma2 == 0.0:
        return 0.0
    lgk = _log_eta(inputs.K, inputs.eta)
    expo = -inputs.delta_min ** 2 * c ** 2 / (8.0 * inputs.sigma2 * worst)
    return _clip(2.0 * inputs.eta * lgk * math.exp(expo))


def oracle_c_min(instance: BanditInstance, radius: float = 0.5,
                 n_probes: int = DEFAULT_PROBES,
                 rng: Optional[np.random.Generator] = None) -> float:
    """Smallest mean-function derivative near the true parameter.

    Probes the sphere of the given radius around theta_star (plus the
    center itself) and minimizes the derivative over arms and probes.
    Linear instances return exactly 1.
    """
    if instance.model == "linear":
        return 1.0
    if radius < 0.0:
        raise UndefinedBoundError("probe radius must be nonnegative")
    if rng is None:
        rng = np.random.default_rng(0)
    dirs = rng.standard_normal((n_probes, instance.dim))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0.0] = 1.0
    thetas = instance.theta_star + radius * (dirs / norms[:, None])
    thetas = np.vstack([thetas, instance.theta_star])
    zs = instance.features @ thetas.T
    return float(np.min(instance.mean_fn.derivative(zs)))


def stage_norm_terms(instance: BanditInstance, result: RunResult,
                     kind: str = "difference") -> tuple[float, ...]:
    """Per-stage realized design norms from a finished run's traces.

    kind "difference" gives max_i ||x_i - x_best||^2 in the V_t-inverse
    norm over the stage's active arms; kind "feature" gives
    max_i ||x_i||^2.  Stages are evaluated in the projected coordinates
    they actually sampled in.  The difference form is only defined while
    the best arm is still active.
    """
    if kind not in ("difference", "feature"):
        raise ValueError(f"unknown norm kind {kind!r}")
    best = instance.best_arm
    terms: list[float] = []
    for trace in result.traces:
        X = trace.arms.projected
        V = (X * trace.counts[:, None]).T @ X
        try:
            cho = scipy.linalg.cho_factor(V, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise UndefinedBoundError(
                f"stage {trace.stage} design matrix is singular") from exc
        if kind == "difference":
            if best not in trace.arms.original_ids:
                raise UndefinedBoundError(
                    f"best arm eliminated before stage {trace.stage}")
            rows = X - X[trace.arms.original_ids.index(best)]
        else:
            rows = X
        sol = scipy.linalg.cho_solve(cho, rows.T)
        terms.append(float(np.max(np.einsum("ij,ji->i", rows, sol))))
    return tuple(terms)
