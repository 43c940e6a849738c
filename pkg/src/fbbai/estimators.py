"""Parameter estimation from exploration data: least squares and GLM fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EstimationFailureError, InvalidAllocationError
from .instances import IDENTITY, MeanFunction

COND_LIMIT = 1e12
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class RegressionData:
    """Stacked exploration data: one row of ``xs`` and entry of ``ys`` per pull."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 2 or ys.ndim != 1 or xs.shape[0] != ys.shape[0]:
            raise InvalidAllocationError("xs must be (n, d) and ys (n,) with matching n")
        if xs.shape[0] == 0:
            raise InvalidAllocationError("regression data must be nonempty")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]


@dataclass(frozen=True)
class ParameterEstimate:
    """Fitted parameter with the information matrix it was computed from.

    ``covariance`` holds V = sum_j x_j x_j', the unnormalized sample
    information matrix; downstream error-bound evaluation reads it directly.
    """

    theta_hat: np.ndarray
    covariance: np.ndarray
    converged: bool = True
    iterations: int = 0


def _information_matrix(xs: np.ndarray) -> np.ndarray:
    return xs.T @ xs


def least_squares(data: RegressionData) -> ParameterEstimate:
    """Ordinary least squares through the normal equations.

    Solves V theta = X'y by a symmetric positive-definite solve (never an
    explicit inverse), with one step of iterative refinement.  A condition
    number of V at or above 1e12 counts as non-invertible.

    Raises
    ------
    InvalidAllocationError
        If V is singular or too ill-conditioned to certify the solution.
    """
    V = _information_matrix(data.xs)
    b = data.xs.T @ data.ys
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise InvalidAllocationError(
            f"information matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    try:
        chol = np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise InvalidAllocationError("information matrix is not positive definite") from exc

    def spd_solve(rhs: np.ndarray) -> np.ndarray:
        z = np.linalg.solve(chol, rhs)
        return np.linalg.solve(chol.T, z)

    theta = spd_solve(b)
    theta = theta + spd_solve(b - V @ theta)  # one refinement step
    residual = np.linalg.norm(V @ theta - b)
    if residual > RESIDUAL_RTOL * max(np.linalg.norm(b), 1e-300):
        raise InvalidAllocationError(
            f"normal-equation residual {residual:.3e} too large; data near-singular")
    return ParameterEstimate(theta_hat=theta, covariance=V, converged=True, iterations=1)


def irls_glm(data: RegressionData, mean_fn: MeanFunction, tol: float = 1e-8,
             max_iter: int = 100, ridge: float = 1e-10) -> ParameterEstimate:
    """Maximum quasi-likelihood fit for a monotone mean function.

    Newton/IRLS iterations drive the score sum_j (y_j - h(x_j' theta)) x_j
    to zero, halving the step while the score norm fails to decrease.  The
    ridge stabilizes each inner solve only; it is not part of the objective.

    Returns ``converged=False`` with the best iterate if ``max_iter`` is
    reached, which is the expected outcome on separable Bernoulli data.

    Raises
    ------
    EstimationFailureError
        If 30 halvings cannot produce any decrease of the score norm.
    """
    xs, ys = data.xs, data.ys
    d = data.dim
    theta = np.zeros(d)

    def score(t: np.ndarray) -> np.ndarray:
        return xs.T @ (ys - mean_fn.value(xs @ t))

    s = score(theta)
    merit = float(np.linalg.norm(s))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if merit <= tol:
            return ParameterEstimate(theta_hat=theta,
                                     covariance=_information_matrix(xs),
                                     converged=True, iterations=iterations - 1)
        weights = np.asarray(mean_fn.derivative(xs @ theta), dtype=float)
        J = xs.T @ (xs * weights[:, None]) + ridge * np.eye(d)
        try:
            step = np.linalg.solve(J, s)
        except np.linalg.LinAlgError as exc:
            raise EstimationFailureError("singular IRLS system") from exc
        lam = 1.0
        improved = False
        for _ in range(31):
            cand = theta + lam * step
            cand_s = score(cand)
            cand_merit = float(np.linalg.norm(cand_s))
            if cand_merit < merit:
                improved = True
                break
            lam *= 0.5
        if not improved:
            raise EstimationFailureError(
                f"IRLS diverged: score norm {merit:.3e} not reducible after 30 halvings")
        theta, s, merit = cand, cand_s, cand_merit
    converged = merit <= tol
    return ParameterEstimate(theta_hat=theta, covariance=_information_matrix(xs),
                             converged=converged, iterations=iterations)


def mean_estimates(estimate: ParameterEstimate, arms: np.ndarray,
                   mean_fn: Optional[MeanFunction] = None) -> np.ndarray:
    """Estimated mean reward for each arm row under the fitted parameter."""
    z = np.asarray(arms, dtype=float) @ estimate.theta_hat
    if mean_fn is None or mean_fn.name == IDENTITY.name:
        return z
    return np.asarray(mean_fn.value(z), dtype=float)
