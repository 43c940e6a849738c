"""Optimal exploration designs on a finite arm set.

The central object is a weight vector pi on the simplex over arms.  With
V(pi) = sum_i pi_i x_i x_i', the worst-case normalized variance is

    g(pi) = max_i x_i' V(pi)^{-1} x_i,

whose minimum over the simplex equals d_t, the span dimension of the arms
(the Kiefer-Wolfowitz equivalence).  A design is certified when
g(pi) <= d_t (1 + tol).

The Frank-Wolfe solver selects the vertex of the simplex minimizing the
criterion linearization, then steps toward it with the closed-form exact
line search of the determinant criterion,

    gamma* = (u_j / d_t - 1) / (u_j - 1),   u_j = x_j' V^{-1} x_j.

Minimizing g directly along single-vertex segments stalls: at kink points
of the max, every coordinate direction increases g at the resolution any
line search can certify, so step sizes collapse to zero far from the
optimum.  The determinant-ascent step has no such kinks, shares its vertex
selection and its optimum with g (equivalence theorem again), and makes the
g-certificate reachable; g itself is tracked for stopping and reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetTooSmallError, SingularDesignError

SUPPORT_TOL = 1e-9
CERT_SLACK = 1e-9  # absolute slack so exact-rational optima certify in floats
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Design:
    """A simplex weight vector with its certification summary."""

    weights: np.ndarray
    g_value: float
    iterations_used: int
    certified: bool

    @property
    def support(self) -> np.ndarray:
        """Indices of arms carrying more than the support threshold."""
        return np.flatnonzero(self.weights > SUPPORT_TOL)


@dataclass(frozen=True)
class Allocation:
    """Integer pull counts aligned with the arm set they were built from."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


# ---------------------------------------------------------------------------
# Criterion evaluation
# ---------------------------------------------------------------------------


def _info_matrix(weights: np.ndarray, arms: np.ndarray) -> np.ndarray:
    return arms.T @ (arms * weights[:, None])


def _all_norms(weights: np.ndarray, arms: np.ndarray) -> np.ndarray:
    """x_i' V(pi)^{-1} x_i for every arm; raises on singular V."""
    V = _info_matrix(weights, arms)
    try:
        chol = np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError("design information matrix is singular") from exc
    half = np.linalg.solve(chol, arms.T)
    return np.einsum("ij,ij->j", half, half)


def g_value_and_argmax(weights: np.ndarray, arms: np.ndarray) -> tuple[float, int]:
    """Worst normalized variance and the arm attaining it (lowest index on ties)."""
    weights = np.asarray(weights, dtype=float)
    arms = np.asarray(arms, dtype=float)
    norms = _all_norms(weights, arms)
    idx = int(np.argmax(norms))
    return float(norms[idx]), idx


def g_gradient(weights: np.ndarray, arms: np.ndarray) -> np.ndarray:
    """Partial derivatives of g where the max is attained by a single arm.

    With x_max the maximizing arm, the j-th component is
    -(x_j' V(pi)^{-1} x_max)^2.
    """
    weights = np.asarray(weights, dtype=float)
    arms = np.asarray(arms, dtype=float)
    V = _info_matrix(weights, arms)
    norms = _all_norms(weights, arms)
    imax = int(np.argmax(norms))
    vx = np.linalg.solve(V, arms[imax])
    return -((arms @ vx) ** 2)


def d_opt_gradient(weights: np.ndarray, arms: np.ndarray) -> np.ndarray:
    """Partial derivatives of the negated determinant criterion -det V(pi).

    The i-th component is -det(V) x_i' V^{-1} x_i.  Intended for moderate
    dimensions; the determinant underflows for large d.
    """
    weights = np.asarray(weights, dtype=float)
    arms = np.asarray(arms, dtype=float)
    V = _info_matrix(weights, arms)
    norms = _all_norms(weights, arms)
    sign, logdet = np.linalg.slogdet(V)
    return -(sign * np.exp(logdet)) * norms


# ---------------------------------------------------------------------------
# Line search along a simplex segment
# ---------------------------------------------------------------------------


def line_search_g(pi: np.ndarray, direction: np.ndarray, arms: np.ndarray,
                  abs_tol: float = 1e-6, scan_points: int = 200) -> float:
    """Step size in [0, 1] minimizing g(pi + gamma * direction).

    A coarse scan over ``scan_points`` evenly spaced steps guards against
    local traps, then golden-section search refines the best bracket down
    to ``abs_tol``.  The returned step never evaluates worse than either
    endpoint because gamma = 0 is always among the candidates.
    """
    pi = np.asarray(pi, dtype=float)
    direction = np.asarray(direction, dtype=float)
    arms = np.asarray(arms, dtype=float)

    def value(gamma: float) -> float:
        w = pi + gamma * direction
        if np.any(w < -1e-12):
            return math.inf
        try:
            return float(_all_norms(np.maximum(w, 0.0), arms).max())
        except SingularDesignError:
            return math.inf

    grid = np.linspace(0.0, 1.0, scan_points)
    vals = np.array([value(g) for g in grid])
    k = int(np.argmin(vals))
    best_f, best_g = vals[k], grid[k]
    if not np.isfinite(best_f):
        return 0.0
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, scan_points - 1)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = value(c), value(d)
    while b - a > abs_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = value(d)
        for f, g in ((fc, c), (fd, d)):
            if f < best_f:
                best_f, best_g = f, g
    return float(best_g)


# ---------------------------------------------------------------------------
# Frank-Wolfe solver
# ---------------------------------------------------------------------------


def default_iteration_cap(K: int, d: int, tol: float) -> int:
    """Iteration budget covering certification at the requested tolerance.

    Scales like d times (log log of the problem size plus 1/tol), the known
    iteration complexity of determinant-ascent vertex methods; the constant
    carries several-fold slack over measured worst cases on random arm sets.
    """
    return max(1, math.ceil(10.0 * d * (math.log(math.log(K + d + 3.0)) + 0.5 / tol)))


def _fw_solve(arms: np.ndarray, iterations: int | None, tol: float,
              criterion: str) -> Design:
    arms = np.asarray(arms, dtype=float)
    if arms.ndim != 2 or arms.shape[0] == 0:
        raise SingularDesignError("arms must be a nonempty 2-d array")
    if tol <= 0.0:
        raise SingularDesignError("tolerance must be positive")
    K, d = arms.shape
    cap = default_iteration_cap(K, d, tol) if iterations is None else int(iterations)
    target = d * (1.0 + tol) + CERT_SLACK
    refresh_every = 100

    pi = np.full(K, 1.0 / K)
    norms = _all_norms(pi, arms)  # raises if the arms do not span R^d
    V = _info_matrix(pi, arms)
    Vinv = np.linalg.inv(V)
    best_g, best_pi = float(norms.max()), pi.copy()

    it = 0
    while True:
        g_now = float(norms.max())
        if g_now <= target:
            # confirm on freshly computed values before certifying
            norms = _all_norms(pi, arms)
            g_now = float(norms.max())
            if g_now <= target:
                return Design(weights=pi, g_value=g_now, iterations_used=it,
                              certified=True)
            Vinv = np.linalg.inv(_info_matrix(pi, arms))
        if g_now < best_g:
            best_g, best_pi = g_now, pi.copy()
        if it >= cap:
            break
        if it > 0 and it % refresh_every == 0:
            norms = _all_norms(pi, arms)
            Vinv = np.linalg.inv(_info_matrix(pi, arms))

        if criterion == "g":
            imax = int(np.argmax(norms))
            grad = -((arms @ (Vinv @ arms[imax])) ** 2)
        else:
            # determinant linearization; the positive det factor cannot change
            # the argmin, so it is dropped to avoid underflow at larger d
            grad = -norms
        j = int(np.argmin(grad))
        uj = float(norms[j])
        if uj <= d:
            # the linearization found no vertex above average; pick the worst
            j = int(np.argmax(norms))
            uj = float(norms[j])
            if uj <= d:
                break
        gamma = (uj / d - 1.0) / (uj - 1.0)
        if gamma >= 1.0 - 1e-12:
            pi = np.zeros(K)
            pi[j] = 1.0
            norms = _all_norms(pi, arms)
            Vinv = np.linalg.inv(_info_matrix(pi, arms))
            it += 1
            continue
        vx = Vinv @ arms[j]
        w = arms @ vx
        beta = gamma / (1.0 - gamma)
        f = beta / (1.0 + beta * uj)
        norms = (norms - f * w * w) / (1.0 - gamma)
        Vinv = (Vinv - f * np.outer(vx, vx)) / (1.0 - gamma)
        pi = pi * (1.0 - gamma)
        pi[j] += gamma
        pi /= pi.sum()
        it += 1

    final_g, _ = g_value_and_argmax(pi, arms)
    if final_g < best_g:
        best_g, best_pi = final_g, pi
    return Design(weights=best_pi, g_value=best_g, iterations_used=it,
                  certified=bool(best_g <= target))


def fw_g_optimal(arms: np.ndarray, iterations: int | None = None,
                 tol: float = 0.01) -> Design:
    """Frank-Wolfe G-optimal design, certified against g <= d_t (1 + tol).

    Starts from uniform weights; each round picks the simplex vertex that
    minimizes the g-linearization and takes the closed-form determinant
    step toward it.  Returns the best iterate flagged non-certified if the
    iteration cap is exhausted first.
    """
    return _fw_solve(arms, iterations, tol, criterion="g")


def fw_d_optimal(arms: np.ndarray, iterations: int | None = None,
                 tol: float = 0.01) -> Design:
    """Determinant-criterion variant sharing the G-optimal loop and certificate."""
    return _fw_solve(arms, iterations, tol, criterion="d")


def kw_certificate(design: Design, arms: np.ndarray, eps: float = 0.01) -> bool:
    """True when g(design) <= d_t (1 + eps); singular designs certify as False."""
    arms = np.asarray(arms, dtype=float)
    try:
        g, _ = g_value_and_argmax(design.weights, arms)
    except SingularDesignError:
        return False
    return bool(g <= arms.shape[1] * (1.0 + eps) + CERT_SLACK)


# ---------------------------------------------------------------------------
# Rounding a design to integer pulls
# ---------------------------------------------------------------------------


def round_allocation(n: int, design: Design, arms: np.ndarray) -> Allocation:
    """Efficient apportionment of n pulls across the design support.

    Support arms start at ceil((n - p/2) pi_i) with p the support size;
    counts are then decremented (arm maximizing count/weight, kept >= 1) or
    incremented (arm minimizing count/weight) until the total hits n, ties
    to the lowest index.  Every support arm keeps at least one pull.

    Raises
    ------
    BudgetTooSmallError
        If n is below the support size; callers may drop weights under 1/n
        and retry once (see ``allocate_budget``).
    """
    n = int(n)
    weights = np.asarray(design.weights, dtype=float)
    support = np.flatnonzero(weights > SUPPORT_TOL)
    p = support.size
    if p == 0:
        raise BudgetTooSmallError("design has empty support")
    if n < p:
        raise BudgetTooSmallError(
            f"budget {n} cannot give every one of {p} support arms a pull")
    counts = np.zeros(weights.shape[0], dtype=int)
    counts[support] = np.ceil((n - p / 2.0) * weights[support]).astype(int)
    counts[support] = np.maximum(counts[support], 1)
    ratio = np.full(weights.shape[0], np.nan)
    ratio[support] = counts[support] / weights[support]
    while counts.sum() > n:
        candidates = np.where(counts >= 2, ratio, -np.inf)
        i = int(np.argmax(candidates))
        counts[i] -= 1
        ratio[i] = counts[i] / weights[i]
    while counts.sum() < n:
        candidates = np.where(np.isnan(ratio), np.inf, ratio)
        i = int(np.argmin(candidates))
        counts[i] += 1
        ratio[i] = counts[i] / weights[i]
    return Allocation(counts=counts)


def allocate_budget(n: int, design: Design, arms: np.ndarray) -> Allocation:
    """Round with one retry: drop weights below 1/n, renormalize, round again."""
    try:
        return round_allocation(n, design, arms)
    except BudgetTooSmallError:
        weights = np.where(design.weights >= 1.0 / max(n, 1), design.weights, 0.0)
        total = weights.sum()
        if total <= 0.0:
            raise
        trimmed = Design(weights=weights / total, g_value=design.g_value,
                         iterations_used=design.iterations_used, certified=False)
        return round_allocation(n, trimmed, arms)
