"""Per-class maximum-margin vectors via the dual quadratic program,
KKT certification, and the closed-form reprogramming failure bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, HypothesisViolated, Infeasible
from .numerics import singular_extremes

KKT_TOL = 1e-8

_MAX_ITERS = 2_000_000
_CHECK_EVERY = 64
# The step schedule must decay slowly: the base step 1/lambda_max(G)
# already guarantees monotone convergence, so decay exists only to damp
# degenerate instances.
_DECAY = 1e-7


@dataclass(frozen=True)
class MarginSolution:
    """Solution of: minimise ||v||^2 / 2 subject to v.x_i >= 1 for all i.

    ``vector`` is the minimiser, ``multipliers`` the nonnegative dual
    variables with vector = sum_i multipliers[i] * x_i (exactly, by
    construction), ``margin_slacks`` the values v.x_i - 1, and
    ``kkt_residual`` the largest of the three KKT residuals at exit.
    """

    vector: np.ndarray
    multipliers: np.ndarray
    margin_slacks: np.ndarray
    kkt_residual: float


def kkt_residuals(
    sol: MarginSolution, points: np.ndarray
) -> tuple[float, float, float]:
    """The three KKT residuals (feasibility, stationarity, complementarity).

    feasibility    = max(0, max_i (1 - v.x_i))
    stationarity   = || v - sum_i lambda_i x_i ||
    complementarity = max_i | lambda_i (v.x_i - 1) |
    """
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    margins = x @ sol.vector
    feasibility = float(max(0.0, np.max(1.0 - margins)))
    stationarity = float(np.linalg.norm(sol.vector - x.T @ sol.multipliers))
    complementarity = float(np.max(np.abs(sol.multipliers * (margins - 1.0))))
    return feasibility, stationarity, complementarity


def max_margin_vector(
    points: np.ndarray, tol: float = KKT_TOL, start: np.ndarray | None = None
) -> MarginSolution:
    """Minimum-norm vector with margin at least 1 on every given point.

    Solves the dual QP (minimise lambda.G.lambda/2 - 1.lambda over
    lambda >= 0, G the Gram matrix) by projected gradient descent with a
    fixed diminishing step schedule, stopping once all KKT residuals are
    at or below ``tol``.  The primal vector is recovered as X^T lambda,
    which makes the stationarity residual zero by construction.  The
    minimiser is unique, so any nonnegative ``start`` reaches the same
    vector.

    Raises
    ------
    Infeasible
        If the dual iterates blow up (no feasible primal exists).
    ConvergenceFailure
        If the iteration budget runs out first.
    """
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if x.shape[0] < 1:
        raise ValueError("points must be nonempty")
    n = x.shape[0]
    gram = x @ x.T
    _, s_max = singular_extremes(x)
    if s_max == 0.0:
        raise ValueError("points must be nonzero")
    base_step = 1.0 / (s_max * s_max)

    if start is None:
        lam = np.zeros(n)
    else:
        lam = np.maximum(np.asarray(start, dtype=np.float64).copy(), 0.0)
        if lam.shape != (n,):
            raise ValueError("start must hold one multiplier per point")
    for it in range(_MAX_ITERS):
        grad = gram @ lam - 1.0
        if it % _CHECK_EVERY == 0:
            # grad_i equals the margin slack v.x_i - 1 at the current iterate.
            feasibility = max(0.0, float(np.max(-grad)))
            complementarity = float(np.max(np.abs(lam * grad)))
            if feasibility <= tol and complementarity <= tol:
                v = x.T @ lam
                slacks = x @ v - 1.0
                resid = max(kkt_residuals(
                    MarginSolution(v, lam, slacks, 0.0), x))
                return MarginSolution(
                    vector=v,
                    multipliers=lam,
                    margin_slacks=slacks,
                    kkt_residual=resid,
                )
            if _dual_unbounded(gram, lam, s_max):
                raise Infeasible("dual iterates unbounded; no feasible margin vector")
        step = base_step / (1.0 + it * _DECAY)
        lam = np.maximum(lam - step * grad, 0.0)
    raise ConvergenceFailure(
        f"projected gradient did not reach KKT residual {tol:g} in {_MAX_ITERS} iterations"
    )


def _dual_unbounded(gram: np.ndarray, lam: np.ndarray, s_max: float) -> bool:
    """Certify an unbounded dual: a large iterate running along a direction
    that is (numerically) in the Gram null space with positive coefficient
    sum, i.e. a recession direction of strictly decreasing dual objective."""
    norm = float(np.linalg.norm(lam))
    if norm < 1e4:
        return False
    u = lam / norm
    return float(u @ (gram @ u)) < 1e-8 * s_max * s_max and float(np.sum(u)) > 0.0


def failure_probability_bound(
    v_pos: np.ndarray,
    v_neg: np.ndarray,
    direction: np.ndarray,
    d: int,
    bias: float,
    m: int,
) -> float:
    """Upper bound on reprogrammed accuracy of a direction-converged network.

    For a hypercube data model whose direction lies in the half-space
    against m * (v_pos - v_neg), the probability of correct reprogrammed
    classification is at most

        1/2 + 1/2 * exp(-2 d bias^2 cos^2 angle(v_pos - v_neg, direction)),

    for every program offset.  The hypothesis m * cos(angle) < 0 is
    enforced; outside it the bound is not claimed.
    """
    delta = np.asarray(v_pos, dtype=np.float64) - np.asarray(v_neg, dtype=np.float64)
    phi = np.asarray(direction, dtype=np.float64)
    denom = np.linalg.norm(delta) * np.linalg.norm(phi)
    if denom == 0.0:
        raise ValueError("v_pos - v_neg and direction must be nonzero")
    cos = float(delta @ phi) / float(denom)
    if m * cos >= 0.0:
        raise HypothesisViolated(
            f"m * cos(angle) = {m * cos:.6g} must be negative for the bound to apply"
        )
    return 0.5 + 0.5 * math.exp(-2.0 * d * bias * bias * cos * cos)
