"""Damped Gauss-Newton (Levenberg-Marquardt) least-squares driver.

Shared by the notch refinement and the temperature-model fits.  Contract:
the accepted cost sequence is monotone non-increasing; convergence is
declared when the relative parameter step falls below ``step_tol`` or the
relative cost change below ``cost_tol``; Jacobians are central finite
differences with a per-parameter relative step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitConvergenceError

MAX_ITERATIONS = 500
STEP_TOL = 1e-10
COST_TOL = 1e-12
FD_REL_STEP = 1e-6


@dataclass
class LMResult:
    params: np.ndarray
    cost: float                      # sum of squared residuals
    n_iter: int
    converged: bool
    trace: list = field(default_factory=list)   # (iteration, cost) pairs
    jacobian: np.ndarray | None = None
    covariance: np.ndarray | None = None         # s^2 (J^T J)^-1, or None


def fd_jacobian(residual, params, scales, rel_step=FD_REL_STEP):
    """Central-difference Jacobian of ``residual`` at ``params``.

    The step for parameter j is ``rel_step * max(|p_j|, scales[j])`` so
    parameters passing through zero keep a sensible step size.
    """
    p = np.asarray(params, dtype=float)
    r0 = np.asarray(residual(p), dtype=float)
    jac = np.empty((r0.size, p.size))
    for j in range(p.size):
        step = rel_step * max(abs(p[j]), scales[j])
        up = p.copy()
        dn = p.copy()
        up[j] += step
        dn[j] -= step
        jac[:, j] = (np.asarray(residual(up)) - np.asarray(residual(dn))) / (2.0 * step)
    return jac


def least_squares_lm(residual, p0, *, scales=None, weights=None,
                     max_iter=MAX_ITERATIONS, step_tol=STEP_TOL,
                     cost_tol=COST_TOL, rel_step=FD_REL_STEP):
    """Minimize ``sum(residual(p)**2)`` over p.

    Parameters
    ----------
    residual : callable returning a 1-d float array.
    p0 : initial parameter vector.
    scales : characteristic magnitudes per parameter (defaults to
        ``max(|p0|, 1)``); used for finite-difference steps and the
        relative-step convergence test.
    weights : optional per-point multipliers applied to the residuals
        (pass 1/sigma for inverse-variance weighting).

    Raises
    ------
    FitConvergenceError
        when ``max_iter`` is exhausted, damping cannot produce a descent
        step, or the residual turns non-finite.  The exception carries the
        iteration trace and the best parameters seen.
    """
    p = np.asarray(p0, dtype=float).copy()
    if scales is None:
        scales = np.maximum(np.abs(p), 1.0)
    else:
        scales = np.asarray(scales, dtype=float)
        if np.any(scales <= 0):
            raise ValueError("scales must be positive")

    if weights is not None:
        w = np.asarray(weights, dtype=float)
        base_residual = residual
        residual = lambda q: w * np.asarray(base_residual(q), dtype=float)

    r = np.asarray(residual(p), dtype=float)
    if not np.all(np.isfinite(r)):
        raise FitConvergenceError("residual not finite at starting point",
                                  trace=[], best_params=p)
    cost = float(r @ r)
    trace = [(0, cost)]
    lam = 1e-3
    converged = False
    n_iter = 0
    jac = None

    for n_iter in range(1, max_iter + 1):
        jac = fd_jacobian(residual, p, scales, rel_step)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        diag = np.diag(jtj).copy()
        # Fletcher scaling keeps damping invariant under parameter rescaling
        diag[diag <= 0] = 1.0

        accepted = False
        for _ in range(60):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = p + delta
            r_new = np.asarray(residual(p_new), dtype=float)
            if np.all(np.isfinite(r_new)):
                cost_new = float(r_new @ r_new)
                if cost_new <= cost:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            raise FitConvergenceError(
                f"no descent step found at iteration {n_iter} (cost={cost:.6g})",
                trace=trace, best_params=p)

        rel_param_step = float(np.max(np.abs(delta) / np.maximum(np.abs(p), scales)))
        rel_cost_drop = (cost - cost_new) / cost if cost > 0 else 0.0
        p, r, cost = p_new, r_new, cost_new
        trace.append((n_iter, cost))
        lam = max(lam / 3.0, 1e-14)
        if rel_param_step < step_tol or rel_cost_drop < cost_tol:
            converged = True
            break

    if not converged:
        raise FitConvergenceError(
            f"not converged after {max_iter} iterations (cost={cost:.6g})",
            trace=trace, best_params=p)

    jac = fd_jacobian(residual, p, scales, rel_step)
    cov = None
    dof = r.size - p.size
    if dof > 0:
        try:
            cov = float(cost / dof) * np.linalg.inv(jac.T @ jac)
        except np.linalg.LinAlgError:
            cov = None
    return LMResult(params=p, cost=cost, n_iter=n_iter, converged=True,
                    trace=trace, jacobian=jac, covariance=cov)
