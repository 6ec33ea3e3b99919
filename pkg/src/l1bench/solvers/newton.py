"""Newton-CG on the pseudo-Huber smoothed problem.

The l1 term is replaced by

    psi_mu(x) = sum_i sqrt(mu^2 + x_i^2) - mu

giving a smooth objective whose Newton systems are solved inexactly by
conjugate gradients preconditioned with the inverse Hessian diagonal.

By default the diagonal block of the Hessian is replaced by a primal-dual
estimate.  With a dual variable y in [-1, 1]^n standing in for psi_mu'(x),
the entry for coordinate i is

    (1 - y_i x_i / w_i) / w_i,   w_i = sqrt(mu^2 + x_i^2),

which equals psi_mu''(x_i) when y_i = x_i / w_i.  When a coordinate changes
sign before y catches up, this keeps the curvature large and stops the
Newton step from overshooting.  ``newton="primal"`` uses psi_mu'' itself.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .base import STATUS_CONVERGED, Recorder, resolve

__all__ = [
    "pseudo_huber",
    "pseudo_huber_grad",
    "pseudo_huber_hess_diag",
    "primal_dual_hess_diag",
    "smoothed_objective",
    "grad_smoothed",
    "hessvec_smoothed",
    "pcg_solve",
    "PCGResult",
    "PCGBreakdown",
    "pdncg_run",
]

ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5


class PCGBreakdown(ArithmeticError):
    pass


def pseudo_huber(x, mu):
    x = np.asarray(x, dtype=float)
    root = np.sqrt(mu * mu + x * x)
    # (root - mu) written without cancellation for |x| << mu
    return float(np.sum(x * x / (root + mu)))


def pseudo_huber_grad(x, mu):
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(mu * mu + x * x)


def pseudo_huber_hess_diag(x, mu):
    x = np.asarray(x, dtype=float)
    return mu * mu / (mu * mu + x * x) ** 1.5


def primal_dual_hess_diag(x, y, mu):
    """(1 - y x / w) / w with w = sqrt(mu^2 + x^2); positive whenever |y| <= 1."""
    x = np.asarray(x, dtype=float)
    w = np.sqrt(mu * mu + x * x)
    return (1.0 - y * x / w) / w


def smoothed_objective(inst, x, mu, Ax=None):
    """tau psi_mu(x) + 0.5 ||Ax - b||^2."""
    if Ax is None:
        Ax = inst.op.matvec(x)
    r = Ax - inst.b
    return inst.tau * pseudo_huber(x, mu) + 0.5 * float(r @ r)


def grad_smoothed(inst, x, mu, Ax=None):
    x = np.asarray(x, dtype=float)
    if Ax is None:
        Ax = inst.op.matvec(x)
    return inst.tau * pseudo_huber_grad(x, mu) + inst.op.rmatvec(Ax - inst.b)


def hessvec_smoothed(inst, x, mu, v):
    """(tau diag(psi'') + A^T A) v using two operator products."""
    v = np.asarray(v, dtype=float)
    return inst.tau * pseudo_huber_hess_diag(x, mu) * v + inst.op.rmatvec(inst.op.matvec(v))


class PCGResult(NamedTuple):
    step: np.ndarray
    iterations: int
    residuals: list
    converged: bool
    negative_curvature: bool


def pcg_solve(hessvec, rhs, precond, eta=0.1, max_iters=1000, callback=None):
    """Solve H s = rhs to relative residual ``eta`` with a diagonal preconditioner.

    ``precond`` holds the entries of M^{-1}.  Returns the iterate with the
    smallest residual seen if ``max_iters`` is reached.  On nonpositive
    curvature the current iterate is returned with ``negative_curvature``
    set.  ``callback(s, r)``, if given, sees every iterate and its residual.
    """
    rhs = np.asarray(rhs, dtype=float)
    precond = np.asarray(precond, dtype=float)
    s = np.zeros_like(rhs)
    r = rhs.copy()
    rnorm0 = float(np.linalg.norm(r))
    residuals = [rnorm0]
    if rnorm0 == 0.0:
        return PCGResult(s, 0, residuals, True, False)
    z = precond * r
    p = z.copy()
    rz = float(r @ z)
    best, best_norm = s.copy(), rnorm0
    for it in range(1, max_iters + 1):
        Hp = hessvec(p)
        pHp = float(p @ Hp)
        if not np.isfinite(pHp):
            raise PCGBreakdown(f"non-finite curvature at PCG iteration {it}")
        if pHp <= 0.0:
            return PCGResult(s, it - 1, residuals, False, True)
        alpha = rz / pHp
        s += alpha * p
        r -= alpha * Hp
        rnorm = float(np.linalg.norm(r))
        residuals.append(rnorm)
        if callback is not None:
            callback(s, r)
        if not np.isfinite(rnorm):
            raise PCGBreakdown(f"non-finite residual at PCG iteration {it}")
        if rnorm <= eta * rnorm0:
            return PCGResult(s, it, residuals, True, False)
        if rnorm < best_norm:
            best, best_norm = s.copy(), rnorm
        z = precond * r
        rz_new = float(r @ z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    return PCGResult(best, max_iters, residuals, False, False)


def pdncg_run(inst, cfg=None, x0=None):
    """Newton-CG with Armijo backtracking on the smoothed objective.

    The trace records the unsmoothed objective after every Newton step.
    Stops when the target objective is reached, when the smoothed gradient
    norm falls below ``cfg.grad_tol`` (default ``1e-8 max(1, ||A^T b||)``),
    or on a budget.  If the line search exhausts ``cfg.ls_max_backtracks``
    the last trial point is accepted.
    """
    cfg, tau, max_steps = resolve(inst, cfg, "pdncg")
    op, b, mu = inst.op, inst.b, cfg.mu
    primal_dual = cfg.newton == "primal-dual"
    rec = Recorder("pdncg", cfg, max_steps)
    n = op.shape[1]

    if x0 is None:
        x = np.zeros(n)
        r = -b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = op.matvec(x) - b
        rec.matvecs += 1
    y = pseudo_huber_grad(x, mu)

    gram_diag = np.asarray(op.diag_gram(), dtype=float)
    pcg_cap = cfg.pcg_max_iters if cfg.pcg_max_iters is not None else n

    def hessvec(v, hdiag):
        rec.matvecs += 2
        return hdiag * v + op.rmatvec(op.matvec(v))

    obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
    rec.record(0, obj, x)
    status = rec.stop_reason(0, obj)
    grad_tol = cfg.grad_tol
    pcg_total = 0
    ls_total = 0
    k = 0
    while status is None:
        grad = tau * pseudo_huber_grad(x, mu) + op.rmatvec(r)
        rec.matvecs += 1
        gnorm = float(np.linalg.norm(grad))
        if grad_tol is None:
            # at x = 0 the smooth part of the gradient is -A^T b
            atb = gnorm if x0 is None else float(np.linalg.norm(op.rmatvec(b)))
            grad_tol = 1e-8 * max(1.0, atb)
        if gnorm <= grad_tol:
            status = STATUS_CONVERGED
            break
        k += 1
        if primal_dual:
            curv = primal_dual_hess_diag(x, y, mu)
        else:
            curv = pseudo_huber_hess_diag(x, mu)
        hdiag = tau * curv
        precond = 1.0 / (hdiag + gram_diag)
        res = pcg_solve(lambda v: hessvec(v, hdiag), -grad, precond, cfg.eta, pcg_cap)
        d = res.step
        slope = float(grad @ d)
        if not slope < 0:
            d = -precond * grad
            slope = float(grad @ d)
        pcg_total += res.iterations
        Ad = op.matvec(d)
        rec.matvecs += 1

        f0 = tau * pseudo_huber(x, mu) + 0.5 * (r @ r)
        alpha = 1.0
        for j in range(cfg.ls_max_backtracks + 1):
            xt = x + alpha * d
            rt = r + alpha * Ad
            ft = tau * pseudo_huber(xt, mu) + 0.5 * (rt @ rt)
            if ft <= f0 + ARMIJO_C * alpha * slope:
                break
            if j == cfg.ls_max_backtracks:
                break
            alpha *= ARMIJO_SHRINK
        ls_total += j
        if primal_dual:
            # linearized dual update along the full Newton step, projected onto the box
            w = np.sqrt(mu * mu + x * x)
            y = np.clip(x / w + curv * d, -1.0, 1.0)
        x, r = xt, rt
        obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
        status = rec.stop_reason(k, obj)
        rec.record(k, obj, x, res.iterations)

    return rec.finish(status, x, iterations=k, newton_steps=k, pcg_iterations=pcg_total,
                      backtracks=ls_total)
