"""Proximal gradient methods: ISTA and FISTA."""
from __future__ import annotations

import math

import numpy as np

from .base import Recorder, resolve, soft_threshold

__all__ = ["ista_run", "fista_run", "proximal_gradient_run"]


def _should_sample(k):
    return k <= 1000 or k % 10 == 0


def proximal_gradient_run(inst, cfg=None, accelerated=True, x0=None):
    """Minimize tau ||x||_1 + 0.5 ||Ax - b||^2 by (accelerated) proximal gradient.

    Products with A are tracked for both the iterate and the extrapolated
    point, so each iteration costs one A^T product plus one A product per
    step-size trial.  With ``cfg.lipschitz == "exact"`` the step is
    ``1 / lambda_max(A^T A)``; otherwise L is found by doubling until the
    quadratic upper model holds, and each iteration first tries
    ``L * cfg.ls_decrease``.
    """
    name = "fista" if accelerated else "ista"
    cfg, tau, max_iters = resolve(inst, cfg, name)
    op, b = inst.op, inst.b
    rec = Recorder(name, cfg, max_iters)

    n = op.shape[1]
    if x0 is None:
        x = np.zeros(n)
        Ax = np.zeros(op.shape[0])
    else:
        x = np.array(x0, dtype=float)
        Ax = op.matvec(x)
        rec.matvecs += 1
    y, Ay = x, Ax
    t = 1.0

    exact = cfg.lipschitz == "exact"
    if exact:
        L = op.lipschitz()
    else:
        L = cfg.lipschitz_init if cfg.lipschitz_init is not None else 1.0
    if L <= 0:
        L = 1.0

    r = Ax - b
    obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
    rec.record(0, obj, x)
    status = rec.stop_reason(0, obj)
    backtracks_total = 0
    k = 0
    while status is None:
        k += 1
        ry = Ay - b
        grad = op.rmatvec(ry)
        rec.matvecs += 1
        fy = 0.5 * (ry @ ry)
        if not exact:
            L *= cfg.ls_decrease
        backtracks = 0
        while True:
            x_new = soft_threshold(y - grad / L, tau / L)
            Ax_new = op.matvec(x_new)
            rec.matvecs += 1
            if exact:
                break
            d = x_new - y
            r_new = Ax_new - b
            f_new = 0.5 * (r_new @ r_new)
            bound = fy + grad @ d + 0.5 * L * (d @ d)
            if f_new <= bound + 1e-12 * abs(bound) or backtracks >= 60:
                break
            L *= 2.0
            backtracks += 1
        backtracks_total += backtracks

        if accelerated:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            w = (t - 1.0) / t_new
            y = x_new + w * (x_new - x)
            Ay = Ax_new + w * (Ax_new - Ax)
            t = t_new
        else:
            y, Ay = x_new, Ax_new
        x, Ax = x_new, Ax_new

        r = Ax - b
        obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
        status = rec.stop_reason(k, obj)
        if status is not None or _should_sample(k):
            rec.record(k, obj, x, backtracks)
        elif not np.isfinite(obj):
            rec.record(k, obj, x, backtracks)

    return rec.finish(status, x, iterations=k, backtracks=backtracks_total, lipschitz=float(L))


def ista_run(inst, cfg=None, x0=None):
    return proximal_gradient_run(inst, cfg, accelerated=False, x0=x0)


def fista_run(inst, cfg=None, x0=None):
    return proximal_gradient_run(inst, cfg, accelerated=True, x0=x0)
