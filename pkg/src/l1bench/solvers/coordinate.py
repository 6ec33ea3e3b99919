"""Serial randomized coordinate descent with the PCDM step model.

Coordinate i is updated by minimizing

    tau |y| + g_i (y - x_i) + beta L_i / 2 (y - x_i)^2,   g_i = A_i^T (Ax - b)

with L_i = (A^T A)_ii and beta = 1 + (omega - 1)(varpi - 1)/(n - 1), where
varpi is the modeled number of processors and omega the largest number of
nonzeros in a row of A.  The residual Ax - b is kept up to date through
column access, so one epoch of n updates costs about two products with A.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .base import Recorder, resolve

__all__ = ["cdm_run", "cdm_beta", "partial_separability"]

RESYNC_EPOCHS = 50


@njit(cache=True)
def _epoch(indptr, indices, data, x, r, coords, step, thresh):
    for i in coords:
        if step[i] == 0.0:
            continue
        lo = indptr[i]
        hi = indptr[i + 1]
        g = 0.0
        for p in range(lo, hi):
            g += data[p] * r[indices[p]]
        xi = x[i]
        v = xi - g * step[i]
        t = thresh[i]
        if v > t:
            new = v - t
        elif v < -t:
            new = v + t
        else:
            new = 0.0
        delta = new - xi
        if delta != 0.0:
            x[i] = new
            for p in range(lo, hi):
                r[indices[p]] += delta * data[p]


_warm = False


def _warmup():
    # compile (or load from cache) outside the timed region
    global _warm
    if not _warm:
        z = np.zeros(1)
        _epoch(np.array([0, 1], np.int64), np.zeros(1, np.int64), np.ones(1), z.copy(), z.copy(),
               np.zeros(1, np.int64), np.ones(1), z.copy())
        _warm = True


def cdm_beta(omega, processors, n):
    """beta = 1 + (omega - 1)(varpi - 1)/(n - 1)."""
    if n <= 1:
        return 1.0
    return 1.0 + (omega - 1) * (processors - 1) / (n - 1)


def partial_separability(op):
    """Largest number of nonzeros in any row of A."""
    csr = op.csc().tocsr()
    counts = np.diff(csr.indptr)
    return int(counts.max()) if counts.size else 1


def cdm_run(inst, cfg=None, x0=None):
    cfg, tau, max_epochs = resolve(inst, cfg, "cdm")
    _warmup()
    op, b = inst.op, inst.b
    rec = Recorder("cdm", cfg, max_epochs)
    m, n = op.shape

    A = op.csc()
    indptr = A.indptr.astype(np.int64)
    indices = A.indices.astype(np.int64)
    data = A.data.astype(float)

    L = np.asarray(op.diag_gram(), dtype=float)
    omega = cfg.omega if cfg.omega is not None else partial_separability(op)
    beta = cdm_beta(omega, cfg.processors, n)
    bL = beta * L
    # zero columns are skipped
    step = np.divide(1.0, bL, out=np.zeros(n), where=bL > 0)
    thresh = tau * step

    if x0 is None:
        x = np.zeros(n)
        r = -b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = op.matvec(x) - b
        rec.matvecs += 1

    rng = np.random.default_rng(cfg.seed)
    obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
    rec.record(0, obj, x)
    status = rec.stop_reason(0, obj)
    epoch = 0
    while status is None:
        epoch += 1
        if cfg.sampling == "permutation":
            coords = rng.permutation(n)
        else:
            coords = rng.integers(0, n, size=n)
        _epoch(indptr, indices, data, x, r, coords, step, thresh)
        rec.matvecs += 2
        if epoch % RESYNC_EPOCHS == 0:
            r = op.matvec(x) - b
            rec.matvecs += 1
        obj = tau * np.abs(x).sum() + 0.5 * (r @ r)
        status = rec.stop_reason(epoch, obj)
        rec.record(epoch, obj, x)

    return rec.finish(status, x, iterations=epoch, beta=beta, omega=omega)
