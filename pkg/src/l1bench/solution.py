"""Planted sparse solutions and conditioning measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator import OperatorSpec, Spectrum, apply_stages

__all__ = [
    "SparseSolution",
    "ConditioningReport",
    "osgen",
    "osgen3",
    "fixed_value_solution",
    "kappa_AtA",
    "kappa_rho",
    "project_rho",
    "conditioning_report",
]


@dataclass(frozen=True, eq=False)
class SparseSolution:
    """A vector in R^n stored by its support and nonzero values."""

    n: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if support.shape != values.shape:
            raise ValueError("support and values differ in length")
        order = np.argsort(support, kind="stable")
        support, values = support[order], values[order]
        if support.size and (support[0] < 0 or support[-1] >= self.n):
            raise ValueError("support index out of range")
        if np.unique(support).size != support.size:
            raise ValueError("duplicate support index")
        if np.any(values == 0):
            raise ValueError("stored values must be nonzero")
        support.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def s(self) -> int:
        return int(self.support.size)

    def to_dense(self):
        x = np.zeros(self.n)
        x[self.support] = self.values
        return x

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=float).ravel()
        idx = np.flatnonzero(x)
        return cls(x.size, idx, x[idx])

    @classmethod
    def zeros(cls, n):
        return cls(n, np.empty(0, dtype=np.int64), np.empty(0))


@dataclass(frozen=True)
class ConditioningReport:
    kappa_AtA: float
    rho: float
    kappa_rho: float

    def to_dict(self):
        return {"kappa_AtA": self.kappa_AtA, "rho": self.rho, "kappa_rho": self.kappa_rho}


def osgen(n, s, gamma, rng=None):
    """Random support of size ``s`` with values uniform on [-gamma, gamma]."""
    if not 0 <= s <= n:
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    rng = np.random.default_rng(rng)
    support = np.sort(rng.choice(n, size=s, replace=False))
    values = rng.uniform(-gamma, gamma, size=s)
    while np.any(values == 0):
        zero = values == 0
        values[zero] = rng.uniform(-gamma, gamma, size=int(zero.sum()))
    return SparseSolution(n, support, values)


def osgen3(spectrum: Spectrum, right_stages, s1, s2, gamma):
    """Keep the s1 smallest and s2 largest entries of G * gamma (Sigma^T Sigma)^{-1} 1.

    The unconstrained minimizer of ``||G^T x - gamma (Sigma^T Sigma)^{-1} 1||``
    is exact because G is orthonormal.  Magnitude ties are broken by index.
    """
    n = spectrum.n
    if s1 < 0 or s2 < 0:
        raise ValueError("s1 and s2 must be nonnegative")
    if s1 + s2 > n:
        raise ValueError(f"s1 + s2 = {s1 + s2} exceeds n = {n}")
    if spectrum.is_singular:
        raise ValueError("spectrum contains zeros")
    coeffs = gamma / spectrum.values**2
    x_hat = apply_stages(list(right_stages), coeffs)
    nz = np.flatnonzero(x_hat)
    if nz.size <= s1 + s2:
        keep = nz
    else:
        order = nz[np.argsort(np.abs(x_hat[nz]), kind="stable")]
        keep = np.concatenate([order[:s1], order[order.size - s2 :]]) if s2 else order[:s1]
    return SparseSolution(n, keep, x_hat[keep])


def fixed_value_solution(n, s, values, rng=None):
    """Random support of size ``s`` whose values cycle through ``values`` in equal shares."""
    rng = np.random.default_rng(rng)
    values = np.asarray(values, dtype=float)
    support = np.sort(rng.choice(n, size=s, replace=False))
    reps = np.repeat(values, int(np.ceil(s / values.size)))[:s]
    return SparseSolution(n, support, reps)


def kappa_AtA(spectrum):
    """lambda_max / lambda_min of A^T A, i.e. (max sigma / min sigma)^2."""
    sigma = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    lo = float(np.min(sigma))
    if lo == 0:
        return np.inf
    return float((np.max(sigma) / lo) ** 2)


def project_rho(op: OperatorSpec, v, rho):
    """Project onto eigenvectors of A^T A whose eigenvalue is at least ``rho``."""
    mask = op.sigma**2 >= rho
    if mask.all():
        return np.array(v, dtype=float)
    w = apply_stages(op.right_stages, v, transposed=True)
    w[~mask] = 0.0
    return apply_stages(op.right_stages, w, out=w)


def kappa_rho(x_star, op: OperatorSpec, rho=0.1):
    """||x*|| / ||P_rho x*||, or +inf when the projection vanishes."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = x_star.to_dense() if isinstance(x_star, SparseSolution) else np.asarray(x_star, float)
    norm = np.linalg.norm(x)
    if norm == 0:
        raise ValueError("kappa_rho is undefined for x* = 0")
    proj = np.linalg.norm(project_rho(op, x, rho))
    if proj <= 1e-14 * norm:
        return np.inf
    return float(norm / proj)


def conditioning_report(op: OperatorSpec, x_star, rho=0.1):
    x = x_star.to_dense() if isinstance(x_star, SparseSolution) else np.asarray(x_star)
    kr = kappa_rho(x, op, rho) if np.any(x) else np.nan
    return ConditioningReport(kappa_AtA(op.spectrum), float(rho), kr)
