"""Right-hand sides that make a chosen sparse vector the exact minimizer.

For ``f(x) = tau ||x||_1 + 0.5 ||Ax - b||^2`` a point x* is optimal iff
``A^T (A x* - b)`` lies in ``-tau * subdiff ||x*||_1``.  Fixing a subgradient
g and writing ``b = A x* + e`` reduces this to ``A^T e = tau g``.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operator import (
    BlockOperator,
    Operator,
    OperatorSpec,
    PermutedColumnsOperator,
)
from .solution import SparseSolution, conditioning_report

__all__ = [
    "ProblemInstance",
    "CertificateReport",
    "WrongGeneratorError",
    "subgradient_of",
    "igen",
    "igen2",
    "verify_optimality",
    "permute_columns",
    "save_instance",
    "load_instance",
    "operator_to_dict",
    "operator_from_dict",
]

MAGIC = b"L1BENCH-INSTANCE"
FILE_VERSION = 1


class WrongGeneratorError(ValueError):
    pass


@dataclass(eq=False)
class ProblemInstance:
    """An l1-regularized least-squares problem with (optionally) a planted minimizer."""

    tau: float
    op: Operator
    b: np.ndarray
    x_star: SparseSolution | None = None
    noise_norm: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.op.shape[0],):
            raise ValueError("b must have length m")
        if self.x_star is not None and self.x_star.n != self.op.shape[1]:
            raise ValueError("x_star has the wrong dimension")

    @property
    def shape(self):
        return self.op.shape


@dataclass(frozen=True)
class CertificateReport:
    active_residual: float
    inactive_violation: float
    tau: float
    tol: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def subgradient_of(x_star, zero_fill="uniform", rng=None, bound=0.9):
    """A subgradient of ||.||_1 at x*.

    Nonzero entries get their sign; zero entries get ``zero_fill`` when it is
    a number, or a uniform draw on [-bound, bound] for ``"uniform"``.
    """
    x = x_star.to_dense() if isinstance(x_star, SparseSolution) else np.asarray(x_star, float)
    g = np.sign(x)
    zero = x == 0
    if zero_fill == "uniform":
        rng = np.random.default_rng(rng)
        g[zero] = rng.uniform(-bound, bound, size=int(zero.sum()))
    else:
        fill = float(zero_fill)
        if abs(fill) > 1:
            raise ValueError("constant fill must lie in [-1, 1]")
        g[zero] = fill
    return g


def igen(tau, op: OperatorSpec, x_star: SparseSolution, zero_fill="uniform", rng=None):
    """Instance with m >= n: ``b = A x* + tau A (A^T A)^{-1} g``."""
    m, n = op.shape
    if m < n or not isinstance(op, OperatorSpec):
        raise WrongGeneratorError("igen needs an OperatorSpec with m >= n; use igen2 for m < n")
    if x_star.n != n:
        raise ValueError("x_star has the wrong dimension")
    g = subgradient_of(x_star, zero_fill, rng)
    e = tau * op.matvec(op.solve_normal(g))
    b = op.matvec(x_star.to_dense()) + e
    return ProblemInstance(
        float(tau), op, b, x_star, float(np.linalg.norm(e)), meta={"generator": "igen"}
    )


def _draw_xi(rng, size, xi_min):
    out = np.empty(size)
    filled = 0
    while filled < size:
        xi = rng.uniform(-1.0, 1.0, size=size - filled)
        xi = xi[(np.abs(xi) >= xi_min) & (np.abs(xi) < 1.0)]
        out[filled : filled + xi.size] = xi
        filled += xi.size
    return out


def igen2(tau, B: OperatorSpec, N, x_star: SparseSolution, xi=None, zero_fill="uniform",
          rng=None, xi_min=1e-3):
    """Instance with m < n: ``A = [B, N~]`` and ``b = A x* + tau B^{-T} g``.

    ``N`` is either an explicit m x (n - m) array or the integer n - m, in
    which case Gaussian columns are drawn from ``rng``.  Each column of N is
    rescaled so that ``|N~_k^T e| = |xi_k| tau <= tau``.  The support of x*
    must lie in the first m coordinates.
    """
    rng = np.random.default_rng(rng)
    if B.m != B.n:
        raise ValueError("B must be square")
    m = B.m
    if np.isscalar(N):
        N = rng.standard_normal((m, int(N)))
    N = np.array(N, dtype=float)
    if N.ndim != 2 or N.shape[0] != m:
        raise ValueError("N must have m rows")
    k = N.shape[1]
    n = m + k
    if k < 1:
        raise WrongGeneratorError("igen2 needs m < n; use igen for m >= n")
    if x_star.n != n:
        raise ValueError("x_star has the wrong dimension")
    if x_star.s > m or (x_star.s and x_star.support[-1] >= m):
        raise ValueError("support of x* must lie within the first m coordinates")

    x = x_star.to_dense()
    g = subgradient_of(x[:m], zero_fill, rng)
    # B^{-T} g = B (B^T B)^{-1} g
    e = tau * B.matvec(B.solve_normal(g))
    enorm = np.linalg.norm(e)

    if xi is None:
        xi = _draw_xi(rng, k, xi_min)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (k,))
    if np.any(np.abs(xi) > 1):
        raise ValueError("xi must lie in [-1, 1]")

    N_tilde = np.empty_like(N)
    if enorm == 0:
        N_tilde[:] = N
    else:
        for col in range(k):
            v = N[:, col]
            proj = v @ e
            while abs(proj) <= 1e-12 * np.linalg.norm(v) * enorm:
                v = rng.standard_normal(m)
                proj = v @ e
            N_tilde[:, col] = (xi[col] * tau / abs(proj)) * v

    A = BlockOperator(B, N_tilde)
    b = A.matvec(x) + e
    inst = ProblemInstance(float(tau), A, b, x_star, float(enorm), meta={"generator": "igen2"})
    return A, inst


def verify_optimality(inst: ProblemInstance, tol=1e-8):
    """Check ``A^T(A x* - b) in -tau * subdiff ||x*||_1`` to ``tol * tau``."""
    x = inst.x_star.to_dense() if inst.x_star is not None else np.zeros(inst.shape[1])
    r = inst.op.rmatvec(inst.op.matvec(x) - inst.b)
    on = x != 0
    tau = inst.tau
    active = float(np.max(np.abs(r[on] + tau * np.sign(x[on])), initial=0.0))
    inactive = float(np.max(np.maximum(np.abs(r[~on]) - tau, 0.0), initial=0.0))
    passed = bool(active <= tol * tau and inactive <= tol * tau)
    return CertificateReport(active, inactive, float(tau), float(tol), passed)


def permute_columns(inst: ProblemInstance, rng=None):
    """Shuffle the columns of A together with x*, so the support is no longer leading."""
    rng = np.random.default_rng(rng)
    n = inst.shape[1]
    order = rng.permutation(n)
    op = PermutedColumnsOperator(inst.op, order)
    x_star = None
    if inst.x_star is not None:
        x_star = SparseSolution.from_dense(inst.x_star.to_dense()[order])
    return ProblemInstance(inst.tau, op, inst.b.copy(), x_star, inst.noise_norm, dict(inst.meta))


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------


def operator_to_dict(op):
    if isinstance(op, OperatorSpec):
        return {"kind": "spec", **op.to_dict()}
    if isinstance(op, BlockOperator):
        return {"kind": "block", "B": op.B.to_dict(), "N_shape": list(op.N.shape)}
    if isinstance(op, PermutedColumnsOperator):
        return {"kind": "permuted", "base": operator_to_dict(op.base), "order": op.order.tolist()}
    raise TypeError(f"cannot serialize operator of type {type(op).__name__}")


def operator_from_dict(d, N=None):
    kind = d.get("kind", "spec")
    if kind == "spec":
        return OperatorSpec.from_dict(d)
    if kind == "block":
        return BlockOperator(OperatorSpec.from_dict(d["B"]), N)
    if kind == "permuted":
        return PermutedColumnsOperator(operator_from_dict(d["base"], N), d["order"])
    raise ValueError(f"unknown operator kind {kind!r}")


def _block_of(op):
    while isinstance(op, PermutedColumnsOperator):
        op = op.base
    return op.N if isinstance(op, BlockOperator) else None


def save_instance(path, inst: ProblemInstance, rho=0.1):
    """Write a JSON header line followed by little-endian float64/int64 arrays.

    Binary layout after the header: b (m doubles), x* support (s int64),
    x* values (s doubles), and for block operators N~ in column-major order.
    """
    m, n = inst.shape
    xs = inst.x_star if inst.x_star is not None else SparseSolution.zeros(n)
    N = _block_of(inst.op)
    header = {
        "version": FILE_VERSION,
        "m": m,
        "n": n,
        "tau": inst.tau,
        "noise_norm": inst.noise_norm,
        "seeds": inst.meta.get("seeds", {}),
        "meta": {k: v for k, v in inst.meta.items() if k != "seeds"},
        "s": xs.s,
        "has_x_star": inst.x_star is not None,
        "N_shape": list(N.shape) if N is not None else None,
        "operator": operator_to_dict(inst.op),
    }
    if isinstance(inst.op, OperatorSpec) and inst.x_star is not None and inst.x_star.s:
        header["conditioning"] = conditioning_report(inst.op, inst.x_star, rho).to_dict()
    buf = io.BytesIO()
    buf.write(MAGIC + b"\n")
    buf.write(json.dumps(header, default=_json_default).encode() + b"\n")
    buf.write(inst.b.astype("<f8").tobytes())
    buf.write(xs.support.astype("<i8").tobytes())
    buf.write(xs.values.astype("<f8").tobytes())
    if N is not None:
        buf.write(np.asfortranarray(N).astype("<f8").tobytes(order="F"))
    Path(path).write_bytes(buf.getvalue())
    return header


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def read_header(path):
    with open(path, "rb") as fh:
        if fh.readline().rstrip(b"\n") != MAGIC:
            raise ValueError(f"{path} is not an instance file")
        return json.loads(fh.readline())


def load_instance(path):
    data = Path(path).read_bytes()
    first = data.index(b"\n")
    if data[:first] != MAGIC:
        raise ValueError(f"{path} is not an instance file")
    second = data.index(b"\n", first + 1)
    header = json.loads(data[first + 1 : second])
    if header["version"] != FILE_VERSION:
        raise ValueError(f"unsupported instance file version {header['version']}")
    m, n, s = header["m"], header["n"], header["s"]
    off = second + 1
    b = np.frombuffer(data, dtype="<f8", count=m, offset=off).astype(float)
    off += 8 * m
    idx = np.frombuffer(data, dtype="<i8", count=s, offset=off).astype(np.int64)
    off += 8 * s
    vals = np.frombuffer(data, dtype="<f8", count=s, offset=off).astype(float)
    off += 8 * s
    N = None
    if header["N_shape"] is not None:
        r, c = header["N_shape"]
        N = np.frombuffer(data, dtype="<f8", count=r * c, offset=off).reshape((r, c), order="F")
        N = N.astype(float)
    op = operator_from_dict(header["operator"], N)
    x_star = SparseSolution(n, idx, vals) if header["has_x_star"] else None
    meta = dict(header.get("meta", {}))
    meta["seeds"] = header.get("seeds", {})
    if "conditioning" in header:
        meta["conditioning"] = header["conditioning"]
    return ProblemInstance(header["tau"], op, b, x_star, header["noise_norm"], meta)
