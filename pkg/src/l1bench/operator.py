"""Implicit matrices built from Givens rotation stages.

The central object is :class:`OperatorSpec`, which represents

    A = (P1 Gl P2) Sigma Gr^T

where ``Gr`` (n x n) and ``Gl`` (m x m) are products of rotation stages,
``P1``/``P2`` are permutations and ``Sigma`` is an m x n diagonal holding the
singular values.  Nothing of size nnz(A) is ever stored; products with A,
A^T and (A^T A)^{-1} are computed by sweeping over the stages.

All application routines accept either a vector of shape ``(k,)`` or a block
of column vectors of shape ``(k, p)``.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

__all__ = [
    "RotationStage",
    "ExplicitStage",
    "Permutation",
    "Spectrum",
    "Operator",
    "OperatorSpec",
    "DenseOperator",
    "BlockOperator",
    "PermutedColumnsOperator",
    "SingularSpectrumError",
    "MaterializationError",
    "apply_stage",
    "apply_stages",
    "stage_composition",
    "matvec_A",
    "matvec_At",
    "apply_AtA_inverse",
    "diag_AtA",
    "materialize_dense",
    "nnz_counts",
    "as_operator",
    "DEFAULT_DENSE_CAP",
]

DEFAULT_DENSE_CAP = 2**24
FORMAT_VERSION = 1


class SingularSpectrumError(ValueError):
    """Raised when an inverse is requested from a spectrum containing zeros."""


class MaterializationError(ValueError):
    """Raised when a dense copy would exceed the configured size cap."""


def _check_length(v, n, what="vector"):
    if v.shape[0] != n:
        raise ValueError(f"{what} has leading dimension {v.shape[0]}, expected {n}")


# ---------------------------------------------------------------------------
# rotation stages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationStage:
    """A layer of disjoint Givens rotations sharing one angle.

    ``offset=0`` pairs coordinates (0,1), (2,3), ...; ``offset=1`` pairs
    (1,2), (3,4), ...  Coordinates without a partner are left untouched.
    """

    n: int
    offset: int
    theta: float

    def __post_init__(self):
        if self.offset not in (0, 1):
            raise ValueError("offset must be 0 or 1")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def n_pairs(self) -> int:
        return (self.n - self.offset) // 2

    def pairs(self):
        k = self.n_pairs
        i = np.arange(self.offset, self.offset + 2 * k, 2)
        return i, i + 1

    def apply(self, v, transposed=False, out=None):
        _check_length(v, self.n)
        if out is None:
            out = v.copy()
        elif out is not v:
            np.copyto(out, v)
        k = self.n_pairs
        if k == 0:
            return out
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        if transposed:
            s = -s
        lo = self.offset
        hi = lo + 2 * k
        vi = out[lo:hi:2]
        vj = out[lo + 1 : hi : 2]
        t = vi * c
        t -= s * vj
        vj *= c
        vj += s * vi
        vi[...] = t
        return out

    def to_sparse(self):
        i, j = self.pairs()
        c, s = math.cos(self.theta), math.sin(self.theta)
        diag = np.ones(self.n)
        diag[i] = c
        diag[j] = c
        rows = np.concatenate([np.arange(self.n), i, j])
        cols = np.concatenate([np.arange(self.n), j, i])
        vals = np.concatenate([diag, np.full(i.size, -s), np.full(i.size, s)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def to_dict(self):
        return {"offset": self.offset, "theta": self.theta}


@dataclass(frozen=True, eq=False)
class ExplicitStage:
    """A layer of Givens rotations given as explicit (i, j, theta) triplets.

    The index pairs must be pairwise disjoint so the rotations commute and the
    layer can be applied in one vectorized sweep.  Overlapping rotations are
    expressed by chaining several stages.
    """

    n: int
    i: np.ndarray
    j: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=np.int64).ravel()
        j = np.asarray(self.j, dtype=np.int64).ravel()
        theta = np.broadcast_to(np.asarray(self.theta, dtype=float), i.shape).copy()
        if i.shape != j.shape:
            raise ValueError("i and j must have the same length")
        both = np.concatenate([i, j])
        if both.size and (both.min() < 0 or both.max() >= self.n):
            raise ValueError("rotation index out of range")
        if np.unique(both).size != both.size:
            raise ValueError("rotation pairs within a stage must be disjoint")
        for name, arr in (("i", i), ("j", j), ("theta", theta)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_pairs(self) -> int:
        return self.i.size

    def pairs(self):
        return self.i, self.j

    def apply(self, v, transposed=False, out=None):
        _check_length(v, self.n)
        if out is None:
            out = v.copy()
        elif out is not v:
            np.copyto(out, v)
        c = np.cos(self.theta)
        s = np.sin(self.theta)
        if transposed:
            s = -s
        if out.ndim == 2:
            c = c[:, None]
            s = s[:, None]
        vi = out[self.i]
        vj = out[self.j]
        out[self.i] = c * vi - s * vj
        out[self.j] = s * vi + c * vj
        return out

    def to_sparse(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        diag = np.ones(self.n)
        diag[self.i] = c
        diag[self.j] = c
        rows = np.concatenate([np.arange(self.n), self.i, self.j])
        cols = np.concatenate([np.arange(self.n), self.j, self.i])
        vals = np.concatenate([diag, -s, s])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def to_dict(self):
        return {"i": self.i.tolist(), "j": self.j.tolist(), "theta": self.theta.tolist()}


def _stage_from_dict(n, d):
    if "offset" in d:
        return RotationStage(n, int(d["offset"]), float(d["theta"]))
    return ExplicitStage(n, d["i"], d["j"], d["theta"])


def apply_stage(stage, v, transposed=False, out=None):
    """Apply one stage (or its transpose) to ``v``; ``out`` may alias ``v``."""
    return stage.apply(np.asarray(v, dtype=float), transposed=transposed, out=out)


def apply_stages(stages: Sequence, v, transposed=False, out=None):
    """Apply the product ``G = S_1 S_2 ... S_K`` (or ``G^T``) to ``v``.

    ``G v`` applies the last stage first; ``G^T v`` applies the first stage
    (transposed) first.
    """
    v = np.asarray(v, dtype=float)
    if out is None:
        out = v.copy()
    elif out is not v:
        np.copyto(out, v)
    order = stages if transposed else reversed(stages)
    for stage in order:
        stage.apply(out, transposed=transposed, out=out)
    return out


def stage_composition(n, count, theta, first_offset=0):
    """Alternating stage list ``[..., G2, G]`` with ``count`` factors.

    ``count=1`` gives ``[G]``, ``count=2`` gives ``[G2, G]``, ``count=3``
    gives ``[G, G2, G]`` and so on, where ``G`` uses ``first_offset`` and
    ``G2`` the other pairing.
    """
    return [
        RotationStage(n, (first_offset + count - 1 - p) % 2, theta) for p in range(count)
    ]


def _stages_sparse(stages, n):
    G = sp.identity(n, format="csr")
    for stage in stages:
        G = G @ stage.to_sparse()
    return G.tocsr()


# ---------------------------------------------------------------------------
# permutations and spectra
# ---------------------------------------------------------------------------


class Permutation:
    """Permutation matrix P with ``(P v)[k] = v[mapping[k]]``.

    Either an explicit index array or a seed is stored; a seeded permutation
    is regenerated deterministically with a Fisher-Yates shuffle.  With
    neither, the permutation is the identity and costs nothing to apply.
    """

    def __init__(self, n, mapping=None, seed=None):
        self.n = int(n)
        self.seed = None if seed is None else int(seed)
        if mapping is not None and seed is not None:
            raise ValueError("give either mapping or seed, not both")
        if mapping is not None:
            mapping = np.asarray(mapping, dtype=np.int64).copy()
            if mapping.shape != (self.n,) or not np.array_equal(
                np.sort(mapping), np.arange(self.n)
            ):
                raise ValueError("mapping is not a bijection on 0..n-1")
            self._explicit = True
        elif seed is not None:
            mapping = np.random.default_rng(self.seed).permutation(self.n)
            self._explicit = False
        else:
            self._explicit = False
        if mapping is not None:
            mapping.flags.writeable = False
            inverse = np.empty_like(mapping)
            inverse[mapping] = np.arange(self.n)
            inverse.flags.writeable = False
        else:
            inverse = None
        self.mapping = mapping
        self.inverse = inverse

    @classmethod
    def identity(cls, n):
        return cls(n)

    @property
    def is_identity(self):
        return self.mapping is None

    def apply(self, v):
        _check_length(v, self.n)
        if self.mapping is None:
            return v
        return v[self.mapping]

    def apply_transpose(self, v):
        _check_length(v, self.n)
        if self.mapping is None:
            return v
        return v[self.inverse]

    def to_sparse(self):
        cols = np.arange(self.n) if self.mapping is None else self.mapping
        return sp.csr_matrix((np.ones(self.n), (np.arange(self.n), cols)), shape=(self.n, self.n))

    def to_dict(self):
        if self.mapping is None:
            return None
        if self._explicit:
            return {"mapping": self.mapping.tolist()}
        return {"seed": self.seed}

    @classmethod
    def from_dict(cls, n, d):
        if d is None:
            return cls(n)
        if "mapping" in d:
            return cls(n, mapping=d["mapping"])
        return cls(n, seed=d["seed"])

    def __repr__(self):
        if self.mapping is None:
            return f"Permutation(n={self.n}, identity)"
        return f"Permutation(n={self.n}, seed={self.seed})"


class Spectrum:
    """Singular values sigma_1..sigma_n of A, realized once at construction.

    kind ``"explicit"``
        ``values`` given directly.
    kind ``"uniform"``
        ``lo + (hi - lo) * U + shift`` with ``U`` uniform on (0, 1], so every
        value lies in ``(lo + shift, hi + shift]``.
    kind ``"alternating"``
        ``v_odd`` at 1-based odd positions and ``v_even`` at even ones.
    """

    def __init__(self, n, kind="explicit", values=None, lo=0.0, hi=1.0, shift=0.0,
                 seed=None, v_odd=None, v_even=None):
        self.n = int(n)
        self.kind = kind
        self.params = {}
        if kind == "explicit":
            arr = np.array(values, dtype=float).ravel()
            if arr.shape != (self.n,):
                raise ValueError(f"expected {self.n} singular values, got {arr.size}")
        elif kind == "uniform":
            if hi <= lo:
                raise ValueError("need hi > lo")
            self.params = {"lo": float(lo), "hi": float(hi), "shift": float(shift), "seed": seed}
            rng = np.random.default_rng(seed)
            u = 1.0 - rng.random(self.n)
            arr = lo + (hi - lo) * u + shift
            if values is not None:
                # recorded realization takes precedence for bit-exact replay
                arr = np.array(values, dtype=float).ravel()
                if arr.shape != (self.n,):
                    raise ValueError("recorded values have the wrong length")
        elif kind == "alternating":
            self.params = {"v_odd": float(v_odd), "v_even": float(v_even)}
            arr = np.empty(self.n)
            arr[0::2] = v_odd
            arr[1::2] = v_even
        else:
            raise ValueError(f"unknown spectrum kind {kind!r}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("singular values must be finite and nonnegative")
        arr.flags.writeable = False
        self.values = arr

    @classmethod
    def uniform(cls, n, lo=0.0, hi=1.0, shift=0.0, seed=None):
        return cls(n, "uniform", lo=lo, hi=hi, shift=shift, seed=seed)

    @classmethod
    def alternating(cls, n, v_odd, v_even):
        return cls(n, "alternating", v_odd=v_odd, v_even=v_even)

    @property
    def is_singular(self):
        return bool(np.any(self.values == 0))

    def to_dict(self, record_values=True):
        d = {"kind": self.kind, **self.params}
        if self.kind == "explicit" or (self.kind == "uniform" and record_values):
            d["values"] = self.values.tolist()
        return d

    @classmethod
    def from_dict(cls, n, d):
        d = dict(d)
        kind = d.pop("kind")
        return cls(n, kind, **d)

    def __repr__(self):
        return f"Spectrum(n={self.n}, kind={self.kind!r}, {self.params})"


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


class Operator(ABC):
    """Minimal interface the solvers rely on."""

    shape: tuple

    @abstractmethod
    def matvec(self, x): ...

    @abstractmethod
    def rmatvec(self, y): ...

    @abstractmethod
    def diag_gram(self):
        """Diagonal of A^T A."""

    @abstractmethod
    def lipschitz(self):
        """An upper bound on the largest eigenvalue of A^T A."""

    @abstractmethod
    def to_sparse(self):
        """Explicit A as a scipy sparse matrix (desk scale only)."""

    def to_dense(self, cap=DEFAULT_DENSE_CAP):
        m, n = self.shape
        if m * n > cap:
            raise MaterializationError(f"{m}x{n} exceeds the dense cap of {cap} entries")
        return np.asarray(self.matvec(np.eye(n)))

    @cached_property
    def _csc(self):
        return self.to_sparse().tocsc()

    def csc(self):
        """Column-compressed A, built once and reused."""
        return self._csc

    def as_linear_operator(self):
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=float)


class OperatorSpec(Operator):
    """A = (P1 Gl P2) Sigma Gr^T with Gr, Gl given as lists of stages.

    ``right_stages`` compose ``Gr = S_1 S_2 ... S_K`` (n x n) and
    ``left_stages`` compose ``Gl`` (m x m), both in product order.
    """

    def __init__(self, m, n, spectrum, right_stages=(), left_stages=(), p1=None, p2=None):
        self.m = int(m)
        self.n = int(n)
        if self.m < self.n:
            raise ValueError("OperatorSpec requires m >= n; use igen2/BlockOperator for m < n")
        if isinstance(spectrum, Spectrum):
            self.spectrum = spectrum
        else:
            self.spectrum = Spectrum(self.n, values=spectrum)
        if self.spectrum.n != self.n:
            raise ValueError("spectrum length must equal n")
        self.right_stages = tuple(right_stages)
        self.left_stages = tuple(left_stages)
        for s in self.right_stages:
            if s.n != self.n:
                raise ValueError("right stage dimension must equal n")
        for s in self.left_stages:
            if s.n != self.m:
                raise ValueError("left stage dimension must equal m")
        self.p1 = p1 if p1 is not None else Permutation(self.m)
        self.p2 = p2 if p2 is not None else Permutation(self.m)
        if self.p1.n != self.m or self.p2.n != self.m:
            raise ValueError("permutations must act on R^m")

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def sigma(self):
        return self.spectrum.values

    def _scale(self, v, d):
        return v * (d[:, None] if v.ndim == 2 else d)

    def apply_G(self, v, transposed=False):
        return apply_stages(self.right_stages, v, transposed=transposed)

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        _check_length(x, self.n)
        y = apply_stages(self.right_stages, x, transposed=True)
        z = np.zeros((self.m,) + x.shape[1:])
        z[: self.n] = self._scale(y, self.sigma)
        z = self.p2.apply(z)
        if self.left_stages:
            z = apply_stages(self.left_stages, z, out=z)
        return self.p1.apply(z)

    def rmatvec(self, y):
        y = np.asarray(y, dtype=float)
        _check_length(y, self.m)
        z = self.p1.apply_transpose(y)
        if self.left_stages:
            z = apply_stages(self.left_stages, z, transposed=True)
        z = self.p2.apply_transpose(z)
        x = self._scale(z[: self.n], self.sigma)
        return apply_stages(self.right_stages, x)

    def solve_normal(self, v):
        """(A^T A)^{-1} v = Gr (Sigma^T Sigma)^{-1} Gr^T v."""
        v = np.asarray(v, dtype=float)
        _check_length(v, self.n)
        if self.spectrum.is_singular:
            raise SingularSpectrumError("A^T A is singular: spectrum contains zeros")
        w = apply_stages(self.right_stages, v, transposed=True)
        w = self._scale(w, 1.0 / self.sigma**2)
        return apply_stages(self.right_stages, w, out=w)

    def gram_matvec(self, v):
        """A^T A v = Gr Sigma^2 Gr^T v, without touching the left factor."""
        w = apply_stages(self.right_stages, np.asarray(v, dtype=float), transposed=True)
        w = self._scale(w, self.sigma**2)
        return apply_stages(self.right_stages, w, out=w)

    def right_factor_sparse(self):
        return _stages_sparse(self.right_stages, self.n)

    def diag_gram(self, method="auto"):
        """Exact diagonal of A^T A: entry i is sum_j sigma_j^2 Gr_ij^2.

        ``"sparse"`` forms Gr row by row as a sparse product (fill per row is
        bounded by the stage structure); ``"basis"`` pushes the identity
        through the stages, which is O(n^2) and meant for small n.
        """
        if method == "auto":
            method = "sparse"
        if method == "sparse":
            G = self.right_factor_sparse()
            return np.asarray(G.multiply(G) @ (self.sigma**2)).ravel()
        if method == "basis":
            W = apply_stages(self.right_stages, np.eye(self.n), transposed=True)
            W *= self.sigma[:, None]
            return np.einsum("ij,ij->j", W, W)
        raise ValueError(f"unknown method {method!r}")

    def lipschitz(self):
        return float(np.max(self.sigma) ** 2) if self.n else 0.0

    def to_sparse(self):
        Sigma = sp.csr_matrix(
            (self.sigma, (np.arange(self.n), np.arange(self.n))), shape=(self.m, self.n)
        )
        G = self.right_factor_sparse()
        A = Sigma @ G.T
        A = self.p2.to_sparse() @ A
        if self.left_stages:
            A = _stages_sparse(self.left_stages, self.m) @ A
        A = self.p1.to_sparse() @ A
        A = A.tocsr()
        A.eliminate_zeros()
        return A

    def storage_size(self):
        """Number of stored scalars excluding realized length-n/m vectors."""
        size = 2  # m, n
        size += 1 + len(self.spectrum.params)
        for s in self.right_stages + self.left_stages:
            size += 2 if isinstance(s, RotationStage) else 3 * s.n_pairs
        for p in (self.p1, self.p2):
            size += 1 if p.seed is not None else 0
        return size

    def to_dict(self, record_values=True):
        return {
            "version": FORMAT_VERSION,
            "m": self.m,
            "n": self.n,
            "spectrum": self.spectrum.to_dict(record_values=record_values),
            "right_stages": [s.to_dict() for s in self.right_stages],
            "left_stages": [s.to_dict() for s in self.left_stages],
            "p1": self.p1.to_dict(),
            "p2": self.p2.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version", FORMAT_VERSION) != FORMAT_VERSION:
            raise ValueError(f"unsupported operator format version {d['version']}")
        m, n = int(d["m"]), int(d["n"])
        return cls(
            m,
            n,
            Spectrum.from_dict(n, d["spectrum"]),
            right_stages=[_stage_from_dict(n, s) for s in d.get("right_stages", [])],
            left_stages=[_stage_from_dict(m, s) for s in d.get("left_stages", [])],
            p1=Permutation.from_dict(m, d.get("p1")),
            p2=Permutation.from_dict(m, d.get("p2")),
        )

    def __repr__(self):
        return (
            f"OperatorSpec(m={self.m}, n={self.n}, spectrum={self.spectrum.kind}, "
            f"right_stages={len(self.right_stages)}, left_stages={len(self.left_stages)})"
        )


class DenseOperator(Operator):
    """Wraps an explicit numpy array or scipy sparse matrix."""

    def __init__(self, A):
        if sp.issparse(A):
            self.A = A.tocsr().astype(float)
        else:
            self.A = np.asarray(A, dtype=float)
            if self.A.ndim != 2:
                raise ValueError("A must be two-dimensional")
        self.shape = self.A.shape

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        _check_length(x, self.shape[1])
        return np.asarray(self.A @ x)

    def rmatvec(self, y):
        y = np.asarray(y, dtype=float)
        _check_length(y, self.shape[0])
        return np.asarray(self.A.T @ y)

    def diag_gram(self):
        if sp.issparse(self.A):
            return np.asarray(self.A.multiply(self.A).sum(axis=0)).ravel()
        return np.einsum("ij,ij->j", self.A, self.A)

    def lipschitz(self):
        if min(self.shape) == 0:
            return 0.0
        if sp.issparse(self.A) or min(self.shape) > 2000:
            from scipy.sparse.linalg import svds

            s = svds(self.as_linear_operator(), k=1, return_singular_vectors=False)
            return float(s[0] ** 2) * (1 + 1e-8)
        return float(np.linalg.norm(self.A, 2) ** 2)

    def to_sparse(self):
        return sp.csr_matrix(self.A)

    def to_dense(self, cap=DEFAULT_DENSE_CAP):
        if self.shape[0] * self.shape[1] > cap:
            raise MaterializationError("dense cap exceeded")
        return self.A.toarray() if sp.issparse(self.A) else self.A.copy()


class BlockOperator(Operator):
    """A = [B, N] with B a square OperatorSpec and N an explicit m x k block."""

    def __init__(self, B: OperatorSpec, N):
        if B.m != B.n:
            raise ValueError("B must be square")
        self.B = B
        self.N = np.asarray(N, dtype=float)
        if self.N.ndim != 2 or self.N.shape[0] != B.m:
            raise ValueError("N must have B.m rows")
        self.shape = (B.m, B.n + self.N.shape[1])

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        _check_length(x, self.shape[1])
        m = self.B.n
        return self.B.matvec(x[:m]) + self.N @ x[m:]

    def rmatvec(self, y):
        y = np.asarray(y, dtype=float)
        _check_length(y, self.shape[0])
        return np.concatenate([self.B.rmatvec(y), self.N.T @ y])

    def diag_gram(self):
        return np.concatenate([self.B.diag_gram(), np.einsum("ij,ij->j", self.N, self.N)])

    def lipschitz(self):
        # lambda_max(BB^T + NN^T) <= ||B||^2 + ||N||^2
        nn = float(np.linalg.norm(self.N, 2) ** 2) if self.N.size else 0.0
        return self.B.lipschitz() + nn

    def to_sparse(self):
        return sp.hstack([self.B.to_sparse(), sp.csr_matrix(self.N)]).tocsr()

    def to_dict(self):
        return {"kind": "block", "B": self.B.to_dict(), "N_shape": list(self.N.shape)}


class PermutedColumnsOperator(Operator):
    """A[:, order] for a base operator A; ``order[k]`` is the source column."""

    def __init__(self, base: Operator, order):
        self.base = base
        self.order = np.asarray(order, dtype=np.int64)
        n = base.shape[1]
        if not np.array_equal(np.sort(self.order), np.arange(n)):
            raise ValueError("order must be a permutation of the columns")
        self.inverse = np.empty_like(self.order)
        self.inverse[self.order] = np.arange(n)
        self.shape = base.shape

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        _check_length(x, self.shape[1])
        return self.base.matvec(x[self.inverse])

    def rmatvec(self, y):
        return self.base.rmatvec(y)[self.order]

    def diag_gram(self):
        return self.base.diag_gram()[self.order]

    def lipschitz(self):
        return self.base.lipschitz()

    def to_sparse(self):
        return self.base.to_sparse()[:, self.order].tocsr()


def as_operator(A) -> Operator:
    """Coerce arrays, sparse matrices and operators to :class:`Operator`."""
    if isinstance(A, Operator):
        return A
    if isinstance(A, LinearOperator):
        raise TypeError("scipy LinearOperator lacks diag(A^T A); wrap it in an Operator subclass")
    return DenseOperator(A)


# ---------------------------------------------------------------------------
# functional entry points
# ---------------------------------------------------------------------------


def matvec_A(spec: Operator, x):
    """A x."""
    return spec.matvec(x)


def matvec_At(spec: Operator, y):
    """A^T y."""
    return spec.rmatvec(y)


def apply_AtA_inverse(spec: OperatorSpec, v):
    """(A^T A)^{-1} v via two stage sweeps and a diagonal scaling."""
    return spec.solve_normal(v)


def diag_AtA(spec: Operator, method="auto"):
    if isinstance(spec, OperatorSpec):
        return spec.diag_gram(method=method)
    return spec.diag_gram()


def materialize_dense(spec: Operator, cap=DEFAULT_DENSE_CAP):
    """Explicit A, built column by column from products with basis vectors."""
    return spec.to_dense(cap=cap)


def nnz_counts(spec: Operator, tol=1e-12, cap=DEFAULT_DENSE_CAP):
    """Entries of magnitude above ``tol`` in dense A and A^T A."""
    A = materialize_dense(spec, cap=cap)
    AtA = A.T @ A
    return int(np.count_nonzero(np.abs(A) > tol)), int(np.count_nonzero(np.abs(AtA) > tol))
