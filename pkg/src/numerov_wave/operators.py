"""Three-point operators on interior nodes and the mesh inner product.

All operators act on interior vectors (Dirichlet values are zero) and are
stored as :class:`TridiagonalOperator` with the convention ``sub[0] = 0``
and ``sup[-1] = 0``:

    (A w)_j = sub[j] * w[j-1] + diag[j] * w[j] + sup[j] * w[j+1]
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack

from .errors import SingularOperatorError
from .mesh import Mesh

__all__ = [
    "NumerovCoeffs",
    "TridiagonalOperator",
    "TridiagonalFactor",
    "MeshNorms",
    "SnFormStatus",
    "numerov_coeffs",
    "assemble_lambda",
    "assemble_sN",
    "step_operator",
    "tridiag_solve",
    "inner_product",
    "dirichlet_norm",
    "sn_form_status",
    "norms",
]

PIVOT_RTOL = 1e-13


@dataclass(frozen=True)
class NumerovCoeffs:
    """Averaging weights at interior nodes: ``(alpha w_- + 10 gamma w + beta w_+) / 12``."""

    alpha: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray

    def weight_sums(self) -> np.ndarray:
        return (self.alpha + 10.0 * self.gamma + self.beta) / 12.0


@dataclass(frozen=True)
class TridiagonalOperator:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != n or len(self.sup) != n:
            raise ValueError("sub, diag and sup must have equal length")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def dtype(self):
        return np.result_type(self.sub, self.diag, self.sup)

    def apply(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w)
        if w.shape[0] != self.n:
            raise ValueError(f"operator of size {self.n} applied to vector of size {w.shape[0]}")
        shape = (-1,) + (1,) * (w.ndim - 1)
        out = self.diag.reshape(shape) * w
        out[1:] = out[1:] + self.sub[1:].reshape(shape) * w[:-1]
        out[:-1] = out[:-1] + self.sup[:-1].reshape(shape) * w[1:]
        return out

    __matmul__ = apply

    def to_dense(self) -> np.ndarray:
        A = np.diag(self.diag).astype(self.dtype)
        if self.n > 1:
            A += np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)
        return A

    def scaled(self, c) -> "TridiagonalOperator":
        return TridiagonalOperator(c * self.sub, c * self.diag, c * self.sup)

    def __add__(self, other: "TridiagonalOperator") -> "TridiagonalOperator":
        return TridiagonalOperator(
            self.sub + other.sub, self.diag + other.diag, self.sup + other.sup
        )

    def __sub__(self, other: "TridiagonalOperator") -> "TridiagonalOperator":
        return self + other.scaled(-1.0)

    def __neg__(self) -> "TridiagonalOperator":
        return self.scaled(-1.0)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.sub) + np.abs(self.diag) + np.abs(self.sup)))

    def dump_csv(self, path) -> None:
        """Write ``row, sub, diag, super`` (1-based interior row index)."""
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["row", "sub", "diag", "super"])
            for j in range(self.n):
                out.writerow([j + 1, repr(float(self.sub[j])), repr(float(self.diag[j])), repr(float(self.sup[j]))])


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=64)
def numerov_coeffs(mesh: Mesh) -> NumerovCoeffs:
    h = mesh.h[:-1]
    hp = mesh.h[1:]
    hh = mesh.hhat
    alpha = 2.0 - hp**2 / (h * hh)
    gamma = 1.0 + (hp - h) ** 2 / (5.0 * h * hp)
    beta = 2.0 - h**2 / (hp * hh)
    return NumerovCoeffs(*_readonly(alpha, gamma, beta))


@lru_cache(maxsize=64)
def assemble_lambda(mesh: Mesh) -> TridiagonalOperator:
    """Second difference ``((w_+ - w)/h_+ - (w - w_-)/h) / hhat``."""
    h = mesh.h[:-1]
    hp = mesh.h[1:]
    hh = mesh.hhat
    sub = 1.0 / (hh * h)
    sup = 1.0 / (hh * hp)
    diag = -(1.0 / h + 1.0 / hp) / hh
    sub[0] = 0.0
    sup[-1] = 0.0
    return TridiagonalOperator(*_readonly(sub, diag, sup))


@lru_cache(maxsize=64)
def assemble_sN(mesh: Mesh) -> TridiagonalOperator:
    c = numerov_coeffs(mesh)
    sub = c.alpha / 12.0
    diag = 10.0 * c.gamma / 12.0
    sup = c.beta / 12.0
    sub[0] = 0.0
    sup[-1] = 0.0
    return TridiagonalOperator(*_readonly(sub, diag, sup))


def step_operator(mesh: Mesh, tau: float, a: float, sigma: float) -> TridiagonalOperator:
    """Implicit operator ``s_N - sigma tau^2 a^2 Lambda``."""
    return assemble_sN(mesh) - assemble_lambda(mesh).scaled(sigma * tau**2 * a**2)


def tridiag_solve(A: TridiagonalOperator, b) -> np.ndarray:
    """Solve ``A x = b`` by elimination without pivoting.

    ``b`` may be a vector or a 2D array of right-hand sides (one per column).
    Raises :class:`SingularOperatorError` when a pivot falls below
    ``1e-13`` times the row scale.
    """
    b = np.asarray(b)
    n = A.n
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, operator has {n}")
    dtype = np.result_type(A.dtype, b.dtype, float)
    sub, sup = A.sub, A.sup
    row_scale = np.abs(A.sub) + np.abs(A.diag) + np.abs(A.sup)

    piv = np.empty(n, dtype=dtype)
    y = np.array(b, dtype=dtype, copy=True)
    piv[0] = A.diag[0]
    for k in range(n):
        if k > 0:
            m = sub[k] / piv[k - 1]
            piv[k] = A.diag[k] - m * sup[k - 1]
            y[k] = y[k] - m * y[k - 1]
        if not abs(piv[k]) > PIVOT_RTOL * row_scale[k]:
            raise SingularOperatorError(
                f"zero pivot at interior row {k + 1} (|pivot| = {abs(piv[k]):.3e})", k
            )
    x = y
    x[-1] = y[-1] / piv[-1]
    for k in range(n - 2, -1, -1):
        x[k] = (y[k] - sup[k] * x[k + 1]) / piv[k]
    return x


class TridiagonalFactor:
    """LU factorization of a real tridiagonal operator, reused across many solves.

    Backed by LAPACK ``dgttrf``/``dgttrs``; complex right-hand sides are
    solved as two real systems.  Systems smaller than 3x3 (which the scipy
    wrapper rejects) go through :func:`tridiag_solve`.
    """

    def __init__(self, A: TridiagonalOperator):
        if np.iscomplexobj(A.diag) or np.iscomplexobj(A.sub) or np.iscomplexobj(A.sup):
            raise TypeError("TridiagonalFactor expects a real operator")
        self.n = A.n
        self._small = A if A.n < 3 else None
        if self._small is not None:
            tridiag_solve(A, np.zeros(A.n))  # pivot check
            return
        dl, d, du, du2, ipiv, info = lapack.dgttrf(
            np.array(A.sub[1:], dtype=float), np.array(A.diag, dtype=float),
            np.array(A.sup[:-1], dtype=float),
        )
        if info > 0:
            raise SingularOperatorError(f"zero pivot at interior row {info}", info - 1)
        scale = A.norm_inf()
        small = np.flatnonzero(np.abs(d) <= PIVOT_RTOL * scale)
        if small.size:
            k = int(small[0])
            raise SingularOperatorError(f"near-zero pivot at interior row {k + 1}", k)
        self._lu = (dl, d, du, du2, ipiv)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b)
        if self._small is not None:
            return tridiag_solve(self._small, b)
        if np.iscomplexobj(b):
            return self._solve_real(b.real) + 1j * self._solve_real(b.imag)
        return self._solve_real(b)

    def _solve_real(self, b: np.ndarray) -> np.ndarray:
        x, info = lapack.dgttrs(*self._lu, np.asarray(b, dtype=float))
        if info != 0:
            raise ValueError(f"dgttrs failed with info={info}")
        return x


def inner_product(v, w, mesh: Mesh) -> complex:
    """Mesh inner product ``sum_j v_j conj(w_j) hhat_j``."""
    v = np.asarray(v)
    w = np.asarray(w)
    if v.shape != w.shape or v.shape[0] != mesh.N - 1:
        raise ValueError("inner_product needs two interior vectors of the mesh")
    val = np.sum(v * np.conj(w) * mesh.hhat)
    return complex(val) if np.iscomplexobj(val) else float(val)


def dirichlet_norm(w, mesh: Mesh) -> float:
    """``sqrt(sum_j |w_j - w_{j-1}|^2 / h_j)`` over all N intervals (zero boundary values)."""
    full = mesh.to_full(np.asarray(w))
    return float(np.sqrt(np.sum(np.abs(np.diff(full)) ** 2 / mesh.h)))


@dataclass(frozen=True)
class SnFormStatus:
    symmetric: bool
    positive: bool
    asymmetry: float

    @property
    def available(self) -> bool:
        return self.symmetric and self.positive


@lru_cache(maxsize=64)
def sn_form_status(mesh: Mesh, rtol: float = 1e-12) -> SnFormStatus:
    """Whether ``(s_N v, w)`` is a symmetric positive form on this mesh.

    ``asymmetry`` is the relative Frobenius size of the skew part of
    ``diag(hhat) s_N``.
    """
    G = mesh.hhat[:, None] * assemble_sN(mesh).to_dense()
    skew = np.linalg.norm(G - G.T) / np.linalg.norm(G)
    symmetric = bool(skew <= rtol)
    positive = False
    if symmetric:
        positive = bool(np.min(np.linalg.eigvalsh(0.5 * (G + G.T))) > 0.0)
    return SnFormStatus(symmetric, positive, float(skew))


@dataclass(frozen=True)
class MeshNorms:
    l2h: float
    dirichlet: float
    negLambdaInverse: float
    sN: float | None  # None where the averaging form is not symmetric positive


def norms(w, mesh: Mesh) -> MeshNorms:
    w = np.asarray(w)
    lam = assemble_lambda(mesh)
    l2h = float(np.sqrt(np.real(inner_product(w, w, mesh))))
    z = tridiag_solve(-lam, w)
    inv = float(np.sqrt(max(np.real(inner_product(z, w, mesh)), 0.0)))
    sN = None
    if sn_form_status(mesh).available:
        sN = float(np.sqrt(max(np.real(inner_product(assemble_sN(mesh).apply(w), w, mesh)), 0.0)))
    return MeshNorms(l2h, dirichlet_norm(w, mesh), inv, sN)
