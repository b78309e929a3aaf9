"""Spectrum of the pencil ``-Lambda e = lambda s_N e`` on a mesh.

The pencil is reduced to the standard nonsymmetric problem for
``-s_N^{-1} Lambda`` (tridiagonal solves), whose eigenvalues come from a
Hessenberg reduction and Francis double-shift QR.  Eigenvectors are then
recovered by inverse iteration on the tridiagonal pencil itself.

:func:`charpoly_roots_oracle` is an independent route to the same numbers:
it evaluates ``det(-Lambda - lambda s_N)`` by the three-term determinant
recurrence and finds its zeros by Aberth simultaneous iteration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import linear_sum_assignment

from ._qr import francis_eigenvalues, hessenberg
from .errors import ConvergenceError, SingularOperatorError
from .mesh import Mesh, MeshFamilySpec, extend_function, extend_mesh
from .operators import TridiagonalOperator, assemble_lambda, assemble_sN, inner_product, tridiag_solve

__all__ = [
    "Classification",
    "EigenPair",
    "Spectrum",
    "ScalingReport",
    "generalized_eigenvalues",
    "generalized_spectrum",
    "charpoly_roots_oracle",
    "classify",
    "verify_scaling",
    "pencil_residual",
    "match_spectra",
    "uniform_lambda_max",
    "ORACLE_MAX_N",
]

ORACLE_MAX_N = 16


class Classification(str, Enum):
    ALL_REAL = "ALL_REAL"
    COMPLEX_PRESENT = "COMPLEX_PRESENT"


@dataclass(frozen=True)
class EigenPair:
    lam: complex
    vector: np.ndarray
    residual: float

    @property
    def relative_residual(self) -> float:
        return self.residual / max(abs(self.lam), 1.0)


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by ``|lambda|`` descending (ties: larger imaginary part first)."""

    mesh: Mesh
    pairs: tuple[EigenPair, ...]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs], dtype=complex)

    @property
    def classification(self) -> Classification:
        return classify(self)

    @property
    def dominant(self) -> tuple[EigenPair, ...]:
        top = abs(self.pairs[0].lam)
        return tuple(p for p in self.pairs if abs(p.lam) >= top * (1.0 - 1e-10))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["index", "re", "im", "residual"])
            for i, p in enumerate(self.pairs):
                out.writerow([i, repr(float(p.lam.real)), repr(float(p.lam.imag)), repr(float(p.residual))])

    def summary(self) -> str:
        cls = self.classification
        lam = self.pairs[0].lam
        if abs(lam.imag) > 0 and cls is Classification.COMPLEX_PRESENT:
            lam_txt = f"{lam.real:.6g} ± {abs(lam.imag):.6g}i"
        else:
            lam_txt = f"{lam.real:.10g}"
        from .modal import kappa0

        return f"{cls.value}, dominant λ = {lam_txt}, κ₀ = {kappa0(lam, 1.0):.6g} (a=1)"


def _reduced_matrix(mesh: Mesh) -> np.ndarray:
    lam = assemble_lambda(mesh)
    sN = assemble_sN(mesh)
    try:
        return tridiag_solve(sN, -lam.to_dense())
    except SingularOperatorError as exc:
        raise SingularOperatorError(
            f"averaging operator is singular on this mesh ({exc}); mesh rejected", exc.index
        ) from exc


def _pair_conjugates(ev: np.ndarray) -> np.ndarray:
    """Symmetrize complex eigenvalues into exact conjugate pairs."""
    ev = ev.astype(complex, copy=True)
    complex_idx = [i for i in range(len(ev)) if ev[i].imag != 0.0]
    used: set[int] = set()
    for i in complex_idx:
        if i in used:
            continue
        candidates = [j for j in complex_idx if j != i and j not in used]
        if not candidates:
            ev[i] = ev[i].real
            used.add(i)
            continue
        j = min(candidates, key=lambda k: abs(ev[k] - np.conj(ev[i])))
        avg = 0.5 * (ev[i] + np.conj(ev[j]))
        ev[i], ev[j] = avg, np.conj(avg)
        used.update((i, j))
    return ev


def _sort_key(lam: complex):
    return (-abs(lam), -lam.imag, -lam.real)


def generalized_eigenvalues(mesh: Mesh) -> np.ndarray:
    """Eigenvalues only, sorted by modulus descending, conjugate pairs symmetrized."""
    if mesh.N == 2:
        lam, sN = assemble_lambda(mesh), assemble_sN(mesh)
        return np.array([-lam.diag[0] / sN.diag[0]], dtype=complex)
    ev = francis_eigenvalues(hessenberg(_reduced_matrix(mesh)))
    ev = _pair_conjugates(ev)
    return np.array(sorted(ev, key=_sort_key), dtype=complex)


def _banded(A: TridiagonalOperator) -> np.ndarray:
    ab = np.zeros((3, A.n), dtype=A.dtype)
    ab[0, 1:] = A.sup[:-1]
    ab[1] = A.diag
    ab[2, :-1] = A.sub[1:]
    return ab


def pencil_residual(mesh: Mesh, lam: complex, e: np.ndarray) -> float:
    """``||Lambda e + lambda s_N e||`` in the mesh norm."""
    r = assemble_lambda(mesh).apply(e) + lam * assemble_sN(mesh).apply(e)
    return float(np.sqrt(np.real(inner_product(r, r, mesh))))


def _normalize(mesh: Mesh, v: np.ndarray) -> np.ndarray:
    v = v / np.sqrt(np.real(inner_product(v, v, mesh)))
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    if np.iscomplexobj(v):
        v[k] = abs(v[k])
    return v


def _inverse_iteration(mesh: Mesh, lam: complex, tol: float = 1e-12, max_iter: int = 8) -> np.ndarray:
    lamop = assemble_lambda(mesh)
    sN = assemble_sN(mesh)
    real = lam.imag == 0.0
    shift = lam.real if real else lam
    A = -lamop - sN.scaled(shift)
    ab = _banded(A)
    n = mesh.N - 1
    v = np.linspace(1.0, 2.0, n) + (0.0 if real else 0.1j * np.cos(np.arange(n)))
    v = _normalize(mesh, v)
    scale = max(abs(lam), 1.0)
    for _ in range(max_iter):
        rhs = sN.apply(v)
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                w = solve_banded((1, 1), ab, rhs, check_finite=False)
            singular = not np.all(np.isfinite(w))
        except np.linalg.LinAlgError:
            singular = True
        if singular:
            # shift hit the eigenvalue exactly; nudge it off
            nudged = shift * (1.0 + 1e-13) if shift != 0 else 1e-13
            ab = _banded(-lamop - sN.scaled(nudged))
            w = solve_banded((1, 1), ab, rhs, check_finite=False)
        v = _normalize(mesh, w)
        if pencil_residual(mesh, lam, v) <= tol * scale:
            break
    return v


def generalized_spectrum(mesh: Mesh) -> Spectrum:
    """All ``N - 1`` eigenpairs of the pencil, with residuals."""
    ev = generalized_eigenvalues(mesh)
    pairs: list[EigenPair] = []
    done: dict[int, np.ndarray] = {}
    for i, lam in enumerate(ev):
        lam = complex(lam)
        if lam.imag < 0 and i > 0 and ev[i - 1] == np.conj(lam) and (i - 1) in done:
            v = np.conj(done[i - 1])
        else:
            v = _inverse_iteration(mesh, lam)
        done[i] = v
        pairs.append(EigenPair(lam, v, pencil_residual(mesh, lam, v)))
    return Spectrum(mesh, tuple(pairs))


def classify(spectrum, tol_imag: float = 1e-8) -> Classification:
    """COMPLEX_PRESENT iff some ``|Im lambda| > tol_imag * max(1, |Re lambda|)``."""
    ev = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    for lam in ev:
        if abs(lam.imag) > tol_imag * max(1.0, abs(lam.real)):
            return Classification.COMPLEX_PRESENT
    return Classification.ALL_REAL


def uniform_lambda_max(X, N: int) -> float:
    """Largest pencil eigenvalue on the uniform mesh with ``N`` steps."""
    h = float(X) / N
    lam_neg = 4.0 / h**2 * math.sin(math.pi * (N - 1) / (2 * N)) ** 2
    return lam_neg / (1.0 - h**2 / 12.0 * lam_neg)


# characteristic-polynomial oracle -------------------------------------------

def _det_and_derivative(mesh: Mesh, z: complex) -> tuple[complex, complex]:
    """``det(-Lambda - z s_N)`` and its ``z``-derivative via the tridiagonal recurrence."""
    L = assemble_lambda(mesh)
    S = assemble_sN(mesh)
    d = -L.diag - z * S.diag
    dd = -S.diag
    # off-diagonal products t_{k,k-1} t_{k-1,k}
    lo, up = -L.sub - z * S.sub, -L.sup - z * S.sup
    dlo, dup = -S.sub, -S.sup
    f_prev, f = 1.0 + 0j, d[0]
    g_prev, g = 0.0 + 0j, dd[0]
    for k in range(1, len(d)):
        c = lo[k] * up[k - 1]
        dc = dlo[k] * up[k - 1] + lo[k] * dup[k - 1]
        f_new = d[k] * f - c * f_prev
        g_new = dd[k] * f + d[k] * g - dc * f_prev - c * g_prev
        f_prev, f = f, f_new
        g_prev, g = g, g_new
    return f, g


def charpoly_roots_oracle(mesh: Mesh, tol: float = 1e-14, max_iter: int = 1000) -> np.ndarray:
    """Zeros of ``det(-Lambda - lambda s_N)`` by Aberth iteration (``N <= 16`` only)."""
    if mesh.N > ORACLE_MAX_N:
        raise ValueError(f"charpoly oracle is limited to N <= {ORACLE_MAX_N}, got N = {mesh.N}")
    n = mesh.N - 1
    if n == 1:
        f, g = _det_and_derivative(mesh, 0.0)
        return np.array([-f / g])
    L = assemble_lambda(mesh)
    radius = 2.0 * L.norm_inf()
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(max_iter):
        max_step = 0.0
        for k in range(n):
            f, g = _det_and_derivative(mesh, z[k])
            if f == 0:
                continue
            ratio = f / g
            others = z[k] - np.delete(z, k)
            corr = ratio / (1.0 - ratio * np.sum(1.0 / others))
            z[k] -= corr
            max_step = max(max_step, abs(corr) / max(abs(z[k]), 1.0))
        if max_step < tol:
            break
    else:
        raise ConvergenceError("Aberth iteration did not converge", n)
    # Newton polish; the recurrence is exact up to rounding near each root
    for k in range(n):
        for _ in range(3):
            f, g = _det_and_derivative(mesh, z[k])
            if g == 0 or f == 0:
                break
            z[k] -= f / g
    real = np.abs(z.imag) <= 1e-12 * np.abs(z)
    z[real] = z[real].real
    return np.array(sorted(z, key=_sort_key), dtype=complex)


def match_spectra(a, b) -> float:
    """Max relative distance after optimal pairwise matching of two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("spectra have different sizes")
    cost = np.abs(a[:, None] - b[None, :]) / np.maximum(np.abs(a[:, None]), 1.0)
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


@dataclass(frozen=True)
class ScalingReport:
    K: int
    eigenvalue_defect: float  # max over base eigenvalues of min relative distance
    eigenvector_residual: float  # max relative pencil residual of the extended vectors


def verify_scaling(base: Mesh, K: int, base_spectrum: Spectrum | None = None) -> ScalingReport:
    """Check that base eigenpairs ``(lam, e)`` map to ``(K^2 lam, Pi_K e)`` on the family mesh."""
    spec = MeshFamilySpec(base, K)
    if base_spectrum is None:
        base_spectrum = generalized_spectrum(base)
    fine = extend_mesh(spec)
    fine_ev = generalized_eigenvalues(fine)
    ev_defect = 0.0
    vec_res = 0.0
    for p in base_spectrum.pairs:
        target = p.lam * K**2
        ev_defect = max(ev_defect, float(np.min(np.abs(fine_ev - target)) / abs(target)))
        e = extend_function(p.vector, spec)
        norm = np.sqrt(np.real(inner_product(e, e, fine)))
        vec_res = max(vec_res, pencil_residual(fine, target, e) / (abs(target) * norm))
    return ScalingReport(K, ev_defect, vec_res)
