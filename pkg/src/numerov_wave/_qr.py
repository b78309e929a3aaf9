"""Dense nonsymmetric eigenvalues: Householder Hessenberg reduction + Francis QR."""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError

_EPS = np.finfo(float).eps


def _house(x: np.ndarray) -> np.ndarray | None:
    """Unit vector ``v`` with ``(I - 2 v v^T) x`` parallel to ``e_1``; None if ``x = 0``."""
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return None
    v = x.astype(float, copy=True)
    v[0] += np.copysign(nrm, x[0])
    return v / np.linalg.norm(v)


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix orthogonally similar to the real square ``A``."""
    H = np.array(A, dtype=float, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        v = _house(H[k + 1:, k])
        if v is None:
            continue
        H[k + 1:, k:] -= 2.0 * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _eig2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    """Eigenvalues of ``[[a, b], [c, d]]``, real pairs returned as exact reals."""
    p = 0.5 * (a + d)
    det = a * d - b * c
    disc = (0.5 * (a - d)) ** 2 + b * c
    if disc >= 0.0:
        r = np.sqrt(disc)
        big = p + np.copysign(r, p) if p != 0.0 else r
        small = det / big if big != 0.0 else p - r
        return complex(big), complex(small)
    r = np.sqrt(-disc)
    return complex(p, r), complex(p, -r)


def _negligible(H: np.ndarray, k: int) -> bool:
    """Ahues-Tisseur test: subdiagonal ``H[k, k-1]`` can be set to zero."""
    ab = max(abs(H[k, k - 1]), abs(H[k - 1, k]))
    ba = min(abs(H[k, k - 1]), abs(H[k - 1, k]))
    diff = abs(H[k - 1, k - 1] - H[k, k])
    aa = max(abs(H[k, k]), diff)
    bb = min(abs(H[k, k]), diff)
    s = aa + ab
    return s == 0.0 or ba * (ab / s) <= _EPS * (bb * (aa / s))


def _shifts(H: np.ndarray, lo: int, hi: int, its: int):
    """Double-shift pair as (re1, im1, re2, im2), following LAPACK's dlahqr choices."""
    if its % 20 == 0:
        s = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2])
        h11 = 0.75 * s + H[hi, hi]
        h12, h21, h22 = -0.4375 * s, s, h11
    elif its % 10 == 0:
        s = abs(H[lo + 1, lo]) + abs(H[lo + 2, lo + 1])
        h11 = 0.75 * s + H[lo, lo]
        h12, h21, h22 = -0.4375 * s, s, h11
    else:
        h11, h12 = H[hi - 1, hi - 1], H[hi - 1, hi]
        h21, h22 = H[hi, hi - 1], H[hi, hi]
    s = abs(h11) + abs(h12) + abs(h21) + abs(h22)
    if s == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    h11, h12, h21, h22 = h11 / s, h12 / s, h21 / s, h22 / s
    tr = 0.5 * (h11 + h22)
    det = (h11 - tr) * (h22 - tr) - h12 * h21
    rtdisc = np.sqrt(abs(det))
    if det >= 0.0:
        return tr * s, rtdisc * s, tr * s, -rtdisc * s
    # two real shifts: use the one closer to h22 twice
    r1, r2 = tr + rtdisc, tr - rtdisc
    r = r1 if abs(r1 - h22) <= abs(r2 - h22) else r2
    return r * s, 0.0, r * s, 0.0


def _first_column(H: np.ndarray, lo: int, hi: int, its: int):
    """Scaled first column of ``(H - s1)(H - s2)`` for the bulge."""
    r1, i1, r2, i2 = _shifts(H, lo, hi, its)
    m = lo
    s = abs(H[m, m] - r2) + abs(i2) + abs(H[m + 1, m])
    h21s = H[m + 1, m] / s
    x = h21s * H[m, m + 1] + (H[m, m] - r1) * ((H[m, m] - r2) / s) - i1 * (i2 / s)
    y = h21s * (H[m, m] + H[m + 1, m + 1] - r1 - r2)
    z = h21s * H[m + 2, m + 1]
    return x, y, z


def francis_eigenvalues(H: np.ndarray, max_sweeps: int | None = None) -> np.ndarray:
    """All eigenvalues of an upper Hessenberg matrix by implicit double-shift QR.

    Only the active unreduced block is updated, since eigenvectors are not
    accumulated.  Raises :class:`ConvergenceError` with the index of the
    eigenvalue being isolated when the sweep budget (default ``100 n``) runs out.
    """
    H = np.array(H, dtype=float, copy=True)
    n = H.shape[0]
    if max_sweeps is None:
        max_sweeps = 100 * max(n, 1)
    eig = np.zeros(n, dtype=complex)
    anorm = np.max(np.abs(H)) if n else 0.0
    hi = n - 1
    its = 0
    sweeps = 0
    while hi >= 0:
        # deflation: look for a negligible subdiagonal entry
        lo = hi
        while lo > 0:
            s = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if s == 0.0:
                s = anorm
            if abs(H[lo, lo - 1]) <= _EPS * s and _negligible(H, lo):
                H[lo, lo - 1] = 0.0
                break
            lo -= 1

        if lo == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            eig[hi - 1], eig[hi] = _eig2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
            hi -= 2
            its = 0
            continue

        sweeps += 1
        its += 1
        if sweeps > max_sweeps:
            raise ConvergenceError(
                f"QR iteration stalled isolating eigenvalue {hi} after {max_sweeps} sweeps", hi
            )

        x, y, z = _first_column(H, lo, hi, its)
        for k in range(lo, hi - 1):
            v = _house(np.array([x, y, z]))
            if v is not None:
                c0 = max(lo, k - 1)
                blk = H[k:k + 3, c0:hi + 1]
                blk -= 2.0 * np.outer(v, v @ blk)
                r1 = min(k + 3, hi)
                blk = H[lo:r1 + 1, k:k + 3]
                blk -= 2.0 * np.outer(blk @ v, v)
            x = H[k + 1, k]
            y = H[k + 2, k]
            if k < hi - 2:
                z = H[k + 3, k]
        v = _house(np.array([x, y]))
        if v is not None:
            blk = H[hi - 1:hi + 1, hi - 2:hi + 1]
            blk -= 2.0 * np.outer(v, v @ blk)
            blk = H[lo:hi + 1, hi - 1:hi + 1]
            blk -= 2.0 * np.outer(blk @ v, v)
    return eig
