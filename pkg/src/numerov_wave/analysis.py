"""Experiments built on the scheme, the spectrum and the modal theory."""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import MeshError
from .mesh import Mesh, MeshFamilySpec, extend_mesh
from .modal import SIGMA_NUMEROV, kappa0
from .reference import SineSeriesSolution, bump, project
from .scheme import SchemeConfig, run
from .spectral import (
    ORACLE_MAX_N,
    Classification,
    Spectrum,
    charpoly_roots_oracle,
    classify,
    generalized_eigenvalues,
    generalized_spectrum,
    match_spectra,
    uniform_lambda_max,
)

__all__ = [
    "ErrorRow",
    "ErrorTable",
    "KappaReport",
    "CFLReport",
    "FamilyConditionReport",
    "SearchReport",
    "MeshSearch",
    "tau_rule",
    "nodal_error",
    "family_run",
    "error_table",
    "practical_rate",
    "kappa_pr_experiment",
    "check_cfl_uniform",
    "check_family_condition",
    "brute_force_search",
    "growth_curve",
]


def tau_rule(c: float) -> Callable[[int], float]:
    """Time-step rule ``tau = c / K``."""
    return lambda K: c / K


def nodal_error(v: np.ndarray, mesh: Mesh, exact: Callable, t: float) -> float:
    """Max over all nodes (boundaries included) of ``|u(x_j, t) - v_j|``."""
    full = mesh.to_full(np.asarray(v))
    err = np.max(np.abs(exact(mesh.x, t) - full))
    return float(err) if np.isfinite(err) else math.inf


@dataclass(frozen=True)
class ErrorRow:
    K: int
    T: float
    tau: float
    M: int
    error: float


@dataclass
class ErrorTable:
    rows: list[ErrorRow] = field(default_factory=list)

    def get(self, K: int, T: float) -> ErrorRow:
        for r in self.rows:
            if r.K == K and math.isclose(r.T, T):
                return r
        raise KeyError((K, T))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["K", "T", "tau", "M", "error"])
            for r in self.rows:
                out.writerow([r.K, repr(float(r.T)), repr(float(r.tau)), r.M, repr(float(r.error))])


def _reference(reference: SineSeriesSolution | None) -> SineSeriesSolution:
    return reference if reference is not None else project(bump)


def family_run(
    base: Mesh,
    K: int,
    times: Sequence[float],
    tau: float | None = None,
    M: int | None = None,
    a: float = 1.0,
    sigma: float = SIGMA_NUMEROV,
    u0: Callable = bump,
    reference: SineSeriesSolution | None = None,
) -> list[ErrorRow]:
    """One scheme run on the ``K``-fold family mesh, errors at each of ``times``.

    Exactly one of ``tau`` and ``M`` is given; ``M`` fixes the step count for
    the last time, ``tau`` is shrunk so that the last time is reached exactly.
    Every other time must then be a multiple of the step.
    """
    if (tau is None) == (M is None):
        raise ValueError("give exactly one of tau and M")
    times = sorted(times)
    T_end = times[-1]
    cfg = SchemeConfig(a, T_end / M, M, sigma) if M is not None else SchemeConfig.for_time(T_end, tau, a, sigma)
    for t in times:
        if abs(round(t / cfg.tau) * cfg.tau - t) > 1e-9 * t:
            raise ValueError(f"time {t} is not a multiple of tau = {cfg.tau}")
    mesh = extend_mesh(MeshFamilySpec(base, K))
    ref = _reference(reference)
    res = run(u0(mesh.interior), np.zeros(mesh.N - 1), mesh, cfg, times, record=False)
    rows = []
    for t in times:
        m = round(t / cfg.tau)
        if m in res.snapshots:
            err = nodal_error(res.snapshots[m], mesh, ref, t)
        else:
            err = math.inf  # run saturated before this level
        rows.append(ErrorRow(K, t, cfg.tau, m, err))
    return rows


def _cell(args):
    base, K, T, tau, a, sigma = args
    return family_run(base, K, [T], tau=tau, a=a, sigma=sigma)[0]


def error_table(
    base: Mesh,
    Ks: Iterable[int],
    tau_of_K: Callable[[int], float] | float,
    Ts: Iterable[float],
    a: float = 1.0,
    sigma: float = SIGMA_NUMEROV,
    workers: int = 1,
    cells: Iterable[tuple[int, float]] | None = None,
) -> ErrorTable:
    """Errors ``e_K(T)`` on the family meshes, one independent run per cell.

    ``tau_of_K`` is a callable ``K -> tau`` or a constant ``c`` meaning
    ``tau = c / K``.  By default all ``(K, T)`` combinations are run; pass
    ``cells`` to choose specific pairs.
    """
    rule = tau_rule(tau_of_K) if not callable(tau_of_K) else tau_of_K
    if cells is None:
        cells = [(K, T) for T in Ts for K in Ks]
    jobs = [(base, K, T, rule(K), a, sigma) for K, T in cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell, jobs))
    else:
        rows = [_cell(j) for j in jobs]
    return ErrorTable(rows)


def practical_rate(e1: float, e2: float, T1: float, T2: float) -> float:
    """Observed exponential rate ``ln(e2 / e1) / (T2 - T1)``."""
    if not (e1 > 0 and e2 > 0):
        raise ValueError(f"errors must be positive, got {e1} and {e2}")
    if not T2 > T1:
        raise ValueError(f"need T2 > T1, got T1={T1}, T2={T2}")
    return math.log(e2 / e1) / (T2 - T1)


@dataclass(frozen=True)
class KappaReport:
    mode: str
    K: int
    rows: tuple[ErrorRow, ErrorRow]
    kappa_pr: float
    kappa0: float

    @property
    def relative_gap(self) -> float:
        return abs(self.kappa_pr - self.kappa0) / self.kappa0


def kappa_pr_experiment(
    base: Mesh,
    K: int = 20,
    M: int = 14400,
    T1: float = 4.0,
    T2: float = 6.0,
    mode: str = "fixed-M",
    a: float = 1.0,
    sigma: float = SIGMA_NUMEROV,
    base_spectrum: Spectrum | None = None,
) -> KappaReport:
    """Compare the observed error growth rate between ``T1`` and ``T2`` with ``kappa0``.

    ``fixed-M``: both runs use ``M`` steps (so ``tau`` differs).
    ``fixed-tau``: ``tau = T1 / M`` for both, one run snapshotting at ``T1``.
    """
    if mode == "fixed-M":
        r1 = family_run(base, K, [T1], M=M, a=a, sigma=sigma)[0]
        r2 = family_run(base, K, [T2], M=M, a=a, sigma=sigma)[0]
    elif mode == "fixed-tau":
        tau = T1 / M
        r1, r2 = family_run(base, K, [T1, T2], M=round(T2 / tau), a=a, sigma=sigma)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'fixed-M' or 'fixed-tau'")
    if base_spectrum is None:
        ev = generalized_eigenvalues(base)
    else:
        ev = base_spectrum.eigenvalues
    k0 = max(kappa0(lam * K**2, a) for lam in ev)
    return KappaReport(mode, K, (r1, r2), practical_rate(r1.error, r2.error, T1, T2), k0)


@dataclass(frozen=True)
class CFLReport:
    ratio_lhs: float  # a^2 tau^2 / h^2
    eig_lhs: float  # a^2 tau^2 lambda_max / 6
    rhs: float  # 1 - eps0^2
    rtol: float = 1e-12

    @property
    def ratio_margin(self) -> float:
        return self.rhs - self.ratio_lhs

    @property
    def eig_margin(self) -> float:
        return self.rhs - self.eig_lhs

    @property
    def passed(self) -> bool:
        return self.ratio_margin >= -self.rtol

    @property
    def eig_passed(self) -> bool:
        return self.eig_margin >= -self.rtol


def check_cfl_uniform(mesh: Mesh, a: float, tau: float, eps0: float) -> CFLReport:
    """Uniform-mesh time-step condition, in step-ratio and largest-eigenvalue forms."""
    if not mesh.is_uniform:
        raise MeshError("the CFL check applies to uniform meshes only")
    if not 0 < eps0 < 1:
        raise ValueError(f"eps0 must lie in (0, 1), got {eps0}")
    h = float(mesh.steps[0])
    lam_max = uniform_lambda_max(float(mesh.X), mesh.N)
    return CFLReport(a**2 * tau**2 / h**2, a**2 * tau**2 * lam_max / 6.0, 1.0 - eps0**2)


@dataclass(frozen=True)
class FamilyConditionReport:
    vacuous: bool
    lhs: float = 0.0  # a^2 |Im lam0| h0^2 tau / h^2
    rhs: float = 0.0  # (9/2) kappa
    tau_bound: float = math.inf
    tau_bound_over_hmin_sq: float = math.inf

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.vacuous or self.margin >= -1e-12 * max(1.0, self.rhs)


def check_family_condition(
    base: Mesh,
    K: int,
    tau: float,
    kappa: float,
    a: float = 1.0,
    base_spectrum: Spectrum | None = None,
    tol_imag: float = 1e-8,
) -> FamilyConditionReport:
    """Sharp form of the family-mesh necessary condition (asymptotic remainder dropped)."""
    if base_spectrum is None:
        base_spectrum = generalized_spectrum(base)
    if classify(base_spectrum, tol_imag) is Classification.ALL_REAL:
        return FamilyConditionReport(vacuous=True)
    lam_i = max(abs(lam.imag) for lam in base_spectrum.eigenvalues)
    h0 = float(base.mean_step)
    h = h0 / K
    lhs = a**2 * lam_i * h0**2 * tau / h**2
    rhs = 4.5 * kappa
    tau_bound = rhs * h**2 / (a**2 * lam_i * h0**2)
    h_min = base.h_min / K
    return FamilyConditionReport(False, lhs, rhs, tau_bound, tau_bound / h_min**2)


# brute-force search -------------------------------------------------------------

@dataclass(frozen=True)
class SearchReport:
    steps: tuple[int, ...]
    denominator: int
    classification: Classification
    dominant: complex
    kappa0: float
    oracle_defect: float | None  # None when N exceeds the oracle size
    max_residual: float

    @property
    def verified(self) -> bool:
        return self.oracle_defect is None or self.oracle_defect <= 1e-6


def _canonical_candidates(n0: int, alphabet: Sequence[int]) -> Iterator[tuple[int, ...]]:
    for steps in itertools.product(alphabet, repeat=n0):
        if math.gcd(*steps) != 1:
            continue
        if steps[::-1] < steps:
            continue
        yield steps


def _report(steps: tuple[int, ...], tol_imag: float) -> SearchReport | None:
    mesh = Mesh(steps, sum(steps))
    ev = generalized_eigenvalues(mesh)
    if classify(ev, tol_imag) is Classification.ALL_REAL:
        return None
    spec = generalized_spectrum(mesh)
    defect = None
    if mesh.N <= ORACLE_MAX_N:
        defect = match_spectra(spec.eigenvalues, charpoly_roots_oracle(mesh))
    top = spec.pairs[0].lam
    return SearchReport(
        steps=steps,
        denominator=sum(steps),
        classification=Classification.COMPLEX_PRESENT,
        dominant=top,
        kappa0=kappa0(top),
        oracle_defect=defect,
        max_residual=max(p.relative_residual for p in spec.pairs),
    )


class MeshSearch:
    """Lazy enumeration of integer-step meshes on ``[0, 1]`` with complex pencil eigenvalues.

    Candidates are visited smallest ``N0`` first, lexicographically within each
    size, skipping step vectors with a common factor and the mirrored copy of
    every non-palindromic vector.  Iterating yields :class:`SearchReport` for
    each hit; afterwards ``visited`` and ``complete`` tell whether the budget
    cut the enumeration short.
    """

    def __init__(
        self,
        n0_range: Iterable[int],
        alphabet: Sequence[int] = tuple(range(1, 7)),
        budget: int | None = 100_000,
        include: Iterable[Sequence[int]] = (),
        tol_imag: float = 1e-8,
    ):
        self.n0_range = list(n0_range)
        if any(n < 2 or n > 14 for n in self.n0_range):
            raise ValueError("N0 must lie in 2..14")
        self.alphabet = tuple(sorted(set(int(s) for s in alphabet)))
        if not self.alphabet or self.alphabet[0] < 1:
            raise ValueError("alphabet must contain positive integers")
        self.budget = budget
        self.include = [tuple(int(s) for s in steps) for steps in include]
        self.tol_imag = tol_imag
        self.visited = 0
        self.complete = False
        self.hits: list[SearchReport] = []

    def _candidates(self) -> Iterator[tuple[int, ...]]:
        seen = set()
        for steps in self.include:
            canon = min(steps, steps[::-1])
            if canon not in seen:
                seen.add(canon)
                yield canon
        for n0 in self.n0_range:
            for steps in _canonical_candidates(n0, self.alphabet):
                if steps not in seen:
                    yield steps

    def __iter__(self) -> Iterator[SearchReport]:
        self.complete = False
        for steps in self._candidates():
            if self.budget is not None and self.visited >= self.budget:
                return
            self.visited += 1
            rep = _report(steps, self.tol_imag)
            if rep is not None:
                self.hits.append(rep)
                yield rep
        self.complete = True

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["steps", "denominator", "re_lambda", "im_lambda", "kappa0"])
            for r in self.hits:
                out.writerow([
                    " ".join(map(str, r.steps)), r.denominator,
                    repr(float(r.dominant.real)), repr(float(r.dominant.imag)), repr(float(r.kappa0)),
                ])


def brute_force_search(
    n0_range: Iterable[int],
    alphabet: Sequence[int] = tuple(range(1, 7)),
    budget: int | None = 100_000,
    include: Iterable[Sequence[int]] = (),
) -> MeshSearch:
    return MeshSearch(n0_range, alphabet, budget, include)


def growth_curve(result, every: int = 1) -> list[tuple[float, float]]:
    """``(t, ||v^m||)`` pairs from a recorded run, for plotting growth."""
    l2 = result.history["l2h"]
    return [(m * result.config.tau, float(l2[m])) for m in range(0, len(l2), every)]

