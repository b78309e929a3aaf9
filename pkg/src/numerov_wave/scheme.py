"""Three-level compact scheme for ``u_tt = a^2 u_xx`` with Dirichlet ends.

Each level solves

    (s_N - sigma tau^2 a^2 Lambda)(v^{m+1} - 2 v^m + v^{m-1}) = tau^2 a^2 Lambda v^m

and the start uses

    (s_N - sigma tau^2 a^2 Lambda)(v^1 - v^0)/tau - (tau/2) a^2 Lambda v^0 = u_1N,
    u_1N = (s_N + tau^2 a^2 Lambda / 12) u_1.

The implicit operator is factorized once per (mesh, config).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .mesh import Mesh
from .modal import SIGMA_NUMEROV
from .operators import (
    TridiagonalFactor,
    assemble_lambda,
    assemble_sN,
    dirichlet_norm,
    inner_product,
    sn_form_status,
    step_operator,
    tridiag_solve,
)

__all__ = [
    "SchemeConfig",
    "WaveState",
    "RunResult",
    "EnergyHistory",
    "compute_u1N",
    "first_step",
    "step",
    "run",
    "energy_history",
    "SATURATION",
]

#: Runs stop once max |v| exceeds this; errors are then reported as +inf.
SATURATION = 1e300


@dataclass(frozen=True)
class SchemeConfig:
    a: float
    tau: float
    M: int
    sigma: float = SIGMA_NUMEROV

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be an integer >= 1, got {self.M}")
        if not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite")

    @property
    def T(self) -> float:
        return self.M * self.tau

    @classmethod
    def for_time(cls, T: float, tau: float, a: float = 1.0, sigma: float = SIGMA_NUMEROV):
        """Config reaching ``T`` exactly: ``M = ceil(T / tau)`` and ``tau`` shrunk to ``T / M``."""
        M = max(1, math.ceil(T / tau - 1e-9))
        return cls(a=a, tau=T / M, M=M, sigma=sigma)


@dataclass
class WaveState:
    v_prev: np.ndarray
    v_curr: np.ndarray
    m: int


class _Stepper:
    def __init__(self, mesh: Mesh, config: SchemeConfig):
        self.mesh = mesh
        self.config = config
        self.lam = assemble_lambda(mesh)
        self.sN = assemble_sN(mesh)
        self.factor = TridiagonalFactor(step_operator(mesh, config.tau, config.a, config.sigma))
        self.c2 = config.tau**2 * config.a**2

    def first(self, v0: np.ndarray, u1N: np.ndarray) -> WaveState:
        tau, a = self.config.tau, self.config.a
        dv = self.factor.solve(u1N + 0.5 * tau * a**2 * self.lam.apply(v0))
        return WaveState(v0.copy(), v0 + tau * dv, 1)

    def advance(self, state: WaveState) -> WaveState:
        z = self.factor.solve(self.c2 * self.lam.apply(state.v_curr))
        return WaveState(state.v_curr, 2.0 * state.v_curr - state.v_prev + z, state.m + 1)


@lru_cache(maxsize=16)
def _stepper(mesh: Mesh, config: SchemeConfig) -> _Stepper:
    return _Stepper(mesh, config)


def compute_u1N(u1, mesh: Mesh, config: SchemeConfig) -> np.ndarray:
    """``(s_N + tau^2 a^2 Lambda / 12) u1``; the 1/12 does not follow ``sigma``."""
    u1 = np.asarray(u1)
    lam_term = (config.tau**2 * config.a**2 / 12.0) * assemble_lambda(mesh).apply(u1)
    return assemble_sN(mesh).apply(u1) + lam_term


def first_step(v0, u1N, mesh: Mesh, config: SchemeConfig) -> WaveState:
    """Level 1 from ``v0`` and the start right-hand side ``u1N``."""
    return _stepper(mesh, config).first(np.asarray(v0), np.asarray(u1N))


def step(state: WaveState, mesh: Mesh, config: SchemeConfig) -> WaveState:
    if state.m < 1:
        raise ValueError("step needs two levels; use first_step to start")
    return _stepper(mesh, config).advance(state)


@dataclass
class RunResult:
    """Output of :func:`run`.

    ``history`` holds one entry per level ``m = 0..steps``; the ``dt_sN_sq``
    and ``avg_dirichlet_sq`` columns describe the pair ``(v^m, v^{m+1})`` and
    are NaN at the last level.
    """

    mesh: Mesh
    config: SchemeConfig
    v0: np.ndarray
    u1N: np.ndarray
    snapshots: dict[int, np.ndarray]
    history: dict[str, np.ndarray]
    final: WaveState
    saturated: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.history["l2h"])) * self.config.tau

    def snapshot_at(self, t: float) -> np.ndarray:
        return self.snapshots[round(t / self.config.tau)]

    def write_snapshots(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["m", "t", "x", "v"])
            for m in sorted(self.snapshots):
                full = self.mesh.to_full(self.snapshots[m])
                for xj, vj in zip(self.mesh.x, full):
                    out.writerow([m, repr(m * self.config.tau), repr(float(xj)), repr(float(np.real(vj)))])

    def write_history(self, path) -> None:
        keys = list(self.history)
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["m", "t", *keys])
            for m in range(len(self.history["l2h"])):
                out.writerow([m, repr(m * self.config.tau), *(repr(float(self.history[k][m])) for k in keys)])


def _sq_norm(w, A, mesh) -> float:
    return float(np.real(inner_product(A.apply(w), w, mesh)))


def run(
    v0,
    u1,
    mesh: Mesh,
    config: SchemeConfig,
    snapshot_times: Sequence[float] = (),
    *,
    u1N=None,
    record: bool = True,
) -> RunResult:
    """Advance ``M`` steps from ``v0`` and initial velocity ``u1``.

    Pass ``u1N`` to prescribe the start right-hand side directly (``u1`` is
    then ignored).  Snapshots are taken at the levels nearest to the requested
    times; the final level is always stored.  With ``record`` set, norms are
    logged every step.
    """
    v0 = np.asarray(v0)
    if u1N is None:
        u1N = compute_u1N(u1, mesh, config)
    u1N = np.asarray(u1N)
    snap_levels = {round(t / config.tau) for t in snapshot_times} | {0, config.M}
    bad = [m for m in snap_levels if m < 0 or m > config.M]
    if bad:
        raise ValueError(f"snapshot times outside [0, T]: levels {bad}")

    st = _stepper(mesh, config)
    use_sN = record and sn_form_status(mesh).available
    neg_lam = -st.lam
    n_levels = config.M + 1
    hist = {}
    if record:
        hist = {k: np.full(n_levels, np.nan) for k in ("l2h", "dirichlet", "sN", "dt_sN_sq", "avg_dirichlet_sq")}

    # norms of runs approaching saturation may overflow to inf
    @np.errstate(over="ignore", invalid="ignore")
    def log_level(m, v):
        hist["l2h"][m] = math.sqrt(max(np.real(inner_product(v, v, mesh)), 0.0))
        hist["dirichlet"][m] = dirichlet_norm(v, mesh)
        if use_sN:
            hist["sN"][m] = math.sqrt(max(_sq_norm(v, st.sN, mesh), 0.0))

    @np.errstate(over="ignore", invalid="ignore")
    def log_pair(m, v, v_next):
        hist["avg_dirichlet_sq"][m] = _sq_norm(0.5 * (v + v_next), neg_lam, mesh)
        if use_sN:
            hist["dt_sN_sq"][m] = _sq_norm((v_next - v) / config.tau, st.sN, mesh)

    snapshots: dict[int, np.ndarray] = {}
    if 0 in snap_levels:
        snapshots[0] = v0.copy()
    state = st.first(v0, u1N)
    saturated = False
    if record:
        log_level(0, v0)
        log_pair(0, v0, state.v_curr)
    while True:
        m = state.m
        v = state.v_curr
        peak = np.max(np.abs(v)) if v.size else 0.0
        if not peak <= SATURATION:
            saturated = True
            break
        if m in snap_levels:
            snapshots[m] = v.copy()
        if record:
            log_level(m, v)
        if m == config.M:
            break
        nxt = st.advance(state)
        if record:
            log_pair(m, v, nxt.v_curr)
        state = nxt
    if record and saturated:
        for k in hist:
            hist[k] = hist[k][: state.m]
    return RunResult(mesh, config, v0.copy(), u1N.copy(), snapshots, hist, state, saturated)


@dataclass(frozen=True)
class EnergyHistory:
    """Per-level sides of the strong and weak stability bounds (uniform-mesh norms).

    ``strong_lhs[m] = eps0^2 ||d_t v^m||_{sN}^2 + a^2 ||(v^m + v^{m+1})/2||_{-Lambda}^2``
    ``weak_lhs[m]   = eps0 ||v^m||_{sN}``
    """

    strong_lhs: np.ndarray
    strong_rhs: float
    weak_lhs: np.ndarray
    weak_rhs: float
    dirichlet_avg_sq: np.ndarray = field(repr=False)

    @property
    def strong_holds(self) -> bool:
        lhs = self.strong_lhs[np.isfinite(self.strong_lhs)]
        return bool(np.all(lhs <= self.strong_rhs * (1 + 1e-12)))

    @property
    def weak_holds(self) -> bool:
        lhs = self.weak_lhs[np.isfinite(self.weak_lhs)]
        return bool(np.all(lhs <= self.weak_rhs * (1 + 1e-12)))


def energy_history(result: RunResult, eps0: float) -> EnergyHistory:
    """Evaluate both stability functionals on a recorded run.

    The ``s_N``-normed terms are NaN on meshes where that form is not a norm.
    """
    mesh, cfg = result.mesh, result.config
    if not result.history:
        raise ValueError("run was not recorded; call run(..., record=True)")
    a2 = cfg.a**2
    lam = assemble_lambda(mesh)
    sN_ok = sn_form_status(mesh).available
    h = result.history
    strong_lhs = eps0**2 * h["dt_sN_sq"] + a2 * h["avg_dirichlet_sq"]
    v0_dir = _sq_norm(result.v0, -lam, mesh)
    if sN_ok:
        u1n_sn_sq = _sq_norm(result.u1N, assemble_sN(mesh), mesh)
        v0_sn = math.sqrt(max(_sq_norm(result.v0, assemble_sN(mesh), mesh), 0.0))
    else:
        u1n_sn_sq = v0_sn = float("nan")
    strong_rhs = a2 * v0_dir + u1n_sn_sq / eps0**2
    z = tridiag_solve(-lam, result.u1N)
    u1n_inv = math.sqrt(max(np.real(inner_product(z, result.u1N, mesh)), 0.0))
    weak_rhs = v0_sn + 2.0 / cfg.a * u1n_inv
    weak_lhs = eps0 * h["sN"]
    return EnergyHistory(strong_lhs, strong_rhs, weak_lhs, weak_rhs, h["avg_dirichlet_sq"])
