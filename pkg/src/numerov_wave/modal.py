"""Scalar growth theory for one eigenmode of the compact scheme.

For an eigenpair ``-Lambda e = lam s_N e`` the scheme reduces to the
three-term recursion ``y^{m+1} - 2 mu y^m + y^{m-1} = 0`` with

    alpha = sigma tau^2 a^2 lam
    mu    = (1 + (sigma - 1/2) tau^2 a^2 lam) / (1 + alpha)

whose characteristic roots ``q`` and ``1/q`` decide modal growth.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SIGMA_NUMEROV",
    "ModalParams",
    "AmplificationResult",
    "ModalTrajectory",
    "GrowthPrediction",
    "ConditionCheck",
    "NecessaryConditions",
    "amplification",
    "kappa0",
    "modal_recursion",
    "growth_prediction",
    "necessary_conditions",
    "write_modal_report",
]

SIGMA_NUMEROV = 1.0 / 12.0
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class ModalParams:
    lam: complex
    tau: float
    a: float = 1.0
    sigma: float = SIGMA_NUMEROV

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def alpha(self) -> complex:
        return self.sigma * self.tau**2 * self.a**2 * self.lam

    @property
    def mu(self) -> complex:
        one_plus_alpha = 1.0 + self.alpha
        if one_plus_alpha == 0:
            raise ZeroDivisionError("pole: sigma tau^2 a^2 lambda = -1")
        return (1.0 + (self.sigma - 0.5) * self.tau**2 * self.a**2 * self.lam) / one_plus_alpha


@dataclass(frozen=True)
class AmplificationResult:
    mu: complex
    q: complex
    q_inv: complex
    abs_q: float
    degenerate: bool


def amplification(params: ModalParams) -> AmplificationResult:
    """Roots of ``q^2 - 2 mu q + 1 = 0``; ``q`` is the one with ``|q| >= 1``.

    When both roots lie on the unit circle the one with non-negative
    imaginary part is returned as ``q``.
    """
    mu = params.mu
    root = cmath.sqrt((mu - 1.0) * (mu + 1.0))
    q1, q2 = mu + root, mu - root
    # the larger root is computed without cancellation; the other is its inverse
    q = q1 if abs(q1) >= abs(q2) else q2
    q_inv = 1.0 / q
    if abs(abs(q) - 1.0) <= 1e-14 and q.imag < 0:
        q, q_inv = q_inv, q
    degenerate = abs(mu - 1.0) <= DEGENERATE_TOL or abs(mu + 1.0) <= DEGENERATE_TOL
    return AmplificationResult(mu, q, q_inv, abs(q), degenerate)


def kappa0(lam: complex, a: float = 1.0) -> float:
    """Leading growth rate ``(a / sqrt 2) sqrt(|lam| - Re lam)`` of ``|q|`` in ``tau``."""
    lam = complex(lam)
    r = abs(lam)
    if lam.real > 0:
        # |lam| - Re lam without cancellation
        gap = lam.imag**2 / (r + lam.real)
    else:
        gap = r - lam.real
    return a / math.sqrt(2.0) * math.sqrt(gap)


@dataclass(frozen=True)
class ModalTrajectory:
    params: ModalParams
    c0: complex
    c1: complex
    values: np.ndarray
    a_plus: complex | None = None
    a_minus: complex | None = None
    explicit: np.ndarray | None = field(default=None, repr=False)

    @property
    def discrepancy(self) -> float | None:
        """Max gap between recursion and closed form, relative to the running envelope.

        None when ``mu = +-1`` (no closed form is built).
        """
        if self.explicit is None:
            return None
        envelope = np.maximum.accumulate(np.abs(self.explicit))
        gap = np.abs(self.values - self.explicit)
        mask = envelope > 0
        if not mask.any():
            return float(np.max(gap))
        return float(np.max(gap[mask] / envelope[mask]))


def modal_recursion(params: ModalParams, c0: complex, c1: complex, M: int) -> ModalTrajectory:
    """Run ``y^0 = c0``, ``y^1 = mu c0 + c1 / (1 + alpha)`` and the three-term recursion to ``M``.

    ``c1`` is the scaled initial-velocity datum: a scheme run started from
    ``u_{1N} = c s_N e`` corresponds to ``c1 = tau * c``.
    """
    amp = amplification(params)
    mu = amp.mu
    one_plus_alpha = 1.0 + params.alpha
    y = np.empty(M + 1, dtype=complex)
    y[0] = c0
    if M >= 1:
        y[1] = mu * c0 + c1 / one_plus_alpha
    for m in range(1, M):
        y[m + 1] = 2.0 * mu * y[m] - y[m - 1]
    if amp.degenerate:
        return ModalTrajectory(params, complex(c0), complex(c1), y)
    q = amp.q
    w = q / (q * q - 1.0) * c1 / one_plus_alpha
    a_plus = 0.5 * c0 + w
    a_minus = 0.5 * c0 - w
    m = np.arange(M + 1)
    explicit = a_plus * q**m + a_minus * amp.q_inv**m
    return ModalTrajectory(params, complex(c0), complex(c1), y, a_plus, a_minus, explicit)


@dataclass(frozen=True)
class GrowthPrediction:
    M: int
    exact: float  # |q|^M
    asymptotic: float  # exp(kappa0 T)

    @property
    def ratio(self) -> float:
        return self.exact / self.asymptotic


def growth_prediction(params: ModalParams, T: float) -> GrowthPrediction:
    M = round(T / params.tau)
    if M < 1 or abs(M * params.tau - T) > 1e-9 * T:
        raise ValueError(f"T = {T} is not an integer multiple of tau = {params.tau}")
    amp = amplification(params)
    exact = math.exp(M * math.log(amp.abs_q)) if amp.abs_q > 0 else 0.0
    return GrowthPrediction(M, exact, math.exp(kappa0(params.lam, params.a) * T))


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def passed(self, rtol: float = 1e-12) -> bool:
        return self.margin >= -rtol * max(1.0, abs(self.rhs))


@dataclass(frozen=True)
class NecessaryConditions:
    """Sharp forms (asymptotic remainders dropped) of the modal stability conditions."""

    step_bound: ConditionCheck  # (1/6) a^2 tau^2 max(|Re|, 2|Im|) <= 1
    imag_bound: ConditionCheck  # a^2 |Im lam| tau <= (9/2) kappa
    spectral: ConditionCheck  # |q| <= 1 + kappa tau

    @property
    def checks(self) -> tuple[ConditionCheck, ...]:
        return (self.step_bound, self.imag_bound, self.spectral)

    @property
    def all_passed(self) -> bool:
        return all(c.passed() for c in self.checks)


def necessary_conditions(params: ModalParams, kappa: float = 0.0) -> NecessaryConditions:
    lam, tau, a = params.lam, params.tau, params.a
    step = ConditionCheck(
        "step_bound", a**2 * tau**2 * max(abs(lam.real), 2.0 * abs(lam.imag)) / 6.0, 1.0
    )
    imag = ConditionCheck("imag_bound", a**2 * abs(lam.imag) * tau, 4.5 * kappa)
    spectral = ConditionCheck("spectral", amplification(params).abs_q, 1.0 + kappa * tau)
    return NecessaryConditions(step, imag, spectral)


def write_modal_report(rows: list[ModalParams], path, kappa: float = 0.0) -> None:
    """CSV with one line per parameter set: roots, kappa0 and the three condition margins."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([
            "re_lambda", "im_lambda", "tau", "sigma", "re_q", "im_q", "abs_q", "kappa0",
            "step_margin", "imag_margin", "spectral_margin", "all_pass",
        ])
        for p in rows:
            amp = amplification(p)
            nc = necessary_conditions(p, kappa)
            out.writerow([
                repr(float(p.lam.real)), repr(float(p.lam.imag)), repr(float(p.tau)), repr(float(p.sigma)),
                repr(float(amp.q.real)), repr(float(amp.q.imag)), repr(float(amp.abs_q)), repr(float(kappa0(p.lam, p.a))),
                repr(float(nc.step_bound.margin)), repr(float(nc.imag_bound.margin)),
                repr(float(nc.spectral.margin)), int(nc.all_passed),
            ])
