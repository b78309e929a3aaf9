"""Non-uniform 1D meshes with exact rational steps.

A mesh on ``[0, X]`` is stored as integer step numerators over one common
integer denominator, so node positions, step sums and the mirrored-block
refinement family are all exact.  Floating-point views (``h``, ``x``,
``hhat``) are derived once, each step being rounded a single time.

Vectors living on a mesh ("interior vectors") carry values at the
``N - 1`` interior nodes only; boundary values are implicitly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import MeshError

__all__ = [
    "Mesh",
    "MeshFamilySpec",
    "StepRatioReport",
    "CRITICAL_STEPS",
    "CRITICAL_DENOMINATOR",
    "critical_mesh",
    "uniform_mesh",
    "from_steps",
    "extend_mesh",
    "extend_function",
    "step_ratio_range",
    "format_mesh",
    "parse_mesh",
    "parse_steps",
    "read_mesh",
    "write_mesh",
]

#: Step numerators of the 14-interval mesh on [0, 1] with complex pencil eigenvalues.
CRITICAL_STEPS = (2, 2, 1, 4, 2, 1, 3, 3, 6, 5, 6, 5, 6, 5)
CRITICAL_DENOMINATOR = 51


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True, eq=True)
class Mesh:
    """Mesh ``0 = x_0 < ... < x_N = X`` with steps ``numerators[j] / denominator``.

    The representation is canonical: numerators and denominator are reduced by
    their common gcd, so two meshes with equal steps compare equal.
    """

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        nums = tuple(int(n) for n in self.numerators)
        den = int(self.denominator)
        if len(nums) < 2:
            raise MeshError(f"a mesh needs at least 2 intervals, got {len(nums)}")
        if den <= 0:
            raise MeshError(f"denominator must be positive, got {den}")
        bad = [j + 1 for j, n in enumerate(nums) if n <= 0]
        if bad:
            raise MeshError(f"non-positive step numerators at steps {bad}")
        g = math.gcd(den, *nums)
        object.__setattr__(self, "numerators", tuple(n // g for n in nums))
        object.__setattr__(self, "denominator", den // g)

    # exact views ---------------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.numerators)

    @property
    def X(self) -> Fraction:
        return Fraction(sum(self.numerators), self.denominator)

    @property
    def steps(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.denominator) for n in self.numerators)

    @property
    def nodes(self) -> tuple[Fraction, ...]:
        acc = 0
        out = [Fraction(0)]
        for n in self.numerators:
            acc += n
            out.append(Fraction(acc, self.denominator))
        return tuple(out)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.numerators)) == 1

    # floating-point views --------------------------------------------------

    @cached_property
    def h(self) -> np.ndarray:
        """Steps ``h_1..h_N`` as floats."""
        h = np.array(self.numerators, dtype=float) / self.denominator
        h.setflags(write=False)
        return h

    @cached_property
    def x(self) -> np.ndarray:
        """All nodes ``x_0..x_N`` as floats (each rounded once from its exact value)."""
        x = np.cumsum([0, *self.numerators]).astype(float) / self.denominator
        x.setflags(write=False)
        return x

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]

    @cached_property
    def hhat(self) -> np.ndarray:
        """Half-sums ``(h_j + h_{j+1}) / 2`` at interior nodes ``j = 1..N-1``."""
        nums = np.array(self.numerators, dtype=float)
        hh = (nums[:-1] + nums[1:]) / (2.0 * self.denominator)
        hh.setflags(write=False)
        return hh

    @property
    def h_max(self) -> float:
        return max(self.numerators) / self.denominator

    @property
    def h_min(self) -> float:
        return min(self.numerators) / self.denominator

    @property
    def mean_step(self) -> Fraction:
        return self.X / self.N

    def reversed(self) -> "Mesh":
        return Mesh(self.numerators[::-1], self.denominator)

    def to_full(self, w: np.ndarray) -> np.ndarray:
        """Pad an interior vector with the zero boundary values."""
        w = np.asarray(w)
        if w.shape[0] != self.N - 1:
            raise ValueError(f"expected {self.N - 1} interior values, got {w.shape[0]}")
        out = np.zeros((self.N + 1,) + w.shape[1:], dtype=w.dtype)
        out[1:-1] = w
        return out

    def __repr__(self) -> str:
        return f"Mesh(N={self.N}, X={self.X}, steps={self.numerators}/{self.denominator})"


@dataclass(frozen=True)
class MeshFamilySpec:
    """Base mesh and multiplicity ``K`` of the mirrored-block family."""

    base: Mesh
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise MeshError(f"refinement multiplicity K must be an integer >= 1, got {self.K}")


def uniform_mesh(X, N: int) -> Mesh:
    """Uniform mesh with ``N`` equal steps on ``[0, X]``."""
    if int(N) != N or N < 2:
        raise MeshError(f"N must be an integer >= 2, got {N}")
    X = _as_fraction(X)
    if X <= 0:
        raise MeshError(f"X must be positive, got {X}")
    return Mesh((X.numerator,) * N, X.denominator * N)


def from_steps(numerators: Sequence[int], denominator: int, X=1) -> Mesh:
    """Mesh with steps ``numerators[j] / denominator`` that must sum to ``X`` exactly."""
    X = _as_fraction(X)
    total = Fraction(sum(int(n) for n in numerators), int(denominator))
    if total != X:
        raise MeshError(
            f"steps sum to {total} but X = {X} (defect {total - X})"
        )
    return Mesh(tuple(numerators), denominator)


def critical_mesh() -> Mesh:
    """The 14-interval mesh (1/51)(2,2,1,4,2,1,3,3,6,5,6,5,6,5) on [0, 1]."""
    return from_steps(CRITICAL_STEPS, CRITICAL_DENOMINATOR, 1)


def extend_mesh(spec: MeshFamilySpec) -> Mesh:
    """Tile ``[0, X]`` with ``K`` scaled copies of the base, odd copies mirrored.

    Block ``k`` covers ``[kX/K, (k+1)X/K]``; even blocks repeat the base steps
    scaled by ``1/K``, odd blocks repeat them in reverse order.
    """
    base, K = spec.base, spec.K
    nums: list[int] = []
    for k in range(K):
        nums.extend(base.numerators if k % 2 == 0 else base.numerators[::-1])
    mesh = Mesh(tuple(nums), base.denominator * K)
    nodes = mesh.nodes
    if any(b <= a for a, b in zip(nodes, nodes[1:])) or nodes[-1] != base.X:
        raise AssertionError("internal error: extended mesh nodes are not increasing")
    return mesh


def extend_function(w, spec: MeshFamilySpec) -> np.ndarray:
    """Extension operator from base interior vectors to family interior vectors.

    On block ``2k`` the values copy ``w``; on block ``2k - 1`` they are the
    negated, index-reversed values, so the result vanishes at every block
    junction ``kX/K``.
    """
    w = np.asarray(w)
    n0 = spec.base.N
    if w.shape[0] != n0 - 1:
        raise ValueError(f"expected {n0 - 1} base interior values, got {w.shape[0]}")
    full = spec.base.to_full(w)
    mirrored = -full[::-1]
    blocks = [full[:-1] if k % 2 == 0 else mirrored[:-1] for k in range(spec.K)]
    out = np.concatenate(blocks, axis=0)
    # drop x_0 (block 0 starts with the zero boundary value); x_N is not included
    return out[1:]


@dataclass(frozen=True)
class StepRatioReport:
    min_ratio: Fraction
    max_ratio: Fraction
    in_band: bool


def _ratio_in_golden_band(r: Fraction) -> bool:
    # 2/(sqrt5+1) <= r <= (sqrt5+1)/2, decided exactly via squares
    upper_ok = (2 * r - 1) <= 0 or (2 * r - 1) ** 2 < 5
    lower_ok = (2 * r + 1) ** 2 > 5
    return upper_ok and lower_ok


def step_ratio_range(mesh: Mesh) -> StepRatioReport:
    """Exact min/max of ``h_{j+1}/h_j`` and whether all lie in the golden-ratio band.

    The band is where the outer averaging weights stay non-negative.
    """
    nums = mesh.numerators
    ratios = [Fraction(b, a) for a, b in zip(nums, nums[1:])]
    return StepRatioReport(
        min_ratio=min(ratios),
        max_ratio=max(ratios),
        in_band=all(_ratio_in_golden_band(r) for r in ratios),
    )


# text format ------------------------------------------------------------------

def format_mesh(mesh: Mesh) -> str:
    nums = " ".join(str(n) for n in mesh.numerators)
    return f"X {mesh.X}\nsteps {nums} / {mesh.denominator}\n"


def parse_mesh(text: str) -> Mesh:
    """Parse the two-line ``X <rational>`` / ``steps n1 ... / den`` format."""
    X = None
    steps = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "X":
            try:
                X = Fraction(rest.strip())
            except ValueError as exc:
                raise MeshError(f"line {lineno}: bad X value {rest!r}") from exc
        elif key == "steps":
            nums, slash, den = rest.partition("/")
            if not slash:
                raise MeshError(f"line {lineno}: steps line needs '/ <denominator>'")
            try:
                steps = ([int(t) for t in nums.split()], int(den))
            except ValueError as exc:
                raise MeshError(f"line {lineno}: bad steps line {rest!r}") from exc
        else:
            raise MeshError(f"line {lineno}: unknown key {key!r}")
    if X is None or steps is None:
        raise MeshError("mesh text needs both an 'X' line and a 'steps' line")
    return from_steps(steps[0], steps[1], X)


def read_mesh(path) -> Mesh:
    return parse_mesh(Path(path).read_text())


def write_mesh(mesh: Mesh, path) -> None:
    Path(path).write_text(format_mesh(mesh))


def parse_steps(spec: str) -> Mesh:
    """Parse an inline ``"n1,n2,...,nk/den"`` step list on ``[0, sum/den]``."""
    nums, slash, den = spec.partition("/")
    try:
        numerators = [int(t) for t in nums.replace(",", " ").split()]
        denominator = int(den) if slash else sum(numerators)
    except ValueError as exc:
        raise MeshError(f"bad inline step list {spec!r}") from exc
    return Mesh(tuple(numerators), denominator)

