"""Experiment configuration: INI-style sections of flat ``key = value`` pairs.

Example::

    [mesh]
    source = steps:2 2 1 4 2 1 3 3 6 5 6 5 6 5/51
    K = 20

    [scheme]
    a = 1.0
    sigma = 1/12
    tau_rule = 0.01
    T = 2.0 4.0

    [output]
    dir = out

Mesh sources are ``critical``, ``uniform:<N>[:<X>]``, ``steps:<n1 n2 ...>/<den>``
and ``file:<path>``.  Mesh numbers are parsed as exact rationals, the rest
as floats (a rational such as ``1/12`` is accepted and converted).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from fractions import Fraction

from .mesh import Mesh, critical_mesh, parse_steps, read_mesh, uniform_mesh

__all__ = ["ExperimentConfig", "resolve_mesh", "parse_real", "parse_complex"]


def parse_real(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return float(Fraction(text))


def parse_complex(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(parse_real(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def resolve_mesh(source: str) -> Mesh:
    kind, _, arg = source.strip().partition(":")
    if kind == "critical":
        return critical_mesh()
    if kind == "uniform":
        n, _, X = arg.partition(":")
        return uniform_mesh(Fraction(X) if X else 1, int(n))
    if kind == "steps":
        return parse_steps(arg)
    if kind == "file":
        return read_mesh(arg)
    raise ValueError(f"unknown mesh source {source!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    # [mesh]
    mesh: str = "critical"
    K: int = 1
    # [scheme]
    a: float = 1.0
    sigma: float = 1.0 / 12.0
    tau: float | None = None
    tau_rule: float | None = 0.01
    T: tuple[float, ...] = (2.0,)
    M: int | None = None
    snapshots: tuple[float, ...] = ()
    u0: str = "bump"
    # [experiment]
    K_list: tuple[int, ...] = (20, 40, 60, 80)
    mode: str = "fixed-M"
    eps0: float | None = None
    kappa: float = 0.0
    lam: complex | None = None
    taus: tuple[float, ...] = ()
    n0: tuple[int, ...] = (2, 8)
    alphabet: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    budget: int | None = 100_000
    include: tuple[tuple[int, ...], ...] = ()
    workers: int = 1
    # [output]
    out: str = "out"

    _SECTIONS = {
        "mesh": ("mesh", "K"),
        "scheme": ("a", "sigma", "tau", "tau_rule", "T", "M", "snapshots", "u0"),
        "experiment": (
            "K_list", "mode", "eps0", "kappa", "lam", "taus", "n0", "alphabet",
            "budget", "include", "workers",
        ),
        "output": ("out",),
    }
    _INI_NAMES = {"mesh": "source", "out": "dir"}
    _OPTIONAL = frozenset({"tau", "tau_rule", "M", "eps0", "lam", "budget"})

    def resolve_mesh(self) -> Mesh:
        return resolve_mesh(self.mesh)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    # serialization -----------------------------------------------------------

    def _encode(self, name: str) -> str | None:
        v = getattr(self, name)
        if v is None:
            return "none"
        if name == "include":
            return "; ".join(" ".join(map(str, s)) for s in v)
        if name in ("T", "snapshots", "taus"):
            return _fmt_floats(v)
        if name in ("K_list", "n0", "alphabet"):
            return " ".join(map(str, v))
        if name == "lam":
            return repr(complex(v)).strip("()")
        if isinstance(v, float):
            return repr(v)
        return str(v)

    @classmethod
    def _decode(cls, name: str, text: str):
        text = text.strip()
        if name in cls._OPTIONAL and text.lower() == "none":
            return None
        if name in ("mesh", "u0", "mode", "out"):
            return text
        if name in ("K", "M", "budget", "workers"):
            return int(text)
        if name in ("a", "sigma", "tau", "tau_rule", "eps0", "kappa"):
            return parse_real(text)
        if name in ("T", "snapshots", "taus"):
            return _floats(text)
        if name in ("K_list", "n0", "alphabet"):
            return _ints(text)
        if name == "lam":
            return parse_complex(text)
        if name == "include":
            return tuple(_ints(part) for part in text.split(";") if part.strip())
        raise KeyError(name)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for section, names in self._SECTIONS.items():
            cp.add_section(section)
            for name in names:
                cp.set(section, self._INI_NAMES.get(name, name), self._encode(name))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read_string(text)
        values = {}
        for section, names in cls._SECTIONS.items():
            if not cp.has_section(section):
                continue
            ini_to_name = {cls._INI_NAMES.get(n, n): n for n in names}
            for key, raw in cp.items(section):
                if key not in ini_to_name:
                    raise ValueError(f"unknown key {key!r} in section [{section}]")
                name = ini_to_name[key]
                values[name] = cls._decode(name, raw)
        unknown = set(cp.sections()) - set(cls._SECTIONS)
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        return cls(**values)

