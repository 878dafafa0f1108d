"""The quintic reaction term and its steady-state / stability analysis.

The source is ``f(u) = -u (u-1) (u-a) (u-b) (u-c)`` with ``0 < a < b < c < 1``.
Its zeros 0, a, b, c, 1 alternate stable/unstable, so the reaction drives
each pixel to one of the three attractors 0, b or 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .grid import GridSpec

# max |f| over u, a, b, c in [0, 1]; attained at a = b = c = 1, u = 1/5
MAX_ABS_SOURCE = 256.0 / 3125.0


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    a: float = 0.5
    b: float = 0.65
    c: float = 0.7
    c_D: float = 0.01
    c_S: float = 1.0
    dt: float = 1.0
    max_steps: int = 100
    steady_tol: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.a < self.b < self.c < 1.0):
            raise ParameterError(
                f"roots must satisfy 0 < a < b < c < 1, got a={self.a}, b={self.b}, c={self.c}")
        if self.c_D < 0 or self.c_S < 0:
            raise ParameterError("c_D and c_S must be non-negative")
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.max_steps < 0:
            raise ParameterError("max_steps must be non-negative")
        if self.steady_tol < 0:
            raise ParameterError("steady_tol must be non-negative")

    @property
    def roots(self) -> tuple[float, float, float, float, float]:
        return (0.0, self.a, self.b, self.c, 1.0)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


class Equilibrium(NamedTuple):
    root: float
    stability: str  # "stable" | "unstable"


@dataclass(frozen=True)
class StabilityReport:
    lhs: float
    rhs: float
    satisfied: bool
    ratio: float


def quintic(u, a, b, c):
    """``-u (u-1) (u-a) (u-b) (u-c)`` for arbitrary roots, no validation."""
    return -u * (u - 1.0) * (u - a) * (u - b) * (u - c)


def source(u, p: ModelParams):
    """Reaction term at ``u`` (scalar or array)."""
    return quintic(u, p.a, p.b, p.c)


def source_derivative(u, p: ModelParams):
    """Analytic derivative of :func:`source` with respect to ``u``."""
    roots = p.roots
    total = 0.0
    for k in range(5):
        term = 1.0
        for j, r in enumerate(roots):
            if j != k:
                term = term * (u - r)
        total = total + term
    return -total


def classify_equilibria(p: ModelParams) -> list[Equilibrium]:
    """The five zeros of the source with the sign of f' at each.

    f'(r) < 0 means a perturbation decays back to r (stable).
    """
    out = []
    for r in p.roots:
        slope = source_derivative(r, p)
        out.append(Equilibrium(r, "stable" if slope < 0 else "unstable"))
    return out


def stable_states(p: ModelParams) -> list[float]:
    return [e.root for e in classify_equilibria(p) if e.stability == "stable"]


def max_abs_source() -> float:
    return MAX_ABS_SOURCE


def check_stability(p: ModelParams, g: GridSpec) -> StabilityReport:
    """Evaluate the conservative explicit-scheme stability bound.

    The bound replaces the reaction by its worst case and reads
    ``dt * c_S * 128/3125 <= c_D * (dt/dx**2 + dt/dy**2)``.  It is sufficient,
    not necessary; an unsatisfied report is advisory.
    """
    lhs = abs(p.dt * p.c_S * MAX_ABS_SOURCE / 2.0)
    rhs = p.c_D * (p.dt / g.dx ** 2 + p.dt / g.dy ** 2)
    ratio = lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0)
    return StabilityReport(lhs=lhs, rhs=rhs, satisfied=lhs <= rhs, ratio=ratio)


def diffusion_stable(p: ModelParams, g: GridSpec) -> bool:
    """Discrete maximum principle for the diffusion part alone."""
    return 2.0 * p.dt * p.c_D * (1.0 / g.dx ** 2 + 1.0 / g.dy ** 2) <= 1.0


def phase_samples(p: ModelParams, spacing: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Samples of ``f(u)`` on ``[0, 1]`` for plotting the phase line."""
    count = int(round(1.0 / spacing)) + 1
    u = np.linspace(0.0, 1.0, count)
    return u, source(u, p)
