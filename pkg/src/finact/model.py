"""Plant model: a fin magnet on an elastic beam between two fixed magnets.

Everything here is expressed per unit of effective moving mass, so forces
are accelerations (m/s^2) and the magnetic constants carry units of
N·m^4/kg.  The two fixed magnets (and the solenoids wound around them) sit
at -x0 and +x0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import SingularityError, UnsupportedConfigurationError

#: Minimum allowed distance (m) between the fin magnet and a fixed magnet.
EPS_SING = 1e-6

# Reference prototype values.
TABLE1_C = 2.919e-9
TABLE1_K = 439.3
TABLE1_X0 = 1e-2
TABLE1_GAMMA_MAX = 20.96
TABLE1_MASS = 0.0843


@dataclass(frozen=True)
class SystemParams:
    """Normalized plant parameters.

    c1 is the constant of the magnet at -x0, c2 the one at +x0.  ``cs`` is
    the solenoid gain per unit mass and per ampere.
    """

    c1: float
    c2: float
    k: float
    gamma: float = 0.0
    x0: float = TABLE1_X0
    alpha: int = 4
    cs: float = 0.0
    eps_sing: float = EPS_SING

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError(f"x0 must be positive, got {self.x0}")
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not 0 <= self.eps_sing < self.x0:
            raise ValueError("eps_sing must lie in [0, x0)")

    @property
    def x1(self) -> float:
        return -self.x0

    @property
    def x2(self) -> float:
        return self.x0

    @property
    def symmetric(self) -> bool:
        return self.c1 == self.c2

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @classmethod
    def symmetric_params(cls, c: float, k: float, **kw) -> "SystemParams":
        return cls(c1=c, c2=c, k=k, **kw)


def table1_params(gamma: float = 0.0, **kw) -> SystemParams:
    """Reference plant: c = 2.919e-9, k = 439.3, x0 = 1 cm."""
    return SystemParams(c1=TABLE1_C, c2=TABLE1_C, k=TABLE1_K, gamma=gamma, x0=TABLE1_X0, **kw)


class State(NamedTuple):
    x: float
    v: float


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional plant constants.

    Geometry (x0, alpha) and the solenoid constant Cs (N·m^4/A) ride along
    so that :func:`normalize` can produce a complete :class:`SystemParams`.
    """

    C1: float
    C2: float
    K: float
    Gamma: float
    m: float
    x0: float = TABLE1_X0
    alpha: int = 4
    Cs: float = 0.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.K < 0 or self.Gamma < 0:
            raise ValueError("K and Gamma must be non-negative")


def normalize(pp: PhysicalParams, eps_sing: float = EPS_SING) -> SystemParams:
    m = pp.m
    return SystemParams(
        c1=pp.C1 / m,
        c2=pp.C2 / m,
        k=pp.K / m,
        gamma=pp.Gamma / m,
        x0=pp.x0,
        alpha=pp.alpha,
        cs=pp.Cs / m,
        eps_sing=eps_sing,
    )


def magnetic_force(x: float, xi: float, ci: float, alpha: int = 4, eps: float = EPS_SING) -> float:
    """Point-dipole force per unit mass exerted by a magnet sitting at ``xi``.

    Positive ``ci`` attracts the fin magnet toward ``xi``.

    Raises
    ------
    SingularityError
        If ``|x - xi| <= eps`` (or the positions coincide).
    """
    d = x - xi
    ad = abs(d)
    if ad == 0.0 or ad <= eps:
        raise SingularityError(f"fin magnet at x={x!r} is within {eps:g} m of the magnet at {xi!r}")
    return -ci * math.copysign(1.0, d) / ad**alpha


def acceleration(x: float, v: float, p: SystemParams, current: float = 0.0, force: float = 0.0) -> float:
    """dv/dt of the plant including an external force per unit mass ``force``."""
    a = p.alpha
    x0 = p.x0
    eps = p.eps_sing
    acc = magnetic_force(x, x0, p.c2, a, eps) + magnetic_force(x, -x0, p.c1, a, eps)
    if current:
        # anti-parallel coils co-located with the magnets: c_s2 = -c_s1 = cs*I
        csi = p.cs * current
        acc += magnetic_force(x, x0, csi, a, eps) + magnetic_force(x, -x0, -csi, a, eps)
    return acc + force - p.k * x - p.gamma * v


def make_acceleration(p: SystemParams):
    """Return ``f(x, v, force, current) -> dv/dt`` bound to ``p``.

    Same arithmetic as :func:`acceleration` with the parameter lookups
    hoisted out, for use in integrator inner loops.
    """
    a = p.alpha
    x0 = p.x0
    eps = p.eps_sing
    c1, c2, cs, k, g = p.c1, p.c2, p.cs, p.k, p.gamma

    def f(x: float, v: float, force: float = 0.0, current: float = 0.0) -> float:
        d2 = x0 - x
        d1 = x + x0
        if d2 <= eps or d1 <= eps:
            raise SingularityError(f"fin magnet at x={x!r} is within {eps:g} m of a magnet")
        acc = (c2 + cs * current) / d2**a - (c1 - cs * current) / d1**a
        return acc + force - k * x - g * v

    return f


def rhs(s: State, p: SystemParams, current: float = 0.0, force: float = 0.0) -> tuple[float, float]:
    """State derivative (dx/dt, dv/dt)."""
    x, v = s
    return v, acceleration(x, v, p, current, force)


def total_energy(s: State, p: SystemParams) -> float:
    """Energy per unit mass of the unforced, undamped plant (alpha = 4 only)."""
    if p.alpha != 4:
        raise UnsupportedConfigurationError("total_energy is only defined for alpha == 4")
    x, v = s
    x0 = p.x0
    if abs(x - x0) <= p.eps_sing or abs(x + x0) <= p.eps_sing:
        raise SingularityError(f"x={x!r} inside the singularity guard")
    return (0.5 * v * v + 0.5 * p.k * x * x
            + p.c2 / (3.0 * (x - x0) ** 3) - p.c1 / (3.0 * (x + x0) ** 3))
