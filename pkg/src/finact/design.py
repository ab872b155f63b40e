"""Component sizing: magnets, beam stiffness, damping range and coil turns."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SingularityError

MU0 = 4e-7 * math.pi

# Reference geometry: a 2 mm x 2 mm NdFeB cylinder and a coil snugly wound
# around it.
REF_BR = 1.0
REF_RADIUS = 2e-3
REF_LENGTH = 2e-3
REF_TURN_AREA = math.pi * (5e-3) ** 2
REF_CURRENT = 20e-3

# Low-density polyethylene fin between supports 30 mm apart.
LDPE_E = 0.2e9
FIN_WIDTH = 10e-3
FIN_THICKNESS = 0.5e-3
SUPPORT_SPAN = 30e-3

#: fin + magnet mass scaled by the x300 added-mass factor
EFFECTIVE_MASS = 0.0843
ADDED_MASS_FACTOR = 300.0


@dataclass(frozen=True)
class MagnetSpec:
    """Axially magnetized cylinder: remanence Br (T), radius R and length ell (m)."""

    Br: float = REF_BR
    R: float = REF_RADIUS
    ell: float = REF_LENGTH

    def __post_init__(self):
        if not (self.Br > 0 and self.R > 0 and self.ell > 0):
            raise ValueError("magnet remanence and dimensions must be positive")

    @property
    def volume(self) -> float:
        return math.pi * self.R**2 * self.ell

    @property
    def moment(self) -> float:
        """Dipole moment (A·m^2)."""
        return self.Br / MU0 * self.volume


@dataclass(frozen=True)
class BeamSpec:
    E: float = LDPE_E
    width: float = FIN_WIDTH
    thickness: float = FIN_THICKNESS
    L: float = SUPPORT_SPAN
    y: float = SUPPORT_SPAN / 2

    def __post_init__(self):
        if not (self.E > 0 and self.width > 0 and self.thickness > 0 and self.L > 0):
            raise ValueError("beam modulus and dimensions must be positive")

    @property
    def I_area(self) -> float:
        """Second moment of area of the rectangular section."""
        return self.width * self.thickness**3 / 12.0


@dataclass(frozen=True)
class SolenoidSpec:
    N: int = 1
    I_max: float = REF_CURRENT
    A_turn: float = REF_TURN_AREA

    def __post_init__(self):
        if self.N < 1 or not self.I_max > 0 or not self.A_turn > 0:
            raise ValueError("solenoid needs N >= 1, I_max > 0 and A_turn > 0")


def magnet_constant(ms: MagnetSpec) -> float:
    """Dipole-dipole force constant C (N·m^4) between two identical magnets."""
    return 3.0 * MU0 / (2.0 * math.pi) * (ms.Br / MU0) ** 2 * ms.volume**2


def beam_stiffness(bs: BeamSpec) -> float:
    """Stiffness (N/m) at position y of a beam simply supported at 0 and L."""
    L, y = bs.L, bs.y
    if not 0 < y < L:
        raise ValueError(f"fin magnet position y={y!r} must lie strictly between the supports (0, {L!r})")
    return bs.E * bs.I_area * 3.0 * L / (y**2 * (L - y) ** 2)


def damping_from_Q(Q: float, k: float) -> float:
    """Damping per unit mass for damping ratio Q (Q = 1 is critical)."""
    if Q < 0:
        raise ValueError("damping ratio must be non-negative")
    return 2.0 * Q * math.sqrt(k)


def solenoid_geometry_factor(x_m: float, x0: float) -> float:
    """Position gain G (1/m^4) of the two anti-parallel coils at ±x0."""
    if not abs(x_m) < x0:
        raise SingularityError(f"|x_m|={abs(x_m)!r} must be below x0={x0!r}")
    return ((x_m + x0) ** 4 + (x_m - x0) ** 4) / (x_m**2 - x0**2) ** 4


def coil_force_constant(ms: MagnetSpec) -> float:
    """The (3/2)·Br·R²·ell prefactor of the coil force law (T·m^3)."""
    return 1.5 * ms.Br * ms.R**2 * ms.ell


def solenoid_force(N: float, I: float, ms: MagnetSpec, A_turn: float, x_m: float, x0: float) -> float:
    """Net force (N) of both coils on the fin magnet at ``x_m``."""
    return coil_force_constant(ms) * N * I * A_turn * solenoid_geometry_factor(x_m, x0)


def solenoid_turns(F_m: float, I: float, ms: MagnetSpec, A_turn: float, x_m: float, x0: float) -> int:
    """Turns needed to produce force ``F_m`` (N) at ``x_m`` with current ``I``.

    ``F_m`` is a physical force: multiply a per-unit-mass controller output
    by the effective mass first.
    """
    if F_m < 0:
        raise ValueError("F_m must be non-negative")
    if not (I > 0 and A_turn > 0):
        raise ValueError("current and turn area must be positive")
    per_turn = solenoid_force(1.0, I, ms, A_turn, x_m, x0)
    if per_turn == 0:  # pragma: no cover - guarded by the checks above
        raise ZeroDivisionError("coil produces no force")
    return int(math.ceil(F_m / per_turn))
