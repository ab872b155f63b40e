"""Fixed points of the unactuated plant and their linear stability."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IncompleteScanError
from .model import SystemParams

CENTER = "center"
SADDLE = "saddle"
STABLE_SPIRAL = "stable-spiral"
UNSTABLE_SPIRAL = "unstable-spiral"
STABLE_NODE = "stable-node"
UNSTABLE_NODE = "unstable-node"
DEGENERATE = "degenerate"

OSCILLATORY = "oscillatory"
CRITICAL = "critical"
COLLAPSED = "collapsed"

DEFAULT_GRID = 4096
DEFAULT_TOL_ROOT = 1e-12
DEGENERACY_BAND = 1e-6
CRITICAL_BAND = 1e-9


@dataclass(frozen=True)
class FixedPoint:
    x_star: float
    kind: str
    trace: float
    det: float

    @property
    def is_center_like(self) -> bool:
        """True for equilibria surrounded by (possibly decaying) rotation."""
        return self.det > 0


@dataclass(frozen=True)
class EquilibriumReport:
    fixed_points: tuple[FixedPoint, ...]
    ratio: float
    critical_ratio: float
    regime: str

    @property
    def center(self) -> FixedPoint | None:
        inner = [fp for fp in self.fixed_points if fp.is_center_like]
        return inner[0] if len(inner) == 1 else None

    @property
    def saddles(self) -> list[FixedPoint]:
        return [fp for fp in self.fixed_points if fp.kind == SADDLE]

    def to_dict(self) -> dict:
        return {
            "fixed_points": [
                {"x_star": fp.x_star, "kind": fp.kind, "trace": fp.trace, "det": fp.det}
                for fp in self.fixed_points
            ],
            "ratio": self.ratio,
            "critical_ratio": self.critical_ratio,
            "regime": self.regime,
        }


def _check_domain(x: float, p: SystemParams) -> None:
    if not -p.x0 < x < p.x0:
        raise ValueError(f"x={x!r} outside the open interval (-x0, x0) = ({-p.x0}, {p.x0})")


def equilibrium_residual(x, p: SystemParams):
    """Force balance cleared of denominators; zero exactly at equilibria.

    Positive values mean a net pull toward +x0.  Accepts scalars or arrays.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= p.x0):
        raise ValueError(f"x outside the open interval (-x0, x0) with x0={p.x0}")
    a = p.alpha
    d1 = np.abs(xa + p.x0)  # distance to the magnet at -x0
    d2 = np.abs(xa - p.x0)
    r = p.c2 * d1**a - p.c1 * d2**a - p.k * xa * (d1 * d2) ** a
    return float(r) if np.ndim(r) == 0 else r


def jacobian_scalars(x_star: float, p: SystemParams) -> tuple[float, float]:
    """Trace and determinant of the Jacobian at ``x_star``."""
    a = p.alpha
    d1 = abs(x_star + p.x0)
    d2 = abs(x_star - p.x0)
    det = p.k - a * (p.c2 / d2 ** (a + 1) + p.c1 / d1 ** (a + 1))
    return (-p.gamma if p.gamma else 0.0), det


def _kind(trace: float, det: float, k: float) -> str:
    band = DEGENERACY_BAND * k
    if abs(det) <= band:
        return DEGENERATE
    if det < 0:
        return SADDLE
    if trace == 0:
        return CENTER
    spiral = trace * trace - 4.0 * det < 0
    if trace < 0:
        return STABLE_SPIRAL if spiral else STABLE_NODE
    return UNSTABLE_SPIRAL if spiral else UNSTABLE_NODE


def classify(x_star: float, p: SystemParams) -> FixedPoint:
    _check_domain(x_star, p)
    trace, det = jacobian_scalars(x_star, p)
    return FixedPoint(x_star=float(x_star), kind=_kind(trace, det, p.k), trace=trace, det=det)


def critical_check(p: SystemParams) -> tuple[float, float, str]:
    """Return ``(c/k, x0**5/8, regime)``.

    For asymmetric magnets the mean constant is used as ``c``.
    """
    c = 0.5 * (p.c1 + p.c2)
    critical_ratio = p.x0**5 / 8.0
    ratio = c / p.k if p.k > 0 else math.inf
    if abs(ratio - critical_ratio) < CRITICAL_BAND * critical_ratio:
        regime = CRITICAL
    elif ratio < critical_ratio:
        regime = OSCILLATORY
    else:
        regime = COLLAPSED
    return ratio, critical_ratio, regime


def _bisect(f, a: float, b: float, fa: float, tol: float) -> float:
    # runs to float resolution; tol is an upper bound on the final bracket width
    for _ in range(400):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    if b - a > tol:
        raise IncompleteScanError(f"bisection stalled with bracket width {b - a:g} > {tol:g}")
    return 0.5 * (a + b)


def _hidden_pairs(residual, xs: np.ndarray, r: np.ndarray, refine: int = 16) -> bool:
    """Look for sign changes hiding between same-sign grid neighbours."""
    ar = np.abs(r)
    same = np.sign(r[:-2]) == np.sign(r[2:])
    same &= np.sign(r[1:-1]) == np.sign(r[2:])
    local_min = (ar[1:-1] < ar[:-2]) & (ar[1:-1] < ar[2:]) & same
    for i in np.nonzero(local_min)[0] + 1:
        fine = np.linspace(xs[i - 1], xs[i + 1], 2 * refine + 1)
        rf = residual(fine)
        if np.any(np.sign(rf) != np.sign(r[i])):
            return True
    return False


def _crowded(residual, a: float, b: float, refine: int = 32) -> bool:
    """True if [a, b] holds more than one root as seen on a finer grid."""
    fine = np.linspace(a, b, refine + 1)
    rf = residual(fine)
    sf = np.sign(rf)
    changes = np.count_nonzero(sf[:-1] * sf[1:] < 0) + np.count_nonzero(sf[1:-1] == 0)
    return changes > 1 or _hidden_pairs(residual, fine, rf)


def find_fixed_points(p: SystemParams, tol_root: float = DEFAULT_TOL_ROOT,
                      grid: int = DEFAULT_GRID) -> EquilibriumReport:
    """All equilibria in the guard-trimmed interval, ascending, classified.

    A uniform sign-change scan brackets every root, then bisection refines
    each bracket.

    Raises
    ------
    IncompleteScanError
        If the grid is too coarse to separate neighbouring roots.
    """
    if grid < 3:
        raise IncompleteScanError("grid needs at least 3 points")
    lo = -p.x0 + p.eps_sing
    hi = p.x0 - p.eps_sing
    # the trimmed end points may coincide with the guard; nudge inside
    lo = math.nextafter(lo, 0.0)
    hi = math.nextafter(hi, 0.0)
    xs = np.linspace(lo, hi, grid)
    r = equilibrium_residual(xs, p)

    def f(x: float) -> float:
        return equilibrium_residual(x, p)

    if _hidden_pairs(lambda z: equilibrium_residual(z, p), xs, r):
        raise IncompleteScanError(f"a {grid}-point scan is too coarse to bracket every equilibrium")

    roots: list[float] = []
    for i in range(grid - 1):
        a, b = float(xs[i]), float(xs[i + 1])
        ra, rb = float(r[i]), float(r[i + 1])
        # a grid point sitting on a root must not hide a neighbour in the
        # same interval: test the sign just inside instead
        nudge = 1e-6 * (b - a)
        if ra == 0.0:
            roots.append(a)
            a += nudge
            ra = f(a)
        if rb == 0.0:
            b -= nudge
            rb = f(b)
        if ra * rb < 0:
            if _crowded(lambda z: equilibrium_residual(z, p), a, b):
                raise IncompleteScanError(
                    f"a {grid}-point scan is too coarse: several equilibria share one grid cell")
            roots.append(_bisect(f, a, b, ra, tol_root))
    if r[-1] == 0.0:
        roots.append(float(xs[-1]))

    ratio, critical_ratio, regime = critical_check(p)
    fps = tuple(classify(x, p) for x in roots)
    return EquilibriumReport(fixed_points=fps, ratio=ratio, critical_ratio=critical_ratio, regime=regime)


@dataclass(frozen=True)
class AsymmetryRow:
    delta_c: float
    center: float | None
    saddle_neg: float | None
    saddle_pos: float | None


def sweep_asymmetry(p: SystemParams, delta_c_values: Sequence[float],
                    tol_root: float = DEFAULT_TOL_ROOT) -> list[AsymmetryRow]:
    """Track equilibria while the +x0 magnet is strengthened by ``delta_c``.

    With base constant ``c`` the magnets become ``c - dc/2`` and ``c + dc/2``.
    """
    if not p.symmetric:
        raise ValueError("sweep_asymmetry needs symmetric base parameters")
    c = p.c1
    rows = []
    for dc in delta_c_values:
        c1, c2 = c - dc / 2.0, c + dc / 2.0
        if c1 <= 0 or c2 <= 0:
            raise ValueError(f"delta_c={dc} makes a magnetic constant non-positive")
        rep = find_fixed_points(p.with_(c1=c1, c2=c2), tol_root=tol_root)
        ctr = rep.center
        cx = ctr.x_star if ctr is not None else None
        sad = [fp.x_star for fp in rep.saddles]
        pivot = cx if cx is not None else 0.0
        neg = [s for s in sad if s < pivot]
        pos = [s for s in sad if s > pivot]
        rows.append(AsymmetryRow(
            delta_c=float(dc),
            center=cx,
            saddle_neg=max(neg) if neg else None,
            saddle_pos=min(pos) if pos else None,
        ))
    return rows
