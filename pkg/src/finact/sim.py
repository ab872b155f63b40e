"""Time integration of the plant with sample-and-hold drive inputs.

The drive (control force per unit mass and coil current) is evaluated once
per sample instant and held constant until the next one, which is how a
digital controller talks to the real actuator.  Integration always lands
exactly on the sample grid, so no interpolation is involved in producing
the output samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SingularityError
from .model import State, SystemParams, make_acceleration

ADAPTIVE = "adaptive"
RK4 = "rk4"

CAPTURE = "capture"
GUARD = "guard"

#: drive(t, state) -> (force per unit mass, coil current)
Drive = Callable[[float, State], tuple[float, float]]

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th- and 4th-order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = ADAPTIVE
    dt: float = 1e-4
    rtol: float = 1e-9
    atol: float = 1e-12
    max_time: float = 10.0
    sample_interval: float = 1e-3

    def __post_init__(self):
        if self.method not in (ADAPTIVE, RK4):
            raise ValueError(f"unknown integration method {self.method!r}")
        if not (self.dt > 0 and self.rtol > 0 and self.atol > 0):
            raise ValueError("dt, rtol and atol must be positive")
        if not (self.sample_interval > 0 and self.max_time >= 0):
            raise ValueError("sample_interval must be positive and max_time non-negative")


@dataclass
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    force: np.ndarray
    current: np.ndarray
    events: list[tuple[float, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> list[State]:
        return [State(float(a), float(b)) for a, b in zip(self.x, self.v)]

    @property
    def captured(self) -> bool:
        return any(kind in (CAPTURE, GUARD) for _, kind in self.events)

    @property
    def final_state(self) -> State:
        return State(float(self.x[-1]), float(self.v[-1]))


def _rk4_step(f, x, v, h, force, current):
    a1 = f(x, v, force, current)
    x2, v2 = x + 0.5 * h * v, v + 0.5 * h * a1
    a2 = f(x2, v2, force, current)
    x3, v3 = x + 0.5 * h * v2, v + 0.5 * h * a2
    a3 = f(x3, v3, force, current)
    x4, v4 = x + h * v3, v + h * a3
    a4 = f(x4, v4, force, current)
    return (x + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
            v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4))


class _Stop(Exception):
    def __init__(self, kind: str, t: float, x: float, v: float):
        super().__init__(kind)
        self.kind, self.t, self.x, self.v = kind, t, x, v


def _adaptive_span(f, t, x, v, t_end, h, force, current, rtol, atol, band):
    """Advance from t to t_end with held drive; returns (x, v, next h)."""
    h_min_scale = 16.0 * math.ulp(max(1.0, abs(t_end)))
    a1 = f(x, v, force, current)
    while t < t_end:
        last = t + h >= t_end
        hs = t_end - t if last else h
        try:
            a2 = f(x + hs * _A21 * v, v + hs * _A21 * a1, force, current)
            v2 = v + hs * _A21 * a1
            v3 = v + hs * (_A31 * a1 + _A32 * a2)
            a3 = f(x + hs * (_A31 * v + _A32 * v2), v3, force, current)
            v4 = v + hs * (_A41 * a1 + _A42 * a2 + _A43 * a3)
            a4 = f(x + hs * (_A41 * v + _A42 * v2 + _A43 * v3), v4, force, current)
            v5 = v + hs * (_A51 * a1 + _A52 * a2 + _A53 * a3 + _A54 * a4)
            a5 = f(x + hs * (_A51 * v + _A52 * v2 + _A53 * v3 + _A54 * v4), v5, force, current)
            v6 = v + hs * (_A61 * a1 + _A62 * a2 + _A63 * a3 + _A64 * a4 + _A65 * a5)
            a6 = f(x + hs * (_A61 * v + _A62 * v2 + _A63 * v3 + _A64 * v4 + _A65 * v5), v6, force, current)
            xn = x + hs * (_B1 * v + _B3 * v3 + _B4 * v4 + _B5 * v5 + _B6 * v6)
            vn = v + hs * (_B1 * a1 + _B3 * a3 + _B4 * a4 + _B5 * a5 + _B6 * a6)
            if abs(xn) >= band:
                # the step carried the fin magnet into the guard band
                raise _Stop(CAPTURE, t + hs, xn, vn)
            a7 = f(xn, vn, force, current)
        except SingularityError:
            h = 0.25 * hs
            if h < h_min_scale:
                raise _Stop(GUARD, t, x, v)
            continue
        ex = hs * (_E1 * v + _E3 * v3 + _E4 * v4 + _E5 * v5 + _E6 * v6 + _E7 * vn)
        ev = hs * (_E1 * a1 + _E3 * a3 + _E4 * a4 + _E5 * a5 + _E6 * a6 + _E7 * a7)
        sx = atol + rtol * max(abs(x), abs(xn))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = max(abs(ex) / sx, abs(ev) / sv)
        if not math.isfinite(err):
            err = math.inf
        if err <= 1.0:
            t = t_end if last else t + hs
            x, v, a1 = xn, vn, a7
            grow = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            if not last or grow < 1.0:
                h = hs * grow
            else:
                # a step shortened to hit t_end says little about the next one
                h = max(h, hs * grow)
        else:
            h = hs * max(0.1, 0.9 * err ** -0.2)
            if h < h_min_scale:
                raise _Stop(GUARD, t, x, v)
    return x, v, h


def integrate(p: SystemParams, drive: Optional[Drive], ic: State, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the plant from ``ic`` over ``[0, cfg.max_time]``.

    Output is sampled every ``cfg.sample_interval``.  The run stops early on
    a capture (fin magnet enters the guard band next to a magnet) or when the
    adaptive step size underflows near a singularity (guard event); either
    way the event is recorded in ``Trajectory.events``.
    """
    x, v = float(ic[0]), float(ic[1])
    band = p.x0 - p.eps_sing
    if not abs(x) < band:
        raise ValueError(f"initial displacement {x!r} outside the admissible interval (-{band}, {band})")
    f = make_acceleration(p)
    dt_s = cfg.sample_interval
    n = int(math.floor(cfg.max_time / dt_s + 1e-9)) + 1

    ts, xs, vs, fs, cur = [], [], [], [], []
    events: list[tuple[float, str]] = []
    h = min(dt_s, 1e-4)
    n_sub = max(1, int(round(dt_s / cfg.dt)))

    t = 0.0
    for i in range(n):
        t = i * dt_s
        force, current = drive(t, State(x, v)) if drive is not None else (0.0, 0.0)
        ts.append(t)
        xs.append(x)
        vs.append(v)
        fs.append(float(force))
        cur.append(float(current))
        if i == n - 1:
            break
        t_next = (i + 1) * dt_s
        try:
            if cfg.method == RK4:
                hh = (t_next - t) / n_sub
                for j in range(n_sub):
                    try:
                        x, v = _rk4_step(f, x, v, hh, force, current)
                    except SingularityError:
                        raise _Stop(GUARD, t + j * hh, x, v)
                    if abs(x) >= band:
                        raise _Stop(CAPTURE, t + (j + 1) * hh, x, v)
            else:
                x, v, h = _adaptive_span(f, t, x, v, t_next, h, force, current, cfg.rtol, cfg.atol, band)
        except _Stop as stop:
            kind = stop.kind
            if kind == GUARD and abs(stop.x) >= band - p.eps_sing:
                # underflow within one guard width of the band: the fin has
                # already reached the magnet
                kind = CAPTURE
            events.append((stop.t, kind))
            if stop.t > t:
                ts.append(stop.t)
                xs.append(stop.x)
                vs.append(stop.v)
                fs.append(float(force))
                cur.append(float(current))
            break

    return Trajectory(
        times=np.asarray(ts, dtype=float),
        x=np.asarray(xs, dtype=float),
        v=np.asarray(vs, dtype=float),
        force=np.asarray(fs, dtype=float),
        current=np.asarray(cur, dtype=float),
        events=events,
    )


def phase_portrait(p: SystemParams, ics: Sequence[State], cfg: IntegratorConfig = IntegratorConfig(),
                   drive: Optional[Drive] = None) -> list[Trajectory]:
    """One trajectory per initial condition, in input order."""
    return [integrate(p, drive, ic, cfg) for ic in ics]
