"""PID tracking of a cosine reference chosen from the frequency table."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RangeError
from .model import State, SystemParams
from .sim import IntegratorConfig, Trajectory, integrate
from .spectral import FrequencyTable, lookup

TRANSIENT_FRACTION = 0.2


@dataclass(frozen=True)
class PidGains:
    """Per-unit-mass gains: error in metres in, acceleration out."""

    kp: float
    kd: float
    ki: float

    def __post_init__(self):
        if not all(math.isfinite(g) for g in (self.kp, self.kd, self.ki)):
            raise ValueError("PID gains must be finite")

    @classmethod
    def default(cls, k: float) -> "PidGains":
        """kp = 4k, kd = 2*sqrt(k), ki = 0.1*k*sqrt(k)."""
        rk = math.sqrt(k)
        return cls(kp=4.0 * k, kd=2.0 * rk, ki=0.1 * k * rk)


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: Optional[float] = None
    prev_time: Optional[float] = None


def pid_step(gains: PidGains, ps: PidState, error: float, t: float,
             error_rate: Optional[float] = None) -> tuple[float, PidState]:
    """One controller update at time ``t``.

    The integral uses the trapezoid rule between updates.  When
    ``error_rate`` is given it is used as the error derivative; otherwise a
    backward difference of the held error is taken (zero on the first call).
    """
    if ps.prev_time is None:
        integral = ps.integral
        rate = 0.0 if error_rate is None else error_rate
    else:
        dt = t - ps.prev_time
        if not dt > 0:
            raise ValueError(f"PID time must increase: {t!r} after {ps.prev_time!r}")
        integral = ps.integral + 0.5 * (ps.prev_error + error) * dt
        rate = (error - ps.prev_error) / dt if error_rate is None else error_rate
    f = gains.kp * error + gains.kd * rate + gains.ki * integral
    return f, PidState(integral=integral, prev_error=error, prev_time=t)


@dataclass(frozen=True)
class ReferencePlan:
    """Desired displacement A*cos(w*t + phi)."""

    A: float
    w: float
    phi: float

    def x_d(self, t):
        return self.A * np.cos(self.w * t + self.phi)

    def v_d(self, t):
        return -self.A * self.w * np.sin(self.w * t + self.phi)

    @property
    def frequency(self) -> float:
        return self.w / (2.0 * math.pi)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.w


def plan_reference(A: float, p: SystemParams, ic: State, table: FrequencyTable) -> ReferencePlan:
    """Reference whose frequency matches the free orbit of amplitude ``A``.

    The phase reproduces the initial displacement (clamped to [-A, A]); the
    sign of the initial velocity picks the branch.
    """
    if not table.amplitudes[0] <= A <= table.amplitudes[-1]:
        raise RangeError(f"reference amplitude {A!r} outside the frequency table range")
    w = 2.0 * math.pi * lookup(table, A)
    x, v = ic
    c = min(1.0, max(-1.0, x / A))
    s = math.sqrt(max(0.0, 1.0 - c * c))
    # v(0) = -A w sin(phi); at rest take the positive branch
    if v > 0:
        s = -s
    return ReferencePlan(A=float(A), w=w, phi=math.atan2(s, c))


def closed_loop(p: SystemParams, gains: PidGains, plan: ReferencePlan, ic: State,
                cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Simulate the plant with a PID force tracking ``plan``.

    The controller runs at the sample rate of ``cfg`` and its output is held
    between samples.  The error derivative uses the known reference velocity
    minus the measured velocity.
    """
    ps = PidState()

    def drive(t: float, s: State) -> tuple[float, float]:
        nonlocal ps
        arg = plan.w * t + plan.phi
        e = plan.A * math.cos(arg) - s.x
        e_dot = -plan.A * plan.w * math.sin(arg) - s.v
        f, ps = pid_step(gains, ps, e, t, error_rate=e_dot)
        return f, 0.0

    return integrate(p, drive, ic, cfg)


def _steady(traj: Trajectory, transient: float) -> slice:
    start = int(math.floor(transient * len(traj)))
    return slice(start, len(traj))


def max_control_force(traj: Trajectory, transient: float = TRANSIENT_FRACTION) -> tuple[float, float]:
    """Largest |F_c| after the transient and the displacement where it occurs."""
    sl = _steady(traj, transient)
    f = np.abs(traj.force[sl])
    i = int(np.argmax(f))
    return float(f[i]), float(traj.x[sl][i])


def mean_control_effort(traj: Trajectory, transient: float = TRANSIENT_FRACTION) -> float:
    return float(np.mean(np.abs(traj.force[_steady(traj, transient)])))


def steady_amplitude(traj: Trajectory, window: float) -> float:
    """Half the peak-to-peak displacement over the last ``window`` seconds."""
    t = traj.times
    sel = t >= t[-1] - window
    x = traj.x[sel]
    return 0.5 * float(x.max() - x.min())
