"""Orbit frequencies and the amplitude -> frequency lookup table."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .equilibria import find_fixed_points, jacobian_scalars
from .errors import NonUniformSamplingError, OutOfBasinError, RangeError
from .model import State, SystemParams
from .sim import IntegratorConfig, Trajectory, integrate

TABLE_SIZE = 32
TABLE_SPAN = (0.05, 0.95)
MIN_PERIODS = 32
TRIM_ITERATIONS = 6


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    power: np.ndarray

    @property
    def df(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


def _uniform_step(times: np.ndarray) -> float:
    if len(times) < 4:
        raise NonUniformSamplingError("need at least 4 samples")
    d = np.diff(times)
    dt = float(np.mean(d))
    if not np.allclose(d, dt, rtol=1e-6, atol=0.0):
        raise NonUniformSamplingError("power_spectrum needs uniformly sampled data")
    return dt


def spectrum_of(x: np.ndarray, dt: float) -> Spectrum:
    """Single-sided periodogram of the mean-removed series, normalized to sum 1."""
    x = np.asarray(x, dtype=float)
    xc = x - x.mean()
    p = np.abs(np.fft.rfft(xc)) ** 2
    # fold the negative frequencies in; DC and (for even n) Nyquist are unpaired
    if len(xc) % 2 == 0:
        p[1:-1] *= 2.0
    else:
        p[1:] *= 2.0
    total = p.sum()
    # a constant series leaves only round-off after mean removal
    if total <= (1e-24 * len(xc)) * max(1.0, float(np.max(np.abs(x))) ** 2):
        p = np.zeros_like(p)
    else:
        p /= total
    return Spectrum(frequencies=np.fft.rfftfreq(len(xc), dt), power=p)


def power_spectrum(traj: Trajectory) -> Spectrum:
    """Power spectrum of the displacement signal of ``traj``.

    Raises
    ------
    NonUniformSamplingError
        If the sample times are not equally spaced (e.g. a run cut short by
        a capture event).
    """
    dt = _uniform_step(np.asarray(traj.times))
    return spectrum_of(traj.x, dt)


def dominant_frequency(s: Spectrum, strong: float = 0.25) -> float:
    """Frequency of the fundamental peak, refined by a 3-point parabola.

    The parabola is fitted to the log-power of the peak bin and its two
    neighbours (Gaussian interpolation).

    The fundamental is the lowest-frequency local maximum holding at least
    ``strong`` times the largest bin's power.
    """
    p = np.asarray(s.power)
    if len(p) < 3 or not np.any(p > 0):
        raise ValueError("dominant_frequency needs a nonzero spectrum")
    top = float(p[1:].max())
    k = None
    for i in range(1, len(p)):
        left = p[i - 1] if i > 1 else -np.inf
        right = p[i + 1] if i + 1 < len(p) else -np.inf
        if p[i] >= strong * top and p[i] >= left and p[i] >= right:
            k = i
            break
    if k is None:  # pragma: no cover - the global maximum always qualifies
        k = int(np.argmax(p[1:])) + 1
    offset = 0.0
    if 1 <= k - 1 and k + 1 < len(p) and p[k - 1] > 0 and p[k + 1] > 0:
        # parabola through the log-power has far less bias than one through
        # the raw power for a rectangular window
        y0, y1, y2 = np.log(p[k - 1]), np.log(p[k]), np.log(p[k + 1])
        den = y0 - 2.0 * y1 + y2
        if den != 0:
            offset = 0.5 * (y0 - y2) / den
    return float((k + offset) * s.df)


@dataclass(frozen=True)
class FrequencyTable:
    amplitudes: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        f = np.asarray(self.frequencies, dtype=float)
        if a.shape != f.shape or a.ndim != 1 or len(a) < 2:
            raise ValueError("a frequency table needs matching 1-D arrays with at least two entries")
        if np.any(np.diff(a) <= 0):
            raise ValueError("table amplitudes must be strictly increasing")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "frequencies", f)

    @property
    def entries(self) -> list[tuple[float, float]]:
        return list(zip(self.amplitudes.tolist(), self.frequencies.tolist()))

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.frequencies) < 0))

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[float, float]]) -> "FrequencyTable":
        a, f = zip(*entries)
        return cls(np.array(a, dtype=float), np.array(f, dtype=float))


def lookup(table: FrequencyTable, amplitude: float) -> float:
    """Linear interpolation of the table frequency at ``amplitude`` (Hz)."""
    a = table.amplitudes
    if not a[0] <= amplitude <= a[-1]:
        raise RangeError(f"amplitude {amplitude!r} outside table range [{a[0]}, {a[-1]}]")
    i = int(np.searchsorted(a, amplitude, side="right")) - 1
    if i >= len(a) - 1:
        return float(table.frequencies[-1])
    lo, hi = a[i], a[i + 1]
    w = (amplitude - lo) / (hi - lo)
    return float(table.frequencies[i] + w * (table.frequencies[i + 1] - table.frequencies[i]))


def basin_limit(p: SystemParams) -> float:
    """Largest admissible orbit amplitude: the positive saddle, or the guard."""
    rep = find_fixed_points(p.with_(gamma=0.0))
    pos = [fp.x_star for fp in rep.saddles if fp.x_star > 0]
    return min(pos) if pos else p.x0 - p.eps_sing


def default_amplitudes(p: SystemParams, n: int = TABLE_SIZE) -> np.ndarray:
    lo, hi = TABLE_SPAN
    return np.linspace(lo, hi, n) * basin_limit(p)


def orbit_frequency(p: SystemParams, amplitude: float, sample_interval: float = 1e-3,
                    min_periods: int = MIN_PERIODS, cfg: Optional[IntegratorConfig] = None) -> float:
    """Frequency of the free orbit released at rest from ``amplitude``.

    The record is trimmed to a whole number of (estimated) periods before
    the final spectral estimate, which keeps leakage of the rectangular
    window low.
    """
    cfg = cfg or IntegratorConfig(sample_interval=sample_interval)
    p0 = p.with_(gamma=0.0)
    # first guess from the linearization at the origin, then correct
    _, det = jacobian_scalars(0.0, p0)
    f_guess = math.sqrt(det) / (2 * math.pi) if det > 0 else 1.0
    horizon = (min_periods + 4) / f_guess
    for _ in range(4):
        traj = integrate(p0, None, State(amplitude, 0.0), replace(cfg, max_time=float(horizon)))
        if traj.captured:
            raise OutOfBasinError(f"orbit from amplitude {amplitude!r} was captured by a magnet")
        f1 = dominant_frequency(power_spectrum(traj))
        if f1 * traj.times[-1] >= min_periods:
            break
        horizon = (min_periods + 4) / f1
    dt = cfg.sample_interval
    # A record holding a whole number of periods puts the fundamental (and
    # its harmonics) exactly on bins; iterate the trim to that fixed point.
    f = f1
    for _ in range(TRIM_ITERATIONS):
        periods = math.floor(f * traj.times[-1])
        n = min(len(traj.x), int(round(periods / f / dt)))
        f_new = dominant_frequency(spectrum_of(traj.x[:n], dt))
        if abs(f_new - f) <= 1e-9 * f:
            return f_new
        f = f_new
    return f


def build_frequency_table(p: SystemParams, amplitudes: Optional[Sequence[float]] = None,
                          cfg: Optional[IntegratorConfig] = None) -> FrequencyTable:
    """Natural frequency vs. amplitude of the conservative plant.

    Damping in ``p`` is ignored: the table describes the undamped orbits the
    controller should ride on.

    Raises
    ------
    OutOfBasinError
        If an amplitude is not strictly inside (0, positive saddle).
    """
    limit = basin_limit(p)
    amps = default_amplitudes(p) if amplitudes is None else np.asarray(amplitudes, dtype=float)
    for a in amps:
        if not 0 < a < limit:
            raise OutOfBasinError(f"amplitude {a!r} outside the oscillation basin (0, {limit!r})")
    freqs = [orbit_frequency(p, float(a), cfg=cfg) for a in amps]
    return FrequencyTable(np.asarray(amps, dtype=float), np.asarray(freqs))
