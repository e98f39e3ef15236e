from dataclasses import dataclass, replace, field
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import hermite_e
from scipy.fft import next_fast_len

from qbmft.utils.error_handling import DomainError, GridMismatchError

SHAPES = ('ramp', 'smoothstep', 'gaussian', 'sinusoid', 'tabulated')
MIN_PADDING = 8


@dataclass(frozen=True)
class ForceProtocol:
    """
    External force f(t) switched over [0, tau] and constant outside it.

    Shapes: ramp, smoothstep, gaussian (pulse of width `width`*tau centred at
    tau/2), sinusoid (`cycles` periods over [0, tau]) and tabulated samples.
    `reverse` evaluates the time-reversed protocol f(tau - t).
    """
    kind: str
    amplitude: float
    tau: float
    f0: float = 0.0
    width: float = 0.125
    cycles: float = 1.0
    reverse: bool = False
    samples: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise DomainError(f"unknown protocol shape '{self.kind}' (expected one of {SHAPES})",
                              module='work')
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}", module='work')
        if self.kind == 'gaussian' and not self.width > 0:
            raise DomainError("gaussian width must be positive", module='work')
        if self.kind == 'tabulated':
            if self.samples is None or len(self.samples[0]) < 3:
                raise DomainError("tabulated protocol needs at least 3 samples", module='work')

    @classmethod
    def from_samples(cls, t, f):
        """Tabulated protocol; t must start at 0 and be increasing."""
        t = np.asarray(t, dtype=float)
        f = np.asarray(f, dtype=float)
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise DomainError("tabulated times must start at 0 and increase", module='work')
        return cls('tabulated', float(f[-1] - f[0]), float(t[-1]), float(f[0]),
                   samples=(tuple(t), tuple(f)))

    def reversed(self) -> 'ForceProtocol':
        return replace(self, reverse=not self.reverse)

    @property
    def f_start(self) -> float:
        return float(self.value(0.0))

    @property
    def f_end(self) -> float:
        return float(self.value(self.tau))

    def value(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.tau)
        if self.reverse:
            t = self.tau - t
        return self._shape(t, 0)

    def derivative(self, t, order: int = 1):
        """order-th derivative; zero outside [0, tau]."""
        if order < 1:
            return self.value(t)
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.tau)
        tc = np.clip(t, 0.0, self.tau)
        sign = 1.0
        if self.reverse:
            tc = self.tau - tc
            sign = (-1.0) ** order
        return np.where(inside, sign * self._shape(tc, order), 0.0)

    def _shape(self, t, order):
        A, tau = self.amplitude, self.tau
        s = t / tau
        if self.kind == 'ramp':
            if order == 0:
                return self.f0 + A * s
            return np.full_like(s, A / tau if order == 1 else 0.0)
        if self.kind == 'smoothstep':
            poly = [self.f0 + A * (3 * s ** 2 - 2 * s ** 3),
                    A / tau * (6 * s - 6 * s ** 2),
                    A / tau ** 2 * (6 - 12 * s),
                    np.full_like(s, -12 * A / tau ** 3)]
            return poly[order] if order < 4 else np.zeros_like(s)
        if self.kind == 'gaussian':
            w = self.width * tau
            u = (t - 0.5 * tau) / w
            coeffs = np.zeros(order + 1)
            coeffs[order] = 1.0
            shape = (-1.0) ** order * hermite_e.hermeval(u, coeffs) * np.exp(-0.5 * u * u) / w ** order
            return (self.f0 if order == 0 else 0.0) + A * shape
        if self.kind == 'sinusoid':
            k = 2.0 * np.pi * self.cycles / tau
            shape = A * k ** order * np.sin(k * t + 0.5 * np.pi * order)
            return (self.f0 if order == 0 else 0.0) + shape
        ts, fs = (np.asarray(x) for x in self.samples)
        values = fs
        for _ in range(order):
            values = np.gradient(values, ts, edge_order=2)
        return np.interp(t, ts, values)

    def grid(self, dt: float) -> np.ndarray:
        """Support grid 0, dt, ..., tau; tau must be a multiple of dt."""
        steps = self.tau / dt
        n = int(round(steps))
        if n < 2 or abs(steps - n) > 1e-9 * max(1.0, steps):
            raise GridMismatchError(f"tau={self.tau} is not a multiple of dt={dt}", module='work')
        return np.arange(n + 1) * dt

    def fdot_ft(self, dt: float, padded_length: int = None):
        """
        f~_d(omega) = (1/2pi) int fdot exp(i omega t) dt on the rfft grid of a
        zero-padded support (padding factor >= 8).

        Returns:
            (omega, values)
        """
        t = self.grid(dt)
        n = t.size
        length = next_fast_len(max(padded_length or 0, MIN_PADDING * n))
        weights = np.ones(n)
        weights[[0, -1]] = 0.5
        samples = weights * self.derivative(t)
        values = dt / (2.0 * np.pi) * np.conj(np.fft.rfft(samples, length))
        omega = 2.0 * np.pi * np.fft.rfftfreq(length, dt)
        return omega, values

    def to_dict(self):
        data = {'shape': self.kind, 'amplitude': self.amplitude, 'tau': self.tau, 'f0': self.f0}
        if self.kind == 'gaussian':
            data['width'] = self.width
        if self.kind == 'sinusoid':
            data['cycles'] = self.cycles
        if self.reverse:
            data['reverse'] = True
        return data
