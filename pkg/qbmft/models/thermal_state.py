from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class ThermalState:
    """Equal-time variances of the thermally prepared oscillator."""
    beta: float
    hbar: float
    M: float
    Omega: float
    sigma_xx0: float
    sigma_pp0: float
    matsubara_cutoff: int
    tail_bound_xx: float = 0.0
    tail_bound_pp: float = 0.0

    @property
    def classical_sigma_xx(self) -> float:
        return 1.0 / (self.beta * self.M * self.Omega ** 2)

    @property
    def classical_sigma_pp(self) -> float:
        return self.M / self.beta

    def to_dict(self):
        return {
            'beta': self.beta,
            'hbar': self.hbar,
            'M': self.M,
            'Omega': self.Omega,
            'sigma_xx0': self.sigma_xx0,
            'sigma_pp0': self.sigma_pp0,
            'matsubara_cutoff': self.matsubara_cutoff,
            'tail_bound_xx': self.tail_bound_xx,
            'tail_bound_pp': self.tail_bound_pp,
        }


@dataclass(frozen=True)
class FreeEnergies:
    deltaF: float
    F_offset: float
    F_offset_tail_bound: float = 0.0

    def to_dict(self):
        return {'deltaF': self.deltaF, 'F_offset': self.F_offset,
                'F_offset_tail_bound': self.F_offset_tail_bound}


@dataclass(frozen=True, eq=False)
class StationaryCorrelation:
    """
    Stationary position correlation sigma_xx at lags k*dt with its two-sided
    spectrum sigma~_xx(omega), normalized so sigma_xx(t) = int sigma~ exp(-i omega t) d omega.
    """
    dt: float
    values: np.ndarray
    spectrum: Callable
    truncation_error: float = 0.0
    memory_points: int = 0

    @property
    def n(self) -> int:
        return self.values.size
