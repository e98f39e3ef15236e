from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from qbmft.models.spectral_density import SpectralDensity
from qbmft.utils.error_handling import GridMismatchError


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class GreensSolutions:
    """
    Homogeneous solutions of the generalized Langevin equation on t_k = k*dt:
    h(0)=1, h'(0)=0 and g(0)=0, g'(0)=1/M.
    """
    dt: float
    h: np.ndarray
    g: np.ndarray
    hdot: np.ndarray
    gdot: np.ndarray
    M: float
    Omega: float
    spectral_density: Optional[SpectralDensity] = None
    method: str = 'volterra'

    def __post_init__(self):
        for name in ('h', 'g', 'hdot', 'gdot'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.h.size
        if any(getattr(self, name).size != n for name in ('g', 'hdot', 'gdot')):
            raise GridMismatchError("Green's function tables differ in length", module='greens')

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    @property
    def horizon(self) -> float:
        return (self.n - 1) * self.dt

    def resample(self, step: int) -> 'GreensSolutions':
        """Keep every step-th grid point (coarser grid, same horizon)."""
        if step < 1:
            raise GridMismatchError("resample step must be >= 1", module='greens')
        sl = slice(None, None, step)
        return replace(self, dt=self.dt * step, h=self.h[sl], g=self.g[sl],
                       hdot=self.hdot[sl], gdot=self.gdot[sl])
