from dataclasses import dataclass

import numpy as np

from qbmft.models.spectral_density import SpectralDensity
from qbmft.utils.error_handling import GridMismatchError


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class KernelTable:
    """
    Damping and noise kernels on a uniform lag grid t_k = k*dt, k = 0..n-1,
    with their spectra on the matching FFT frequency grid.

    `nu` is the force covariance <xi(t) xi(0)> = hbar*nu(t) of the band-limited
    (|omega| <= pi/dt) process the noise synthesizer draws from, so it stays
    finite at t=0 and at hbar=0 equals (2M/beta)*gamma band-limited.
    `nu_ft` is the matching spectrum hbar*nu~(omega) and `covariance_row` the
    full first row of the circulant embedding, of which `nu` is the head.
    """
    spectral_density: SpectralDensity
    beta: float
    hbar: float
    dt: float
    gamma: np.ndarray
    nu: np.ndarray
    omega: np.ndarray
    gamma_ft: np.ndarray
    nu_ft: np.ndarray
    embedding_length: int
    covariance_row: np.ndarray
    fdr_violation: float = 0.0

    def __post_init__(self):
        for name in ('gamma', 'nu', 'omega', 'gamma_ft', 'nu_ft', 'covariance_row'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.gamma.shape != self.nu.shape:
            raise GridMismatchError("gamma and nu tables differ in length", module='bath')
        if self.omega.shape != self.nu_ft.shape or self.omega.shape != self.gamma_ft.shape:
            raise GridMismatchError("frequency tables differ in length", module='bath')
        if self.covariance_row.size != self.embedding_length:
            raise GridMismatchError("covariance row does not match the embedding length", module='bath')

    @property
    def n(self) -> int:
        return self.gamma.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    @property
    def horizon(self) -> float:
        return (self.n - 1) * self.dt

    @property
    def classical(self) -> bool:
        return self.hbar == 0.0

    @property
    def local(self) -> bool:
        return self.spectral_density.local

    @property
    def M(self) -> float:
        return self.spectral_density.M
