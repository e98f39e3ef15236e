from dataclasses import dataclass, field

import numpy as np

from qbmft.models.kernel_table import KernelTable
from qbmft.utils.error_handling import DomainError

SYNTHESIS_METHOD = 'fft-circulant'


@dataclass(frozen=True, eq=False)
class NoiseEnsemble:
    """
    Lazily generated stationary Gaussian force samples with covariance
    kernels.nu. Realization i depends only on (seed, i), so any block of
    realizations is reproducible on its own.
    """
    kernels: KernelTable
    n_points: int
    size: int
    seed: int
    method: str = SYNTHESIS_METHOD
    _amplitudes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.size < 1:
            raise DomainError("ensemble size must be positive", module='mc')
        if not 2 <= self.n_points <= self.kernels.n:
            raise DomainError(f"n_points must be in 2..{self.kernels.n}, got {self.n_points}",
                              module='mc')
        length = self.kernels.embedding_length
        d_omega = 2.0 * np.pi / (length * self.kernels.dt)
        spectrum = np.clip(self.kernels.nu_ft, 0.0, None)
        amplitudes = length * np.sqrt(spectrum * d_omega)
        amplitudes.flags.writeable = False
        object.__setattr__(self, '_amplitudes', amplitudes)

    @property
    def dt(self) -> float:
        return self.kernels.dt

    def _draw(self, index: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, index])
        m = self._amplitudes.size
        zeta = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)
        zeta[0] = rng.standard_normal()
        zeta[-1] = rng.standard_normal()
        sample = np.fft.irfft(self._amplitudes * zeta, n=self.kernels.embedding_length)
        return sample[:self.n_points]

    def block(self, start: int, stop: int) -> np.ndarray:
        """Realizations start..stop-1 as a (stop-start, n_points) array."""
        stop = min(stop, self.size)
        if start < 0 or start >= stop:
            raise DomainError(f"empty realization block [{start}, {stop})", module='mc')
        return np.stack([self._draw(i) for i in range(start, stop)])

    @property
    def realizations(self) -> np.ndarray:
        return self.block(0, self.size)

    def to_dict(self):
        return {'n_points': self.n_points, 'size': self.size, 'seed': self.seed,
                'method': self.method, 'dt': self.dt, 'hbar': self.kernels.hbar,
                'beta': self.kernels.beta}
