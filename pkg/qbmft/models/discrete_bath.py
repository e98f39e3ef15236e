from dataclasses import dataclass
from typing import Optional

import numpy as np

from qbmft.models.spectral_density import SpectralDensity
from qbmft.utils.error_handling import DomainError


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """
    Finite set of bath oscillators coupled bilinearly to the system,
    H_B = sum p_n^2/2m_n + (m_n w_n^2/2)(q_n - c_n x/(m_n w_n^2))^2.
    """
    frequencies: np.ndarray
    masses: np.ndarray
    couplings: np.ndarray
    beta: float
    M: float
    Omega: float
    d_omega: float
    spectral_density: Optional[SpectralDensity] = None

    def __post_init__(self):
        n = self.frequencies.size
        if self.masses.size != n or self.couplings.size != n:
            raise DomainError("mode arrays differ in length", module='mc')
        if np.any(self.frequencies <= 0) or np.any(self.masses <= 0):
            raise DomainError("mode frequencies and masses must be positive", module='mc')
        if not self.beta > 0:
            raise DomainError("beta must be positive", module='mc')

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def omega_max(self) -> float:
        return float(self.frequencies.max())

    @property
    def stiffness(self) -> np.ndarray:
        """m_n w_n^2"""
        return self.masses * self.frequencies ** 2

    @property
    def renormalization(self) -> float:
        """sum c_n^2/(m_n w_n^2), the counter-term that keeps Omega the observed frequency."""
        return float(np.sum(self.couplings ** 2 / self.stiffness))

    def damping_kernel(self, t):
        """gamma(t) = (1/M) sum c_n^2/(2 m_n w_n^2) cos(w_n t)"""
        t = np.asarray(t, dtype=float)
        weights = self.couplings ** 2 / (2.0 * self.stiffness * self.M)
        return np.cos(np.multiply.outer(t, self.frequencies)) @ weights

    def binned_spectral_density(self) -> np.ndarray:
        """sum c_n^2/(2 m_n w_n) per frequency bin of width d_omega."""
        return self.couplings ** 2 / (2.0 * self.masses * self.frequencies * self.d_omega)

    def stiffness_matrix(self) -> np.ndarray:
        """Hessian of the potential in (x, q_1..q_N)."""
        n = self.n_modes
        K = np.zeros((n + 1, n + 1))
        K[0, 0] = self.M * self.Omega ** 2 + self.renormalization
        K[0, 1:] = K[1:, 0] = -self.couplings
        K[1:, 1:] = np.diag(self.stiffness)
        return K

    def to_dict(self):
        return {'n_modes': self.n_modes, 'omega_max': self.omega_max, 'd_omega': self.d_omega,
                'beta': self.beta, 'M': self.M, 'Omega': self.Omega,
                'renormalization': self.renormalization}
