from dataclasses import dataclass

import numpy as np

from qbmft.utils.error_handling import DomainError


@dataclass(frozen=True, eq=False)
class HistoryPair:
    """
    Pair of coarse-grained position histories in mean/difference form,
    U = (chi' + chi)/2 and u = chi' - chi, with resolution width sigma(t).
    """
    U: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    dt: float

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        u = np.array(self.u, dtype=float)
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), U.shape).copy()
        if U.ndim != 1 or u.shape != U.shape:
            raise DomainError("U and u must be 1-d arrays of equal length", module='dechist')
        if np.any(sigma <= 0):
            raise DomainError("sigma must be positive on the grid", module='dechist')
        if not self.dt > 0:
            raise DomainError("dt must be positive", module='dechist')
        for name, value in (('U', U), ('u', u), ('sigma', sigma)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @classmethod
    def from_histories(cls, chi, chi_prime, sigma, dt):
        chi = np.asarray(chi, dtype=float)
        chi_prime = np.asarray(chi_prime, dtype=float)
        return cls(0.5 * (chi_prime + chi), chi_prime - chi, sigma, dt)

    @property
    def n(self) -> int:
        return self.U.size
