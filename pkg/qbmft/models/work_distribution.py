from dataclasses import dataclass

import numpy as np

from qbmft.utils.error_handling import NumericalError


@dataclass(frozen=True)
class WorkDistribution:
    """Gaussian work law fixed by its mean and variance."""
    meanW: float
    varW: float
    deltaF: float
    beta: float
    direction: str = 'forward'

    def __post_init__(self):
        if self.varW < 0:
            raise NumericalError(f"negative work variance {self.varW:.3e}", module='work')
        if self.direction not in ('forward', 'reverse'):
            raise NumericalError(f"unknown direction '{self.direction}'", module='work')

    @property
    def std(self) -> float:
        return float(np.sqrt(self.varW))

    @property
    def dissipated(self) -> float:
        return self.meanW - self.deltaF

    @property
    def closure_imbalance(self) -> float:
        """beta varW/2 - (meanW - deltaF); zero iff the Jarzynski equality holds."""
        return 0.5 * self.beta * self.varW - self.dissipated

    def log_pdf(self, W):
        W = np.asarray(W, dtype=float)
        if self.varW == 0:
            return np.where(W == self.meanW, np.inf, -np.inf)
        return -0.5 * (W - self.meanW) ** 2 / self.varW - 0.5 * np.log(2.0 * np.pi * self.varW)

    def to_dict(self):
        return {'meanW': self.meanW, 'varW': self.varW, 'deltaF': self.deltaF,
                'beta': self.beta, 'direction': self.direction}
