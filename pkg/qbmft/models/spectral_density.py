from dataclasses import dataclass, asdict
from enum import Enum
from typing import Optional

from qbmft.utils.error_handling import DomainError


class BathKind(str, Enum):
    OHMIC_NO_CUTOFF = 'OhmicNoCutoff'
    OHMIC_DRUDE = 'OhmicDrude'
    POWER_LAW = 'PowerLaw'


@dataclass(frozen=True)
class SpectralDensity:
    """
    Bath spectral density J(omega) = (2 M gamma0 / pi) omega [...] with an optional
    Drude cutoff. PowerLaw carries an exponent s in (0, 2):
    J = (2 M gamma0 / pi) omega (omega/cutoff)^(s-1) cutoff^2 / (omega^2 + cutoff^2).
    """
    kind: BathKind
    gamma0: float
    M: float = 1.0
    cutoff: Optional[float] = None
    exponent: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', BathKind(self.kind))
        if not self.gamma0 > 0:
            raise DomainError(f"gamma0 must be positive, got {self.gamma0}", module='bath')
        if not self.M > 0:
            raise DomainError(f"M must be positive, got {self.M}", module='bath')
        if self.kind == BathKind.OHMIC_NO_CUTOFF:
            if self.cutoff is not None:
                raise DomainError("OhmicNoCutoff takes no cutoff", module='bath')
        elif self.cutoff is None or not self.cutoff > 0:
            raise DomainError(f"{self.kind.value} requires a positive cutoff", module='bath')
        if self.kind == BathKind.POWER_LAW:
            if self.exponent is None or not 0.0 < self.exponent < 2.0:
                raise DomainError(f"PowerLaw exponent must lie in (0, 2), got {self.exponent}", module='bath')
        elif self.exponent is not None:
            raise DomainError(f"{self.kind.value} takes no exponent", module='bath')

    @property
    def local(self) -> bool:
        """True when the damping kernel is 2*gamma0*delta(t)."""
        return self.kind == BathKind.OHMIC_NO_CUTOFF

    @property
    def has_closed_form_laplace(self) -> bool:
        return self.kind in (BathKind.OHMIC_NO_CUTOFF, BathKind.OHMIC_DRUDE)

    @classmethod
    def ohmic(cls, gamma0, M=1.0):
        return cls(BathKind.OHMIC_NO_CUTOFF, gamma0, M)

    @classmethod
    def drude(cls, gamma0, cutoff, M=1.0):
        return cls(BathKind.OHMIC_DRUDE, gamma0, M, cutoff)

    @classmethod
    def power_law(cls, gamma0, cutoff, exponent, M=1.0):
        return cls(BathKind.POWER_LAW, gamma0, M, cutoff, exponent)

    def to_dict(self):
        data = asdict(self)
        data['kind'] = self.kind.value
        return {k: v for k, v in data.items() if v is not None}
