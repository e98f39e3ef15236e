from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from qbmft.models.protocol import SHAPES
from qbmft.models.spectral_density import BathKind
from qbmft.utils.error_handling import ConfigError

MODES = ('quantum', 'classical')
FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class BathBlock:
    kind: str = BathKind.OHMIC_DRUDE.value
    gamma0: float = 0.5
    cutoff: Optional[float] = 10.0
    exponent: Optional[float] = None
    beta: float = 1.0
    hbar: float = 1.0


@dataclass(frozen=True)
class SystemBlock:
    M: float = 1.0
    Omega: float = 1.0


@dataclass(frozen=True)
class ProtocolBlock:
    shape: str = 'smoothstep'
    amplitude: float = 1.0
    tau: float = 5.0
    f0: float = 0.0
    width: float = 0.125
    cycles: float = 1.0


@dataclass(frozen=True)
class NumericsBlock:
    dt: float = 0.0025
    horizon: float = 40.0
    tolerance: float = 1e-8
    matsubara_cutoff: Optional[int] = None
    series_order: int = 3
    lowtemp_terms: int = 50


@dataclass(frozen=True)
class MCBlock:
    samples: int = 10000
    seed: int = 12345
    mode: str = 'quantum'
    oracle: str = 'continuum'
    threads: int = 1
    bins: int = 40


@dataclass(frozen=True)
class OutputBlock:
    directory: str = 'output'
    formats: List[str] = field(default_factory=lambda: list(FORMATS))


@dataclass(frozen=True)
class DechistBlock:
    sigma: Optional[float] = None
    separation_scale: float = 5.0


_BLOCKS = {
    'bath': BathBlock,
    'system': SystemBlock,
    'protocol': ProtocolBlock,
    'numerics': NumericsBlock,
    'mc': MCBlock,
    'output': OutputBlock,
    'dechist': DechistBlock,
}


_MISSING = object()


def _coerce(path, ftype, value, errors):
    optional = ftype in (Optional[float], Optional[int])
    if value is None:
        if not optional:
            errors.append(f"{path}: must not be null")
            return _MISSING
        return None
    if ftype is str:
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string")
            return _MISSING
        return value
    if ftype == List[str]:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            errors.append(f"{path}: expected a list of strings")
            return _MISSING
        return list(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}: expected a number")
        return _MISSING
    if ftype in (int, Optional[int]):
        if float(value) != int(value):
            errors.append(f"{path}: expected an integer")
            return _MISSING
        return int(value)
    return float(value)


def _parse_block(name, cls, data, errors):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        errors.append(f"{name}: expected an object")
        return cls()
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"{name}.{key}: unknown field")
    values = {}
    for key, f in known.items():
        if key in data:
            value = _coerce(f"{name}.{key}", f.type, data[key], errors)
            if value is not _MISSING:
                values[key] = value
    return cls(**values)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description, one block per concern."""
    bath: BathBlock = field(default_factory=BathBlock)
    system: SystemBlock = field(default_factory=SystemBlock)
    protocol: ProtocolBlock = field(default_factory=ProtocolBlock)
    numerics: NumericsBlock = field(default_factory=NumericsBlock)
    mc: MCBlock = field(default_factory=MCBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    dechist: DechistBlock = field(default_factory=DechistBlock)

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        errors = [f"{key}: unknown block" for key in data if key not in _BLOCKS]
        blocks = {name: _parse_block(name, block, data.get(name), errors)
                  for name, block in _BLOCKS.items()}
        config = cls(**blocks)
        errors.extend(config.validation_errors())
        if errors:
            raise ConfigError(f"invalid configuration ({len(errors)} problem(s))", field_errors=errors)
        return config

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in _BLOCKS}

    def with_value(self, path: str, value) -> 'ExperimentConfig':
        """Copy with one dotted field replaced, e.g. 'bath.hbar'; revalidated."""
        block, _, key = path.partition('.')
        data = self.to_dict()
        if block not in data or key not in data[block]:
            raise ConfigError(f"unknown parameter '{path}'", field_errors=[f"{path}: unknown field"])
        data[block][key] = value
        return ExperimentConfig.from_dict(data)

    def validation_errors(self) -> List[str]:
        errors = []
        b, s, p, n, m = self.bath, self.system, self.protocol, self.numerics, self.mc
        kinds = [k.value for k in BathKind]
        if b.kind not in kinds:
            errors.append(f"bath.kind: expected one of {kinds}")
        if not (b.gamma0 and b.gamma0 > 0):
            errors.append("bath.gamma0: must be > 0")
        if b.kind != BathKind.OHMIC_NO_CUTOFF.value and not (b.cutoff and b.cutoff > 0):
            errors.append("bath.cutoff: required and positive for cutoff baths")
        if b.kind == BathKind.POWER_LAW.value and not (b.exponent and 0 < b.exponent < 2):
            errors.append("bath.exponent: required in (0, 2) for PowerLaw")
        if not (b.beta and b.beta > 0):
            errors.append("bath.beta: must be > 0")
        if b.hbar is None or b.hbar < 0:
            errors.append("bath.hbar: must be >= 0")
        if not (s.M and s.M > 0):
            errors.append("system.M: must be > 0")
        if not (s.Omega and s.Omega > 0):
            errors.append("system.Omega: must be > 0")
        if p.shape not in SHAPES or p.shape == 'tabulated':
            errors.append(f"protocol.shape: expected one of {[x for x in SHAPES if x != 'tabulated']}")
        if not (p.tau and p.tau > 0):
            errors.append("protocol.tau: must be > 0")
        if not (n.dt and n.dt > 0):
            errors.append("numerics.dt: must be > 0")
        elif p.tau and p.tau > 0:
            steps = p.tau / n.dt
            if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                errors.append("numerics.dt: protocol.tau must be a multiple of dt")
        if not (n.horizon and n.dt and n.horizon > 2 * (p.tau or 0)):
            errors.append("numerics.horizon: must exceed twice protocol.tau")
        if not (n.tolerance and 0 < n.tolerance < 1):
            errors.append("numerics.tolerance: must be in (0, 1)")
        if n.matsubara_cutoff is not None and n.matsubara_cutoff < 1:
            errors.append("numerics.matsubara_cutoff: must be >= 1")
        if not 1 <= n.series_order <= 10:
            errors.append("numerics.series_order: must be in 1..10")
        if n.lowtemp_terms < 1:
            errors.append("numerics.lowtemp_terms: must be >= 1")
        if m.samples < 1:
            errors.append("mc.samples: must be >= 1")
        if m.mode not in MODES:
            errors.append(f"mc.mode: expected one of {list(MODES)}")
        if m.oracle != 'continuum' and not _discrete_modes(m.oracle):
            errors.append("mc.oracle: expected 'continuum' or 'discrete:N'")
        elif m.oracle != 'continuum' and m.mode != 'classical':
            errors.append("mc.oracle: the discrete-bath oracle needs mc.mode = classical")
        if m.threads < 1:
            errors.append("mc.threads: must be >= 1")
        if m.bins < 3:
            errors.append("mc.bins: must be >= 3")
        if not isinstance(self.output.formats, list) or any(f not in FORMATS for f in self.output.formats):
            errors.append(f"output.formats: expected a subset of {list(FORMATS)}")
        if not self.output.directory:
            errors.append("output.directory: must be set")
        if self.dechist.sigma is not None and not self.dechist.sigma > 0:
            errors.append("dechist.sigma: must be > 0")
        if not self.dechist.separation_scale > 0:
            errors.append("dechist.separation_scale: must be > 0")
        return errors

    @property
    def effective_hbar(self) -> float:
        return 0.0 if self.mc.mode == 'classical' else self.bath.hbar

    @property
    def discrete_modes(self) -> Optional[int]:
        return _discrete_modes(self.mc.oracle)



def _discrete_modes(oracle: str) -> Optional[int]:
    if not isinstance(oracle, str) or not oracle.startswith('discrete:'):
        return None
    count = oracle.partition(':')[2]
    return int(count) if count.isdigit() and int(count) > 0 else None
