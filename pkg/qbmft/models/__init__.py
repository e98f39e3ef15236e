from qbmft.models.spectral_density import BathKind, SpectralDensity
from qbmft.models.kernel_table import KernelTable
from qbmft.models.greens_solutions import GreensSolutions
from qbmft.models.thermal_state import FreeEnergies, StationaryCorrelation, ThermalState
from qbmft.models.protocol import ForceProtocol
from qbmft.models.work_distribution import WorkDistribution
from qbmft.models.noise_ensemble import NoiseEnsemble
from qbmft.models.discrete_bath import DiscreteBath
from qbmft.models.history_pair import HistoryPair
from qbmft.models.experiment_config import ExperimentConfig

__all__ = ['BathKind', 'SpectralDensity', 'KernelTable', 'GreensSolutions', 'FreeEnergies',
           'StationaryCorrelation', 'ThermalState', 'ForceProtocol', 'WorkDistribution',
           'NoiseEnsemble', 'DiscreteBath', 'HistoryPair', 'ExperimentConfig']
