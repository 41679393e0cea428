"""Coverage and capacity of cell-free LEO satellite downlinks: closed form and Monte Carlo."""
from .config import CapacityConfig, IltControl, NetworkConfig
from .errors import NumericalError, NumericalWarning, ParameterError

__all__ = ["CapacityConfig", "IltControl", "NetworkConfig", "NumericalError", "NumericalWarning",
           "ParameterError"]
