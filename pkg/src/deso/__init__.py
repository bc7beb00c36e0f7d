"""Data-driven observers for discrete-time descriptor systems."""

from deso.descriptor import DescriptorSystem, LtiSystem, weierstrass
from deso.data import DataRecord, build_data_matrices
from deso.linalg import Tolerances
from deso.observer import run
from deso.synthesis import ObserverGains, synthesize_eso, synthesize_observer, synthesize_uio

__all__ = [
    "DataRecord",
    "DescriptorSystem",
    "LtiSystem",
    "ObserverGains",
    "Tolerances",
    "__version__",
    "build_data_matrices",
    "run",
    "synthesize_eso",
    "synthesize_observer",
    "synthesize_uio",
    "weierstrass",
]

__version__ = "0.1.0"
