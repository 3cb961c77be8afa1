"""Single-photon emission fields of a decaying two-level atom: E.r versus A.p
coupling, light-cone causality, and numerical cross-checks."""

__version__ = "0.1.0"

from .atomkit import PRESETS, PhysicalConstants, TransitionSpec, dipole_moment
from .coupling import CouplingModel, ModeIndex, coupling, cutoff, ground_amplitude
from .estimators import DecayEstimator, EmissionFieldEstimator
from .exceptions import AccuracyError, FitError, IntegratorError, SingularityError
from .fields import FieldOptions, FieldScan, field, remanent_energy, scan
from .kernels import KernelModel, kernel

__all__ = [
    "PRESETS", "PhysicalConstants", "TransitionSpec", "dipole_moment",
    "CouplingModel", "ModeIndex", "coupling", "cutoff", "ground_amplitude",
    "DecayEstimator", "EmissionFieldEstimator",
    "AccuracyError", "FitError", "IntegratorError", "SingularityError",
    "FieldOptions", "FieldScan", "field", "remanent_energy", "scan",
    "KernelModel", "kernel",
]
