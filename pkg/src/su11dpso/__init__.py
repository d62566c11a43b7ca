"""SU(1,1) interferometer with delocalized photon subtraction.

Closed-form moments come from a truncated generating function
(:mod:`.moments`); :mod:`.fock` is an independent brute-force simulator
used to check them.
"""

from .moments import MomentTable, moment_table, normalization_A, q_moment
from .observables import IntensityStats, SensitivityCurve, intensity_stats, phase_sensitivity
from .optimizer import NoFeasiblePointError, OptimizationResult, minimize_scalar, optimize_dpso_t, optimize_phi
from .params import MODES, DegenerateStateError, InterferometerParams
from .qfi import DegenerateLimitsError, QfiReport, limits, qfi_ideal, qfi_lossy, total_photon_number

__version__ = "0.1.0"

__all__ = [
    "InterferometerParams",
    "MODES",
    "DegenerateStateError",
    "DegenerateLimitsError",
    "NoFeasiblePointError",
    "MomentTable",
    "moment_table",
    "q_moment",
    "normalization_A",
    "IntensityStats",
    "SensitivityCurve",
    "intensity_stats",
    "phase_sensitivity",
    "QfiReport",
    "qfi_ideal",
    "qfi_lossy",
    "total_photon_number",
    "limits",
    "OptimizationResult",
    "minimize_scalar",
    "optimize_dpso_t",
    "optimize_phi",
]
