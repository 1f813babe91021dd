"""Two-time correlation functions of a one-electron atom in a short pulse.

Ab initio velocity-gauge TDSE engine (checkpoint-and-repropagate) for
coordinate and velocity autocorrelation matrices, closed-form free-motion
and oscillator oracles, an ionization-weighted analytic model with a
single fit constant, and scoring/fitting utilities, all behind one CLI.
"""

__version__ = "0.1.0"

from .correlation import (CorrelationMatrix, TimeGrid, correlation_tdse,
                          mean_trajectory, read_correlation, signed_power,
                          velocity_from_zz, write_correlation)
from .errors import (ConfigError, HeisencorrError, MissingArtifactError,
                     NumericalError)
from .grid import (PotentialSpec, RadialGrid, WaveState, build_ground_state,
                   load_state, save_state)
from .model import (IonizationProfile, ModelDecomposition, RateProvider,
                    assemble_model, cross_terms, ionization_profile,
                    model_correlation, quasistatic_rate)
from .compare import FitReport, fit_c, frobenius_rel, pattern_correlation
from .oracles import SecondMoments, ho_zz, hydrogen_1s_moments, volkov_zz
from .pulse import PulseParams, electric_field, excursion_integral, \
    keldysh_gamma, vector_potential

__all__ = [
    "__version__",
    "CorrelationMatrix", "TimeGrid", "correlation_tdse", "mean_trajectory",
    "read_correlation", "signed_power", "velocity_from_zz", "write_correlation",
    "ConfigError", "HeisencorrError", "MissingArtifactError", "NumericalError",
    "PotentialSpec", "RadialGrid", "WaveState", "build_ground_state",
    "load_state", "save_state",
    "IonizationProfile", "ModelDecomposition", "RateProvider",
    "assemble_model", "cross_terms", "ionization_profile", "model_correlation",
    "quasistatic_rate",
    "FitReport", "fit_c", "frobenius_rel", "pattern_correlation",
    "SecondMoments", "ho_zz", "hydrogen_1s_moments", "volkov_zz",
    "PulseParams", "electric_field", "excursion_integral", "keldysh_gamma",
    "vector_potential",
]
