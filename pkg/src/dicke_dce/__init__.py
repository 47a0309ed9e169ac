"""Photon production from vacuum in a modulated, damped Dicke model.

Modules: ``model`` (normal modes, critical coupling), ``floquet`` (frequency
domain steady state), ``oracle`` (time-domain Gaussian moments), ``kz``
(adiabatic-impulse excitation probability) and ``sweeps`` (figure data).
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (SystemParams, NormalModes, omega_b, critical_coupling,  # noqa: F401
                    normal_mode_frequencies, gap_minimum, hp_validity_check, static_gap)
from .floquet import (DampingModel, SidebandGreenFunction, SteadyStateObservables,  # noqa: F401
                      assemble, build_m0, build_m1, green_function, intracavity_photons,
                      output_flux, spectral_density, choose_truncation, steady_state)
