"""First-order lateral Casimir-Polder energy of an anisotropic nanoparticle
above a sinusoidally corrugated dispersive surface."""

from .lateral_energy import (
    Geometry,
    VComponents,
    amplitude_phase,
    equilibrium_position,
    kernels_vdw,
    lateral_energy,
    v_components_cp,
    v_components_retarded,
    v_components_vdw,
    v_sum_trace_form,
)
from .materials import Constant, PerfectConductor, Plasma, permittivity, plasma_wavelength
from .polarizability import ParticleModel, depolarizing_factor, oriented_tensor, principal_polarizabilities
from .quadrature import QuadratureConfig, QuadratureResult
from .regimes import Regime, classify, find_transition, sweep
from .special_functions import bessel_k

__version__ = "0.1.0"
