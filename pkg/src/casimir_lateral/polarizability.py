"""Polarizability tensor of a prolate spheroidal nanoparticle.

Polarizabilities are returned in units of ``eps0 * m^3`` divided out, i.e. as
the dimensionless ratio ``alpha / eps0`` times the volume in m^3.  Callers
that need SI values multiply by ``scipy.constants.epsilon_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .materials import PermittivityModel

__all__ = [
    "depolarizing_factor",
    "principal_polarizabilities",
    "oriented_tensor",
    "PolarizabilityTensor",
    "ParticleModel",
]

# below this value of r - 1 the closed form loses too many digits
_SERIES_CUTOFF = 1e-4


def depolarizing_factor(r: float) -> float:
    """Depolarizing factor of a prolate spheroid along its symmetry axis.

    Parameters
    ----------
    r : float
        Aspect ratio (long over short semi-axis), ``r >= 1``.

    Returns
    -------
    float
        ``d`` in (0, 1/3]; ``d(1) = 1/3``.
    """
    if not r >= 1:
        raise ValueError(f"aspect ratio must be >= 1 (prolate), got {r}")
    if math.isinf(r):
        return 0.0
    # eccentricity e^2 = 1 - 1/r^2, written to avoid cancellation
    e2 = (r - 1.0) * (r + 1.0) / (r * r)
    if r - 1.0 < _SERIES_CUTOFF:
        # (atanh e - e)/e^3 = sum_n e^(2n) / (2n + 3)
        series = sum(e2**n / (2 * n + 3) for n in range(6))
        return (1.0 - e2) * series
    e = math.sqrt(e2)
    return (1.0 - e2) * (math.atanh(e) - e) / (e2 * e)


def principal_polarizabilities(eps_p, volume: float, d: float):
    """Polarizabilities along and across the spheroid axis, over ``eps0``.

    Parameters
    ----------
    eps_p : float or ndarray
        Particle permittivity; ``math.inf`` marks a perfect conductor.
    volume : float
        Particle volume in m^3.
    d : float
        Depolarizing factor.

    Returns
    -------
    (alpha_par, alpha_perp) : tuple
        In units of ``eps0``, i.e. m^3.
    """
    chi = np.asarray(eps_p, dtype=float) - 1.0
    return _principal_from_chi(chi, volume, d)


def _principal_from_chi(chi, volume, d):
    chi = np.asarray(chi, dtype=float)
    inf = np.isinf(chi)
    c = np.where(inf, 0.0, chi)
    par = np.where(inf, 1.0 / d, c / (1.0 + c * d))
    perp = np.where(inf, 2.0 / (1.0 - d), c / (1.0 + 0.5 * c * (1.0 - d)))
    par, perp = volume * par, volume * perp
    if par.ndim == 0:
        return float(par), float(perp)
    return par, perp


@dataclass(frozen=True)
class PolarizabilityTensor:
    """Symmetric 3x3 tensor kept as its six independent components.

    Components may be scalars or equally shaped arrays (one entry per
    frequency node).
    """

    xx: object
    yy: object
    zz: object
    xy: object
    xz: object
    yz: object

    def matrix(self) -> np.ndarray:
        """Dense 3x3 form (trailing axes carry any array shape)."""
        return np.array([[self.xx, self.xy, self.xz],
                         [self.xy, self.yy, self.yz],
                         [self.xz, self.yz, self.zz]], dtype=float)

    def trace(self):
        return self.xx + self.yy + self.zz

    def scaled(self, factor) -> "PolarizabilityTensor":
        return PolarizabilityTensor(*(factor * getattr(self, n) for n in
                                      ("xx", "yy", "zz", "xy", "xz", "yz")))


def _sincos(angle: float) -> tuple[float, float]:
    """sin and cos with exact zeros at multiples of pi/2.

    ``cos(pi/2)`` evaluates to 6e-17 in floating point; snapping it keeps the
    off-diagonal entries that vanish by symmetry exactly zero.
    """
    s, c = math.sin(angle), math.cos(angle)
    if abs(s) < 4 * _EPS:
        s = 0.0
    if abs(c) < 4 * _EPS:
        c = 0.0
    return s, c


_EPS = np.finfo(float).eps


def oriented_tensor(a_par, a_perp, theta: float, phi: float) -> PolarizabilityTensor:
    """Tensor of a uniaxial particle whose axis points along (theta, phi)."""
    a_par = np.asarray(a_par, dtype=float)
    a_perp = np.asarray(a_perp, dtype=float)
    diff = a_par - a_perp
    st, ct = _sincos(theta)
    sp, cp = _sincos(phi)
    comps = (
        a_perp + diff * st * st * cp * cp,
        a_perp + diff * st * st * sp * sp,
        a_perp + diff * ct * ct,
        diff * st * st * sp * cp,
        diff * st * ct * cp,
        diff * st * ct * sp,
    )
    if a_par.ndim == 0 and a_perp.ndim == 0:
        comps = tuple(float(c) for c in comps)
    return PolarizabilityTensor(*comps)


@dataclass(frozen=True)
class ParticleModel:
    """Prolate spheroid of aspect ratio `r`, volume `volume` (m^3), axis (theta, phi)."""

    r: float
    volume: float
    material: PermittivityModel
    theta: float = math.pi / 2
    phi: float = 0.0
    d: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.r >= 1:
            raise ValueError(f"particle.r must be >= 1, got {self.r}")
        if not self.volume > 0:
            raise ValueError(f"particle volume must be positive, got {self.volume}")
        if not 0 <= self.theta <= math.pi:
            raise ValueError(f"particle.theta must lie in [0, pi], got {self.theta}")
        if not 0 <= self.phi < 2 * math.pi:
            raise ValueError(f"particle.phi must lie in [0, 2 pi), got {self.phi}")
        object.__setattr__(self, "d", depolarizing_factor(self.r))

    def principal(self, xi):
        """(alpha_par, alpha_perp) over ``eps0`` at imaginary frequency `xi`."""
        return _principal_from_chi(self.material.susceptibility(xi), self.volume, self.d)

    def tensor(self, xi) -> PolarizabilityTensor:
        return oriented_tensor(*self.principal(xi), self.theta, self.phi)

    def static_tensor(self) -> PolarizabilityTensor:
        """Zero-frequency tensor (plasma particles become perfect conductors)."""
        chi = self.material.static().susceptibility(0.0)
        return oriented_tensor(*_principal_from_chi(chi, self.volume, self.d),
                               self.theta, self.phi)

    def tensor_hat(self, zeta, z0: float, c: float) -> PolarizabilityTensor:
        """Tensor over ``eps0 * volume`` at dimensionless frequency ``zeta = xi z0 / c``."""
        xi = np.asarray(zeta, dtype=float) * (c / z0)
        return self.tensor(xi).scaled(1.0 / self.volume)
