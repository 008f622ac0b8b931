"""Integrand of the first-order corrugation response.

Two layers live here.

* Literal, complex-valued building blocks in SI units: the polarization
  outer products, the first-order reflection coefficients and the combined
  channel sum ``a^{mn}``.  They are used for validation and for the
  perfect-conductor limit checks.
* A fused, real-arithmetic kernel in dimensionless variables (lengths in
  units of ``z0``, frequencies in units of ``c / z0``) that returns
  ``zeta**2 * a^{mn} * |k| |k'|``.  The factor ``zeta**2`` cancels the
  ``1/xi`` poles of the TM polarization vectors and ``|k| |k'|`` cancels the
  unit-vector denominators, so the kernel is finite everywhere including
  ``zeta -> 0`` and the foci ``k = 0``, ``k' = 0``.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .materials import PermittivityModel, Plasma

__all__ = [
    "Polarization",
    "CHANNELS",
    "angle_factors",
    "outer_product_matrix",
    "reflection_first_order",
    "integrand_a",
    "SurfaceResponse",
    "surface_response",
    "fused_components",
    "fused_trace",
    "SMALL_ZETA",
    "COMPONENTS",
]


class Polarization(str, Enum):
    TE = "TE"
    TM = "TM"


TE, TM = Polarization.TE, Polarization.TM
CHANNELS = ((TE, TE), (TE, TM), (TM, TE), (TM, TM))

# below this dimensionless frequency a plasma surface is treated as a perfect conductor
SMALL_ZETA = 1e-8

# order of the rows returned by fused_components
COMPONENTS = ("xx", "yy", "zz", "xz", "zx")


def _vec(k):
    k = np.asarray(k, dtype=float)
    return k[..., 0], k[..., 1]


def angle_factors(k, kp):
    """Sine and cosine of the angle between two lateral wavevectors.

    Returns ``S = (k_y k'_x - k_x k'_y) / (|k||k'|)`` and
    ``C = (k_x k'_x + k_y k'_y) / (|k||k'|)``.
    """
    kx, ky = _vec(k)
    qx, qy = _vec(kp)
    norm = np.hypot(kx, ky) * np.hypot(qx, qy)
    if np.any(norm == 0):
        raise ValueError("angle_factors needs nonzero wavevectors")
    return (ky * qx - kx * qy) / norm, (kx * qx + ky * qy) / norm


def _kappa(k_norm, xi, c):
    return np.sqrt((xi / c) ** 2 + k_norm**2)


def _channel(channel):
    p, pp = channel
    return Polarization(p), Polarization(pp)


def outer_product_matrix(channel, k, kp, xi, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """``[e^-_{p'}(k')]_m [e^+_p(k)]_n`` as a complex 3x3 matrix.

    Parameters
    ----------
    channel : (p, p')
        Polarization of the incoming wave ``k`` and of the outgoing wave ``k'``.
    k, kp : array_like, shape (2,)
        Lateral wavevectors (1/m).
    xi : float
        Imaginary frequency (rad/s); must be positive for TM channels.
    """
    p, pp = _channel(channel)
    kx, ky = _vec(k)
    qx, qy = _vec(kp)
    kn, qn = math.hypot(kx, ky), math.hypot(qx, qy)
    if kn == 0 or qn == 0:
        raise ValueError("outer_product_matrix needs nonzero wavevectors")
    if TM in (p, pp) and not xi > 0:
        raise ValueError("TM polarization vectors need xi > 0")
    kap, kapp = _kappa(kn, xi, c), _kappa(qn, xi, c)
    if p is TE:
        e_in = np.array([-ky, kx, 0.0], dtype=complex) / kn
    else:
        e_in = (c / xi) * np.array([kap * kx, kap * ky, 1j * kn**2]) / kn
    if pp is TE:
        e_out = np.array([-qy, qx, 0.0], dtype=complex) / qn
    else:
        e_out = (c / xi) * np.array([-kapp * qx, -kapp * qy, 1j * qn**2]) / qn
    return np.outer(e_out, e_in)


def reflection_first_order(channel, k, kp, xi, eps, c: float = SPEED_OF_LIGHT):
    """First-order corrugation reflection coefficient ``R_{p p'}(k, k')``.

    ``eps = math.inf`` selects the perfect-conductor limits.  Arrays of
    wavevectors (trailing axis of length 2) and frequencies broadcast.
    """
    p, pp = _channel(channel)
    S, C = angle_factors(k, kp)
    kn = np.hypot(*_vec(k))
    qn = np.hypot(*_vec(kp))
    xi = np.asarray(xi, dtype=float)
    q = xi / c
    kap, kapp = _kappa(kn, xi, c), _kappa(qn, xi, c)
    if np.isinf(eps):
        if (p, pp) == (TE, TE):
            out = -2 * kapp * C
        elif (p, pp) == (TE, TM):
            out = -2 * q * S
        elif (p, pp) == (TM, TE):
            out = -2 * q * (kapp / kap) * S
        else:
            out = (2 / kap) * (kn * qn + q**2 * C)
        return np.asarray(out, dtype=complex)[()]
    if eps < 1:
        raise ValueError(f"permittivity must be >= 1, got {eps}")
    kt = np.sqrt(eps * q**2 + kn**2)
    ktp = np.sqrt(eps * q**2 + qn**2)
    if (p, pp) == (TE, TE):
        out = 2 * kapp * (kap - kt) / (kapp + ktp) * C
    elif (p, pp) == (TE, TM):
        out = 2 * kapp / q * ktp * (kap - kt) / (eps * kapp + ktp) * S
    else:
        den = q**2 - kap**2 * (eps + 1)
        # kappa >= xi/c makes this strictly negative, so there is no pole
        assert np.all(den < 0), "TM denominator must be negative"
        if (p, pp) == (TM, TE):
            out = 2 * kapp * q / (kapp + ktp) * (eps * kap - kt) * kt * S / den
        else:
            out = (-2 * kapp * (eps * kap - kt) / (eps * kapp + ktp)
                   * (eps * kn * qn + kt * ktp * C) / den)
    return np.asarray(out, dtype=complex)[()]


_AXIS = {"x": 0, "y": 1, "z": 2}


def integrand_a(m: str, n: str, k1, k2, xi, z0, eps, c: float = SPEED_OF_LIGHT) -> complex:
    """Channel sum ``a^{mn}_{k1,k2}`` for a single pair of wavevectors.

    ``exp(-(kappa1 + kappa2) z0) / (2 kappa2)`` times the sum over both
    polarizations of ``R_{p1 p2}(k1, k2) [e^-_{p2}(k2)]_m [e^+_{p1}(k1)]_n``.
    """
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    i, j = _AXIS[m], _AXIS[n]
    k1n = math.hypot(*_vec(k1))
    k2n = math.hypot(*_vec(k2))
    kap1, kap2 = _kappa(k1n, xi, c), _kappa(k2n, xi, c)
    total = 0j
    for ch in CHANNELS:
        total += reflection_first_order(ch, k1, k2, xi, eps, c) * outer_product_matrix(ch, k1, k2, xi, c)[i, j]
    return complex(np.exp(-(kap1 + kap2) * z0) / (2 * kap2) * total)


class SurfaceResponse:
    """Surface permittivity sampled on dimensionless frequencies.

    Attributes
    ----------
    eps : ndarray
        ``eps(i xi)``, possibly ``inf``.
    chi_z2 : ndarray
        ``(eps - 1) * zeta**2``, finite for the plasma model at ``zeta -> 0``.
    perfect : ndarray of bool
        Where the perfect-conductor limit formulas apply.
    """

    __slots__ = ("eps", "chi_z2", "perfect")

    def __init__(self, eps, chi_z2, perfect):
        self.eps = eps
        self.chi_z2 = chi_z2
        self.perfect = perfect


def surface_response(surface: PermittivityModel, zeta, unit: float) -> SurfaceResponse:
    """Evaluate `surface` at ``xi = zeta * unit`` (``unit = c / z0`` in rad/s)."""
    zeta = np.asarray(zeta, dtype=float)
    if surface.is_perfect:
        perfect = np.ones(zeta.shape, dtype=bool)
    elif isinstance(surface, Plasma):
        perfect = zeta < SMALL_ZETA
    else:
        perfect = np.zeros(zeta.shape, dtype=bool)
    safe = np.where(perfect, 1.0, zeta)
    chi_z2 = np.where(perfect, 0.0, surface.susceptibility_xi2(safe * unit) / unit**2)
    eps = np.where(perfect, np.inf, 1.0 + chi_z2 / safe**2)
    return SurfaceResponse(eps, chi_z2, perfect)


def _rho(z2, k1, k2, ka, kb, S, C, resp: SurfaceResponse):
    """Reflection coefficients with the zeta factors of the fused kernel absorbed.

    Returns ``(zeta^2 R_TETE, zeta R_TETM, zeta R_TMTE, R_TMTM)`` evaluated
    through algebraically rearranged forms that avoid the cancellation in
    ``kappa - kappa_t`` and ``eps kappa - kappa_t``.
    """
    perfect = resp.perfect
    chi_z2 = resp.chi_z2
    eps = np.where(perfect, 2.0, resp.eps)
    kat = np.sqrt(ka * ka + chi_z2)
    kbt = np.sqrt(kb * kb + chi_z2)
    d_a = -chi_z2 / (ka + kat)              # kappa - kappa_t
    den_a = eps * ka + kat
    # (eps k - k_t) / (zeta^2 - k^2 (eps + 1)) == -(eps - 1) / (eps k + k_t)
    tm_ratio = -(eps - 1.0) / den_a
    tetm = 2 * kb * kbt * d_a / (eps * kb + kbt) * S
    tete = z2 * 2 * kb * d_a / (kb + kbt) * C
    tmte = z2 * 2 * kb / (kb + kbt) * kat * S * tm_ratio
    tmtm = -2 * kb / (eps * kb + kbt) * tm_ratio * (eps * k1 * k2 + kat * kbt * C)
    if np.any(perfect):
        tete = np.where(perfect, -2 * z2 * kb * C, tete)
        tetm = np.where(perfect, -2 * z2 * S, tetm)
        tmte = np.where(perfect, -2 * z2 * kb / ka * S, tmte)
        tmtm = np.where(perfect, 2 / ka * (k1 * k2 + z2 * C), tmtm)
    return tete, tetm, tmte, tmtm


def _geometry(zeta, kx, ky, qx, qy, k1, k2):
    z2 = zeta * zeta
    ka = np.sqrt(z2 + k1 * k1)
    kb = np.sqrt(z2 + k2 * k2)
    norm = k1 * k2
    S = (ky * qx - kx * qy) / norm
    C = (kx * qx + ky * qy) / norm
    return z2, ka, kb, S, C


def fused_components(zeta, kx, ky, qx, qy, k1, k2, resp: SurfaceResponse) -> np.ndarray:
    """``zeta^2 |k| |k'| a^{mn}_{k,k'}`` in dimensionless variables.

    Parameters
    ----------
    zeta : array_like
        ``xi z0 / c``.
    kx, ky, qx, qy : array_like
        Components of ``k`` and ``k'`` in units of ``1/z0``.
    k1, k2 : array_like
        ``|k|`` and ``|k'|``, passed separately so callers can supply
        cancellation-free values.
    resp : SurfaceResponse
        Broadcastable against the other arguments.

    Returns
    -------
    ndarray
        Leading axis of length 5 ordered as `COMPONENTS`.  The diagonal rows
        are real; ``a^{xz}`` and ``a^{zx}`` are purely imaginary and their
        imaginary parts are returned.  Components ``xy`` and ``yz`` are odd
        in ``k_y`` and integrate to zero over the plane, so they are omitted.
    """
    z2, ka, kb, S, C = _geometry(zeta, kx, ky, qx, qy, k1, k2)
    tete, tetm, tmte, tmtm = _rho(z2, k1, k2, ka, kb, S, C, resp)
    pref = np.exp(-(ka + kb)) / (2 * kb)
    kk = ka * kb
    xx = tete * qy * ky + tetm * kb * qx * ky - tmte * ka * qy * kx - tmtm * kk * qx * kx
    yy = tete * qx * kx - tetm * kb * qy * kx + tmte * ka * qx * ky - tmtm * kk * qy * ky
    zz = -tmtm * (k1 * k2) ** 2
    xz = -k1 * k1 * (tmte * qy + tmtm * kb * qx)
    zx = k2 * k2 * (tmtm * ka * kx - tetm * ky)
    return pref * np.stack(np.broadcast_arrays(xx, yy, zz, xz, zx))


def fused_trace(zeta, kx, ky, qx, qy, k1, k2, resp: SurfaceResponse):
    """``zeta^2 |k| |k'| sum_m a^{mm}`` assembled from the polarization-vector dot products.

    Independent of `fused_components`: it contracts ``e^-_{p'}(k') . e^+_p(k)``
    for each channel directly instead of summing diagonal matrix entries.
    """
    z2, ka, kb, S, C = _geometry(zeta, kx, ky, qx, qy, k1, k2)
    tete, tetm, tmte, tmtm = _rho(z2, k1, k2, ka, kb, S, C, resp)
    pref = np.exp(-(ka + kb)) / (2 * kb)
    norm = k1 * k2
    dots = (tete * C * norm
            + tetm * kb * S * norm
            + tmte * ka * S * norm
            - tmtm * (ka * kb * C * norm + norm * norm))
    return pref * dots
