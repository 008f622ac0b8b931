"""The four lateral-energy integrals, amplitude, phase and energy profile.

Internally everything is dimensionless: lengths in units of ``z0`` and
frequencies in units of ``c / z0``, so ``zeta = xi z0 / c``.  In these
units a component reads

    V = (eps0 V c / z0**5) * int dzeta alpha_hat(zeta) int d^2k F(k, zeta)

with ``alpha_hat = alpha / (eps0 V)`` and ``F = zeta**2 a^{mn}``.

The wavevector plane is covered in elliptic coordinates whose foci are the
two singular points ``k = 0`` and ``k' = k - k_c x`` of the integrand:

    k_x = f (1 + cosh(mu) cos(nu)),   k_y = f sinh(mu) sin(nu),   f = k_c / 2

Then ``|k| = f (cosh mu + cos nu)``, ``|k'| = f (cosh mu - cos nu)`` and the
Jacobian is exactly ``|k| |k'|``, which is already folded into the fused
kernel of :mod:`casimir_lateral.scattering`.  The integrand is even in
``nu``, so only ``nu`` in [0, pi] is sampled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import epsilon_0, hbar

from .materials import Constant, PermittivityModel, Plasma, vdw_weight
from .polarizability import ParticleModel
from .quadrature import (
    ConvergenceError,
    QuadratureConfig,
    QuadratureResult,
    _adaptive,
    _tolerance,
    integrate_semi_infinite,
)
from .scattering import SurfaceResponse, fused_components, fused_trace, surface_response
from .special_functions import bessel_k

__all__ = [
    "Geometry",
    "VComponents",
    "DegenerateConfigurationError",
    "ValidityWarning",
    "k_integrals",
    "kernels_vdw",
    "v_components_retarded",
    "v_components_vdw",
    "v_components_cp",
    "v_sum_trace_form",
    "amplitude_phase",
    "lateral_energy",
    "equilibrium_position",
    "energy_prefactor",
]


class DegenerateConfigurationError(ValueError):
    """Both the cosine and sine amplitudes vanish, so the phase is undefined."""


class ValidityWarning(UserWarning):
    """Input outside the regime where first-order perturbation theory is reliable."""


@dataclass(frozen=True)
class Geometry:
    """Corrugation amplitude `a` (m), wavenumber `k_c` (rad/m), particle height `z0` (m)."""

    a: float
    k_c: float
    z0: float

    def __post_init__(self):
        for name in ("a", "k_c", "z0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"geometry.{name} must be positive, got {getattr(self, name)}")
        if not self.a < self.z0:
            raise ValueError(f"corrugation amplitude a = {self.a} must be below z0 = {self.z0}")
        if self.a > 0.1 * self.z0:
            warnings.warn(f"a/z0 = {self.a / self.z0:.3g} exceeds 0.1; first-order "
                          "corrugation theory may be inaccurate", ValidityWarning, stacklevel=2)

    @classmethod
    def from_ratio(cls, lambda_over_z0: float, z0: float, a: float | None = None) -> "Geometry":
        """Geometry for a corrugation period of ``lambda_over_z0 * z0``.

        The amplitude defaults to ``z0 / 20``; it only scales the energy.
        """
        if not lambda_over_z0 > 0:
            raise ValueError("lambda_c/z0 must be positive")
        return cls(z0 / 20 if a is None else a, 2 * math.pi / (lambda_over_z0 * z0), z0)

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k_c

    @property
    def lambda_over_z0(self) -> float:
        return self.wavelength / self.z0

    @property
    def u(self) -> float:
        """Dimensionless ``k_c z0``."""
        return self.k_c * self.z0


@dataclass(frozen=True)
class VComponents:
    """The four lateral integrals in SI units with absolute error estimates.

    Attributes
    ----------
    v_xx, v_yy, v_zz, v_xz : float
        SI values, units of F m^-2 s^-1 (i.e. ``eps0 m^3 s^-1 m^-4``).
    err_xx, err_yy, err_zz, err_xz : float
        Absolute error estimates of the same.
    norm_factor : float
        Multiplies an SI value into the reported dimensionless form
        ``V z0**4 / (eps0 V_particle omega_ref)``.
    omega_ref : float
        Reference frequency of the normalization (rad/s).
    evaluations : int
        Number of integrand evaluations.
    imag_residual : float
        Largest imaginary part relative to the component modulus.  The fused
        kernel works in real arithmetic with the factors of ``i`` removed
        analytically, so this is zero by construction.
    """

    v_xx: float
    v_yy: float
    v_zz: float
    v_xz: float
    err_xx: float
    err_yy: float
    err_zz: float
    err_xz: float
    norm_factor: float
    omega_ref: float
    evaluations: int = 0
    imag_residual: float = 0.0

    @property
    def v_sum(self) -> float:
        return self.v_xx + self.v_yy + self.v_zz

    @property
    def err_sum(self) -> float:
        return self.err_xx + self.err_yy + self.err_zz

    def normalized(self) -> dict[str, float]:
        """Dimensionless components, keys ``xx, yy, zz, xz, sum``."""
        n = self.norm_factor
        return {"xx": self.v_xx * n, "yy": self.v_yy * n, "zz": self.v_zz * n,
                "xz": self.v_xz * n, "sum": self.v_sum * n}


def reference_frequency(particle: ParticleModel, surface: PermittivityModel, z0: float,
                        c: float = SPEED_OF_LIGHT) -> float:
    """Frequency used for the dimensionless report.

    The particle plasma frequency if it has one, else the surface plasma
    frequency, else ``c / z0``.
    """
    for model in (particle.material, surface):
        if isinstance(model, Plasma):
            return model.omega_p
    return c / z0


def _make(values, errors, particle, surface, geom, c, evaluations) -> VComponents:
    scale = epsilon_0 * particle.volume * c / geom.z0**5
    omega_ref = reference_frequency(particle, surface, geom.z0, c)
    norm = geom.z0**4 / (epsilon_0 * particle.volume * omega_ref)
    v = [float(x) * scale for x in values]
    e = [float(x) * scale for x in errors]
    return VComponents(*v, *e, norm_factor=norm, omega_ref=omega_ref, evaluations=int(evaluations))


# --------------------------------------------------------------------------
# wavevector integral


def _reshape_resp(resp: SurfaceResponse) -> SurfaceResponse:
    return SurfaceResponse(resp.eps[:, None, None], resp.chi_z2[:, None, None],
                           resp.perfect[:, None, None])


def _elliptic(mu, nu, kc):
    """Cartesian components of k and k' together with cancellation-free norms."""
    f = 0.5 * abs(kc)
    s = math.copysign(1.0, kc)
    ch1 = 2.0 * np.sinh(0.5 * mu) ** 2          # cosh(mu) - 1
    one_m_cn = 2.0 * np.sin(0.5 * nu) ** 2      # 1 - cos(nu)
    one_p_cn = 2.0 * np.cos(0.5 * nu) ** 2      # 1 + cos(nu)
    cn = np.cos(nu)
    kx = s * f * (one_p_cn + ch1 * cn)
    ky = f * np.sinh(mu) * np.sin(nu)
    qx = s * f * (ch1 * cn - one_m_cn)
    k1 = f * (ch1 + one_p_cn)
    k2 = f * (ch1 + one_m_cn)
    return kx, ky, qx, ky, k1, k2


def _nu_integral(kernel, zeta, mu, kc, resp, cfg, n_start=16, n_max=4096):
    """Trapezoid rule in nu over [0, pi] with doubling, for every (zeta, mu) pair.

    The integrand is smooth, even and 2 pi periodic in nu, so the rule
    converges spectrally.  Returns (values, errors) with shape
    ``(ncomp, nzeta, nmu)``; the factor 2 for the lower half plane is included.
    """
    z = zeta[:, None, None]
    m = mu[None, :, None]

    def evaluate(nu):
        kx, ky, qx, qy, k1, k2 = _elliptic(m, nu[None, None, :], kc)
        return kernel(z, kx, ky, qx, qy, k1, k2, resp)

    n = n_start
    nu = np.linspace(0.0, math.pi, n + 1)
    vals = evaluate(nu)
    w = np.full(n + 1, 1.0)
    w[0] = w[-1] = 0.5
    total = vals @ w
    total_abs = np.abs(vals) @ w
    estimate = total * (math.pi / n)
    while True:
        nu_mid = (np.arange(n) + 0.5) * (math.pi / n)
        mid = evaluate(nu_mid)
        total = total + mid.sum(axis=-1)
        total_abs = total_abs + np.abs(mid).sum(axis=-1)
        n *= 2
        refined = total * (math.pi / n)
        err = np.abs(refined - estimate)
        tol = _tolerance(refined, cfg, total_abs * (math.pi / n))
        if float(np.max(err)) <= tol:
            return 2.0 * refined, 2.0 * err, 2 * n
        if n >= n_max:
            raise ConvergenceError("nu integration did not converge",
                                   QuadratureResult(2.0 * refined, 2.0 * err, n))
        estimate = refined


def k_integrals(zeta, surface: PermittivityModel, kc: float, unit: float,
                cfg: QuadratureConfig | None = None, trace: bool = False):
    """Integrate the fused kernel over the wavevector plane.

    Parameters
    ----------
    zeta : array_like
        Dimensionless frequencies ``xi z0 / c``.
    surface : PermittivityModel
    kc : float
        Dimensionless corrugation wavenumber ``k_c z0``; its sign selects
        ``+k_c`` or ``-k_c`` along x.
    unit : float
        ``c / z0`` in rad/s, to evaluate the permittivity.
    cfg : QuadratureConfig
        Tolerance of this two-level integral; each level gets half.
    trace : bool
        Integrate the trace kernel instead of the five components.

    Returns
    -------
    values, errors : ndarray
        Shape ``(5, nzeta)`` (or ``(1, nzeta)`` for the trace), ordered as
        :data:`casimir_lateral.scattering.COMPONENTS`.
    evaluations : int
    """
    cfg = cfg or QuadratureConfig()
    if kc == 0:
        raise ValueError("k_c must be nonzero")
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    resp = _reshape_resp(surface_response(surface, zeta, unit))
    level = cfg.scaled(0.5)
    kernel = (lambda *a: fused_trace(*a)[None]) if trace else fused_components
    f = 0.5 * abs(kc)
    mu_max = math.acosh(1.0 + cfg.tail_cutoff_multiplier / (2.0 * f))
    count = [0]

    def mu_integrand(mu):
        vals, errs, n = _nu_integral(kernel, zeta, mu, kc, resp, level)
        count[0] += n * mu.size * zeta.size
        return vals, errs

    values, errors, _, _ = _adaptive(mu_integrand, 0.0, mu_max, level, initial_panels=4)
    return values, errors, count[0]


# --------------------------------------------------------------------------
# retarded and static paths


def _dispersion_scale(particle: ParticleModel, surface: PermittivityModel, unit: float) -> float:
    scales = [m.omega_p / unit for m in (particle.material, surface) if isinstance(m, Plasma)]
    return min(scales) if scales else 1.0


def _alpha_rows(tensor):
    """Polarizability entries multiplying the xx, yy, zz and xz kernels."""
    return tensor.xx, tensor.yy, tensor.zz, tensor.xz


def _integrate_retarded(alpha_of, particle, surface, geom, cfg, c):
    unit = c / geom.z0
    kc = geom.u
    level = cfg.scaled(0.5)
    count = [0]

    def integrand(zeta):
        k_vals, k_errs, n = k_integrals(zeta, surface, kc, unit, level)
        count[0] += n
        axx, ayy, azz, axz = alpha_of(zeta)
        # V_xz = 2i int alpha_xz a^xz with a^xz = i * (returned imaginary part)
        w = np.stack([axx, ayy, azz, -2.0 * axz])
        vals = w * k_vals[[0, 1, 2, 3]]
        errs = np.abs(w) * k_errs[[0, 1, 2, 3]]
        return vals, errs

    scale = min(_dispersion_scale(particle, surface, unit), 1.0)
    res = integrate_semi_infinite(integrand, level, scale=scale, decay_rate=2.0)
    return res.value, res.error_estimate, count[0]


def v_components_retarded(particle: ParticleModel, surface: PermittivityModel, geom: Geometry,
                          cfg: QuadratureConfig | None = None,
                          c: float = SPEED_OF_LIGHT) -> VComponents:
    """Fully retarded integrals.

    The speed of light is a parameter so that the non-retarded limit can be
    approached by inflating it.
    """
    cfg = cfg or QuadratureConfig()

    def alpha_of(zeta):
        return _alpha_rows(particle.tensor_hat(zeta, geom.z0, c))

    if _is_zero_tensor(particle):
        return _make([0.0] * 4, [0.0] * 4, particle, surface, geom, c, 0)
    vals, errs, n = _integrate_retarded(alpha_of, particle, surface, geom, cfg, c)
    return _make(vals, errs, particle, surface, geom, c, n)


def v_components_cp(particle: ParticleModel, surface: PermittivityModel, geom: Geometry,
                    cfg: QuadratureConfig | None = None,
                    c: float = SPEED_OF_LIGHT) -> VComponents:
    """Retarded integrals with the zero-frequency polarizability and permittivity.

    A plasma surface becomes a perfect conductor in this limit.
    """
    cfg = cfg or QuadratureConfig()
    static = particle.static_tensor().scaled(1.0 / particle.volume)
    rows = _alpha_rows(static)

    def alpha_of(zeta):
        return tuple(np.full(np.shape(zeta), r) for r in rows)

    if all(r == 0 for r in rows):
        return _make([0.0] * 4, [0.0] * 4, particle, surface, geom, c, 0)
    vals, errs, n = _integrate_retarded(alpha_of, particle, surface.static(), geom, cfg, c)
    # the static problem has no dispersion scale; report against the original models
    return _make(vals, errs, particle, surface, geom, c, n)


def _is_zero_tensor(particle: ParticleModel) -> bool:
    m = particle.material
    return isinstance(m, Constant) and m.epsilon == 1.0


def v_sum_trace_form(particle: ParticleModel, surface: PermittivityModel, geom: Geometry,
                     cfg: QuadratureConfig | None = None,
                     c: float = SPEED_OF_LIGHT) -> tuple[float, float]:
    """``V_sum`` of an isotropic particle from the trace-only assembly.

    Uses ``alpha_mn = alpha delta_mn`` so that only the contracted polarization
    vectors enter, without building any matrix entry.  Returns (value, error)
    in SI units.
    """
    if particle.r != 1:
        raise ValueError("the trace form applies to isotropic (r = 1) particles only")
    cfg = cfg or QuadratureConfig()
    unit = c / geom.z0
    level = cfg.scaled(0.5)

    def integrand(zeta):
        k_vals, k_errs, _ = k_integrals(zeta, surface, geom.u, unit, level, trace=True)
        a = particle.tensor_hat(zeta, geom.z0, c).xx
        return a * k_vals[0], np.abs(a) * k_errs[0]

    scale = min(_dispersion_scale(particle, surface, unit), 1.0)
    res = integrate_semi_infinite(integrand, level, scale=scale, decay_rate=2.0)
    factor = epsilon_0 * particle.volume * c / geom.z0**5
    return float(res.value) * factor, float(res.error_estimate) * factor


# --------------------------------------------------------------------------
# non-retarded closed form


def kernels_vdw(u, full_output: bool = False):
    """The eight Bessel kernels of the non-retarded integrals.

    Returns a dict with keys ``cond_xx, diel_xx, cond_yy, diel_yy, cond_zz,
    diel_zz, cond_xz, diel_xz``.  Beyond the underflow threshold every kernel
    is 0; with ``full_output`` the underflow flag is returned as well.
    """
    k2, flag = bessel_k(2, u, full_output=True)
    k3 = bessel_k(3, u)
    u2, u3, u4 = u * u, u**3, u**4
    out = {
        "cond_xx": u3 * k3 - u4 * k2,
        "diel_xx": (56 / 3 * u2 + u4) * k2 - 11 / 3 * u3 * k3,
        "cond_yy": u3 * k3,
        "diel_yy": 8 * u2 * k2 - u3 * k3,
        "cond_zz": (16 / 3 * u2 + u4) * k2 + 2 / 3 * u3 * k3,
        "diel_zz": 2 * u3 * k3 - u4 * k2,
        "cond_xz": 8 / 3 * u3 * k2 - u4 * k3,
        "diel_xz": u4 * k3 - 16 / 3 * u3 * k2,
    }
    return (out, flag) if full_output else out


_VDW_PREFACTOR = {"xx": -3 * math.pi / 64, "yy": -3 * math.pi / 64,
                  "zz": -3 * math.pi / 64, "xz": 3 * math.pi / 32}


def v_components_vdw(particle: ParticleModel, surface: PermittivityModel, geom: Geometry,
                     cfg: QuadratureConfig | None = None,
                     c: float = SPEED_OF_LIGHT) -> VComponents:
    """Non-retarded integrals from the closed-form Bessel kernels.

    Only the frequency integral remains.  It converges when at least one of
    particle and surface is dispersive; otherwise the integrand is constant
    in frequency and a ValueError is raised.  The result does not depend on
    `c`, which only sets the internal frequency unit.
    """
    cfg = cfg or QuadratureConfig()
    if not (isinstance(particle.material, Plasma) or isinstance(surface, Plasma)):
        raise ValueError("the non-retarded frequency integral diverges unless the particle "
                         "or the surface is dispersive (plasma model)")
    unit = c / geom.z0
    K = kernels_vdw(geom.u)
    comps = ("xx", "yy", "zz", "xz")

    def integrand(zeta):
        xi = zeta * unit
        eps = surface.permittivity(xi)
        w, we = vdw_weight(eps)
        t = particle.tensor_hat(zeta, geom.z0, c)
        alpha = {"xx": t.xx, "yy": t.yy, "zz": t.zz, "xz": t.xz}
        return np.stack([_VDW_PREFACTOR[m] * alpha[m] * (we * K["cond_" + m] + w * K["diel_" + m])
                         for m in comps])

    scale = _dispersion_scale(particle, surface, unit)
    res = integrate_semi_infinite(integrand, cfg, scale=scale)
    return _make(res.value, res.error_estimate, particle, surface, geom, c, res.evaluations)


# --------------------------------------------------------------------------
# amplitude, phase and energy


def amplitude_phase(v: VComponents) -> tuple[float, float]:
    """Amplitude ``A`` and phase ``delta`` in (-pi, pi] of the lateral energy."""
    return amplitude_phase_values(v.v_sum, v.v_xz)


def amplitude_phase_values(v_sum: float, v_xz: float) -> tuple[float, float]:
    if v_sum == 0 and v_xz == 0:
        raise DegenerateConfigurationError("V_sum and V_xz both vanish; the phase is undefined")
    delta = math.atan2(v_xz, v_sum)
    if delta == -math.pi:
        delta = math.pi
    return math.hypot(v_sum, v_xz), delta


def energy_prefactor(a: float) -> float:
    """``a hbar / (8 pi^3 eps0)``, converting the amplitude ``A`` into joules."""
    return a * hbar / (8 * math.pi**3 * epsilon_0)


def lateral_energy(x0, geom: Geometry, A: float, delta: float):
    """First-order lateral energy ``U(x0)`` in joules."""
    return energy_prefactor(geom.a) * A * np.cos(geom.k_c * np.asarray(x0) - delta)


def equilibrium_position(geom: Geometry, delta: float) -> float:
    """Stable lateral equilibrium in [0, lambda_c); 0 is a corrugation peak."""
    lam = geom.wavelength
    x = math.fmod((delta + math.pi) / geom.k_c, lam)
    if x < 0:
        x += lam
    if x >= lam:
        x -= lam
    return x
