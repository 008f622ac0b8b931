"""Dielectric response at imaginary frequency.

Three models are supported: the lossless plasma model, a frequency
independent dielectric constant, and the perfect conductor.  The perfect
conductor (and the plasma model at zero frequency) reports ``math.inf``;
callers branch on it and switch to the closed limit formulas instead of
evaluating with a huge finite number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

__all__ = [
    "Plasma",
    "Constant",
    "PerfectConductor",
    "PermittivityModel",
    "permittivity",
    "plasma_wavelength",
    "vdw_weight",
    "material_from_dict",
]


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("imaginary frequency xi must be >= 0")
    return xi


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Plasma:
    """``eps(i xi) = 1 + omega_p**2 / xi**2``."""

    omega_p: float

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError(f"plasma frequency must be positive, got {self.omega_p}")

    is_perfect = False

    def permittivity(self, xi):
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            return _out(np.where(xi > 0, 1.0 + self.omega_p**2 / xi**2, math.inf))

    def susceptibility(self, xi):
        """``eps - 1``, computed without cancellation."""
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            return _out(np.where(xi > 0, self.omega_p**2 / xi**2, math.inf))

    def susceptibility_xi2(self, xi):
        """``(eps - 1) * xi**2``; finite down to xi = 0."""
        xi = _check_xi(xi)
        return _out(np.full(xi.shape, self.omega_p**2))

    def static(self) -> "PerfectConductor":
        return PerfectConductor()

    def to_dict(self) -> dict:
        return {"kind": "plasma", "omega_p": self.omega_p}


@dataclass(frozen=True)
class Constant:
    """Nondispersive dielectric, ``eps(i xi) = epsilon`` for every xi."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon >= 1:
            raise ValueError(f"dielectric constant must be >= 1, got {self.epsilon}")

    @property
    def is_perfect(self) -> bool:
        return self.epsilon == math.inf

    def permittivity(self, xi):
        xi = _check_xi(xi)
        return _out(np.full(xi.shape, float(self.epsilon)))

    def susceptibility(self, xi):
        xi = _check_xi(xi)
        return _out(np.full(xi.shape, self.epsilon - 1.0))

    def susceptibility_xi2(self, xi):
        xi = _check_xi(xi)
        return _out((self.epsilon - 1.0) * xi**2)

    def static(self) -> "Constant":
        return self

    def to_dict(self) -> dict:
        return {"kind": "constant", "epsilon": self.epsilon}


@dataclass(frozen=True)
class PerfectConductor:
    is_perfect = True

    def permittivity(self, xi):
        xi = _check_xi(xi)
        return _out(np.full(xi.shape, math.inf))

    def susceptibility(self, xi):
        return self.permittivity(xi)

    def susceptibility_xi2(self, xi):
        return self.permittivity(xi)

    def static(self) -> "PerfectConductor":
        return self

    def to_dict(self) -> dict:
        return {"kind": "perfect"}


PermittivityModel = Plasma | Constant | PerfectConductor


def permittivity(model: PermittivityModel, xi):
    """Evaluate ``eps(i xi)``; returns ``math.inf`` for a perfect conductor."""
    return model.permittivity(xi)


def plasma_wavelength(omega_p: float) -> float:
    """Plasma wavelength ``2 pi c / omega_p`` in metres."""
    if not omega_p > 0:
        raise ValueError("omega_p must be positive")
    return 2 * math.pi * SPEED_OF_LIGHT / omega_p


def vdw_weight(eps):
    """Material weights ``((eps-1)/(eps+1)**2, eps*(eps-1)/(eps+1)**2)``.

    Both are finite for ``eps = inf`` (0 and 1 respectively).
    """
    eps = np.asarray(eps, dtype=float)
    inf = np.isinf(eps)
    e = np.where(inf, 2.0, eps)
    w = (e - 1.0) / (e + 1.0) ** 2
    return _out(np.where(inf, 0.0, w)), _out(np.where(inf, 1.0, w * e))


def material_from_dict(d: dict, path: str = "material") -> PermittivityModel:
    """Build a model from ``{"kind": ..., "omega_p": ..., "epsilon": ...}``."""
    kind = d.get("kind")
    allowed = {"plasma": {"kind", "omega_p"}, "constant": {"kind", "epsilon"}, "perfect": {"kind"}}
    if kind not in allowed:
        raise ValueError(f"{path}.kind must be one of {sorted(allowed)}, got {kind!r}")
    extra = set(d) - allowed[kind]
    if extra:
        raise ValueError(f"unknown key {path}.{sorted(extra)[0]} for kind {kind!r}")
    if kind == "plasma":
        if "omega_p" not in d:
            raise ValueError(f"missing required key {path}.omega_p")
        return Plasma(float(d["omega_p"]))
    if kind == "constant":
        if "epsilon" not in d:
            raise ValueError(f"missing required key {path}.epsilon")
        return Constant(float(d["epsilon"]))
    return PerfectConductor()
