"""Regime classification, parameter sweeps and peak/valley transition search."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .lateral_energy import (
    DegenerateConfigurationError,
    Geometry,
    VComponents,
    amplitude_phase,
    equilibrium_position,
    v_components_cp,
    v_components_retarded,
    v_components_vdw,
)
from .materials import PermittivityModel
from .polarizability import ParticleModel
from .quadrature import ConvergenceError, QuadratureConfig

__all__ = [
    "Regime",
    "RegimeReport",
    "SweepRow",
    "TransitionResult",
    "BracketError",
    "ToleranceFloorError",
    "MODES",
    "classify",
    "evaluate",
    "report",
    "sweep",
    "scan_bracket",
    "find_transition",
    "thread_count",
]

MODES = ("retarded", "vdw", "cp")
DELTA_TOL = 1e-6
SWEEP_RANGE = (0.1, 50.0)


class Regime(str, Enum):
    PEAK = "peak"
    VALLEY = "valley"
    INTERMEDIATE = "intermediate"


class BracketError(ValueError):
    """The bracket does not enclose a sign change of ``V_sum``."""


class ToleranceFloorError(RuntimeError):
    """Quadrature noise exceeds ``|V_sum|`` even at the tightest tolerance.

    ``interval`` holds the best certified bracket found so far.
    """

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(message)
        self.interval = interval


def classify(delta: float, delta_tol: float = DELTA_TOL) -> Regime:
    """Regime from the phase ``delta`` in (-pi, pi].

    Distances are measured on the circle, so ``delta`` just above ``-pi``
    counts as a peak.
    """
    if abs(delta) <= delta_tol:
        return Regime.VALLEY
    if math.pi - abs(delta) <= delta_tol:
        return Regime.PEAK
    return Regime.INTERMEDIATE


@dataclass(frozen=True)
class RegimeReport:
    """Amplitude (SI), phase, regime and stable equilibrium position (m)."""

    A: float
    delta: float
    regime: Regime
    x_eq: float


_EVALUATORS: dict[str, Callable[..., VComponents]] = {
    "retarded": v_components_retarded,
    "vdw": v_components_vdw,
    "cp": v_components_cp,
}


def evaluate(particle: ParticleModel, surface: PermittivityModel, geom: Geometry,
             mode: str, cfg: QuadratureConfig | None = None, **kwargs) -> VComponents:
    """Dispatch to the evaluator of `mode` ("retarded", "vdw" or "cp")."""
    try:
        fn = _EVALUATORS[mode]
    except KeyError:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}") from None
    return fn(particle, surface, geom, cfg, **kwargs)


def report(v: VComponents, geom: Geometry, delta_tol: float = DELTA_TOL) -> RegimeReport:
    A, delta = amplitude_phase(v)
    return RegimeReport(A, delta, classify(delta, delta_tol), equilibrium_position(geom, delta))


@dataclass(frozen=True)
class SweepRow:
    """One point of a sweep; `error` is set (and the rest is None) when it failed."""

    lambda_over_z0: float
    v: VComponents | None
    A: float | None
    delta: float | None
    regime: Regime | None
    error: str | None = None


def thread_count() -> int:
    """Worker threads for sweeps, from ``CASIMIR_THREADS`` (default 1)."""
    raw = os.environ.get("CASIMIR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CASIMIR_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def sweep(particle: ParticleModel, surface: PermittivityModel, z0: float, mode: str,
          lo: float, hi: float, n_points: int, cfg: QuadratureConfig | None = None,
          a: float | None = None, delta_tol: float = DELTA_TOL,
          threads: int | None = None, **kwargs) -> list[SweepRow]:
    """Evaluate ``n_points`` equally spaced values of ``lambda_c / z0`` in [lo, hi].

    A failing point yields a row with `error` set; the sweep carries on.
    Rows come back in increasing order whatever the thread count.
    """
    if not SWEEP_RANGE[0] <= lo < hi <= SWEEP_RANGE[1]:
        raise ValueError(f"sweep range must satisfy {SWEEP_RANGE[0]} <= min < max <= "
                         f"{SWEEP_RANGE[1]}, got [{lo}, {hi}]")
    if n_points < 2:
        raise ValueError("a sweep needs at least 2 points")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    cfg = cfg or QuadratureConfig(rel_tol=1e-6)
    grid = np.linspace(lo, hi, n_points)

    def one(lam: float) -> SweepRow:
        try:
            geom = Geometry.from_ratio(lam, z0, a)
            v = evaluate(particle, surface, geom, mode, cfg, **kwargs)
            rep = report(v, geom, delta_tol)
            return SweepRow(float(lam), v, rep.A, rep.delta, rep.regime)
        except (ConvergenceError, DegenerateConfigurationError, ArithmeticError, ValueError) as exc:
            return SweepRow(float(lam), None, None, None, None, f"{type(exc).__name__}: {exc}")

    n = threads or thread_count()
    if n == 1:
        return [one(x) for x in grid]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, grid))


@dataclass(frozen=True)
class TransitionResult:
    """Root of ``V_sum`` in ``lambda_c / z0`` with its certified bracket.

    ``lo`` and ``hi`` carry certified opposite signs of ``V_sum``.
    """

    root: float
    lo: float
    hi: float
    sign_lo: int
    sign_hi: int
    evaluations: int

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _certified_sum(particle, surface, z0, mode, lam, cfg, floor, kwargs):
    """``V_sum`` at `lam` with a trustworthy sign: |V_sum| > 3 * error.

    The tolerance is tightened tenfold until that holds or `floor` is passed.
    Returns (value, sign) or raises ToleranceFloorError with a degenerate
    interval at `lam`.
    """
    geom = Geometry.from_ratio(lam, z0)
    while True:
        v = evaluate(particle, surface, geom, mode, cfg, **kwargs)
        if abs(v.v_sum) > 3.0 * v.err_sum:
            return v.v_sum, (1 if v.v_sum > 0 else -1)
        if cfg.rel_tol / 10 < floor:
            raise ToleranceFloorError(
                f"cannot certify the sign of V_sum at lambda_c/z0 = {lam:.12g} "
                f"(|V_sum| = {abs(v.v_sum):.3e}, error {v.err_sum:.3e})", (lam, lam))
        cfg = cfg.scaled(0.1)


def scan_bracket(particle: ParticleModel, surface: PermittivityModel, z0: float, mode: str,
                 lo: float, hi: float, n_points: int = 32,
                 cfg: QuadratureConfig | None = None, **kwargs) -> tuple[float, float]:
    """First sign change of ``V_sum`` on an equally spaced scan of [lo, hi]."""
    rows = sweep(particle, surface, z0, mode, lo, hi, n_points, cfg, **kwargs)
    prev = None
    for row in rows:
        if row.error is not None:
            prev = None
            continue
        if prev is not None and np.sign(prev.v.v_sum) * np.sign(row.v.v_sum) < 0:
            return prev.lambda_over_z0, row.lambda_over_z0
        prev = row
    raise BracketError(f"V_sum does not change sign on [{lo}, {hi}] ({n_points}-point scan)")


def find_transition(particle: ParticleModel, surface: PermittivityModel, z0: float, mode: str,
                    bracket: tuple[float, float] | None = None, *,
                    cfg: QuadratureConfig | None = None, rtol: float = 1e-4,
                    search_range: tuple[float, float] = (0.5, 12.0), scan_points: int = 32,
                    tol_floor: float = 1e-12, **kwargs) -> TransitionResult:
    """Locate a sign change of ``V_sum`` in ``lambda_c / z0``.

    Illinois-modified regula falsi with a bisection safeguard, run until the
    bracket's width relative to its midpoint is at most `rtol`.  Each sign
    is certified against the quadrature error estimate.  Without `bracket`,
    the first sign change of a `scan_points` scan over `search_range` is used.
    """
    cfg = cfg or QuadratureConfig(rel_tol=1e-8)
    if bracket is None:
        bracket = scan_bracket(particle, surface, z0, mode, *search_range, scan_points,
                               cfg.scaled(100.0) if cfg.rel_tol < 1e-6 else cfg, **kwargs)
    lo, hi = sorted(map(float, bracket))
    if not lo > 0:
        raise ValueError("bracket must be positive")
    evals = 0

    def g(lam):
        nonlocal evals
        evals += 1
        return _certified_sum(particle, surface, z0, mode, lam, cfg, tol_floor, kwargs)

    f_lo, s_lo = g(lo)
    f_hi, s_hi = g(hi)
    if s_lo == s_hi:
        raise BracketError(f"V_sum has the same sign at {lo:.12g} and {hi:.12g}")
    side = 0
    slow = 0
    while (hi - lo) > rtol * 0.5 * (lo + hi):
        width = hi - lo
        if slow >= 2:
            x = 0.5 * (lo + hi)
            slow = 0
        else:
            x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            # keep away from the endpoints so the bracket always shrinks
            margin = 0.01 * width
            x = min(max(x, lo + margin), hi - margin)
        try:
            fx, sx = g(x)
        except ToleranceFloorError as exc:
            raise ToleranceFloorError(str(exc), (lo, hi)) from None
        if sx == s_lo:
            lo, f_lo = x, fx
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = x, fx
            if side == 1:
                f_lo *= 0.5
            side = 1
        slow = slow + 1 if (hi - lo) > 0.5 * width else 0
    root = 0.5 * (lo + hi)
    return TransitionResult(root, lo, hi, s_lo, -s_lo, evals)
