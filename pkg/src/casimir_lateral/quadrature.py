"""Adaptive Gauss-Kronrod quadrature for vector-valued, exponentially damped integrands.

All integrators take vectorised callables: ``f(x)`` receives a 1-D array of
nodes and returns an array whose *last* axis runs over those nodes (leading
axes are independent components).  A callable may instead return a pair
``(values, errors)``; the error array is then integrated with the same weights
and folded into the reported error estimate, which is how nested integrals
propagate their inner error budget outward.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ConvergenceError",
    "QuadratureConfig",
    "QuadratureResult",
    "integrate_interval",
    "integrate_semi_infinite",
    "integrate_k_polar",
    "integrate_periodic",
    "gauss_legendre_converged",
]

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[9:14:2] = _WG[2::-1]
_GAUSS[7] = _WG[3]

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


class ConvergenceError(RuntimeError):
    """Raised when the evaluation budget runs out before the tolerance is met.

    The best available estimate is kept on the exception as ``result``.
    """

    def __init__(self, message: str, result: "QuadratureResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_evaluations: int = 2_000_000
    tail_cutoff_multiplier: float = 40.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(f"abs_tol must be non-negative, got {self.abs_tol}")
        if self.max_evaluations <= 0:
            raise ValueError("max_evaluations must be positive")
        if not self.tail_cutoff_multiplier > 0:
            raise ValueError("tail_cutoff_multiplier must be positive")

    def scaled(self, factor: float) -> "QuadratureConfig":
        """Same config with ``rel_tol`` and ``abs_tol`` multiplied by `factor`."""
        return QuadratureConfig(self.rel_tol * factor, self.abs_tol * factor,
                                self.max_evaluations, self.tail_cutoff_multiplier)


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray | float
    error_estimate: np.ndarray | float
    evaluations: int

    def __post_init__(self):
        if np.any(np.asarray(self.error_estimate) < 0):
            raise ValueError("error_estimate must be non-negative")


def _split(out):
    if isinstance(out, tuple):
        vals, errs = out
        return np.asarray(vals), np.abs(np.asarray(errs))
    return np.asarray(out), None


def _gk_batch(f, a: np.ndarray, b: np.ndarray):
    """Apply GK15 to several panels with one call of `f`.

    Returns per-panel (value, own error, propagated inner error, integral of
    |f|, evaluations); the panel index is the leading axis.
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (center[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals, inner = _split(f(x))
    lead = vals.shape[:-1]
    vals = vals.reshape(lead + (a.size, 15))
    kron = np.einsum("...pn,n->...p", vals, _KRONROD) * half
    gauss = np.einsum("...pn,n->...p", vals, _GAUSS) * half
    mean = kron / (2 * half)
    resasc = np.einsum("...pn,n->...p", np.abs(vals - mean[..., None]), _KRONROD) * np.abs(half)
    resabs = np.einsum("...pn,n->...p", np.abs(vals), _KRONROD) * np.abs(half)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50 * _EPMACH * resabs
    err = np.where(resabs > _UFLOW / (50 * _EPMACH), np.maximum(floor, err), err)
    if inner is not None:
        inner = np.einsum("...pn,n->...p", inner.reshape(lead + (a.size, 15)), _KRONROD) * np.abs(half)
    else:
        inner = np.zeros_like(err)
    return (np.moveaxis(kron, -1, 0), np.moveaxis(err, -1, 0), np.moveaxis(inner, -1, 0),
            np.moveaxis(resabs, -1, 0), x.size)


def _tolerance(total, cfg: QuadratureConfig, magnitude=None) -> float:
    """Absolute tolerance for an integral estimate `total`.

    `magnitude` is an estimate of the integral of ``|f|``; it only sets a
    round-off floor so that integrals which cancel to zero can terminate.
    """
    tol = max(cfg.rel_tol * float(np.max(np.abs(total))), cfg.abs_tol)
    if magnitude is not None:
        tol = max(tol, 100 * _EPMACH * float(np.max(magnitude)))
    return tol


def _adaptive(f, a: float, b: float, cfg: QuadratureConfig, initial_panels: int = 1):
    """Globally adaptive bisection on [a, b].

    Returns (value, error, integral of |f|, evaluations).  Only the
    discretisation error of this level drives refinement; error propagated
    from nested integrals is added to the returned estimate.
    """
    edges = np.linspace(a, b, initial_panels + 1)
    vals, errs, inner, absv, evals = _gk_batch(f, edges[:-1], edges[1:])
    heap = []
    panels = {}
    for i in range(initial_panels):
        panels[i] = (edges[i], edges[i + 1], vals[i], errs[i], inner[i], absv[i])
        heapq.heappush(heap, (-float(np.max(errs[i])), i))
    next_id = initial_panels
    total = vals.sum(axis=0)
    total_err = errs.sum(axis=0)
    total_abs = absv.sum(axis=0)
    total_inner = inner.sum(axis=0)
    while heap:
        # refining below the error inherited from nested levels buys nothing
        tol = max(_tolerance(total, cfg, total_abs), float(np.max(total_inner)))
        if float(np.max(total_err)) <= tol:
            break
        if evals >= cfg.max_evaluations:
            res = QuadratureResult(total, np.abs(total_err) + sum(p[4] for p in panels.values()),
                                   evals)
            raise ConvergenceError(
                f"evaluation budget {cfg.max_evaluations} exhausted "
                f"(error {float(np.max(total_err)):.3e} > tolerance {tol:.3e})", res)
        _, pid = heapq.heappop(heap)
        lo, hi, v, e, vi, ab = panels[pid]
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # panel too narrow to split further; keep it but stop refining it
            continue
        del panels[pid]
        cv, ce, ci, ca, n = _gk_batch(f, np.array([lo, mid]), np.array([mid, hi]))
        evals += n
        total = total - v + cv[0] + cv[1]
        total_err = total_err - e + ce[0] + ce[1]
        total_abs = total_abs - ab + ca[0] + ca[1]
        total_inner = total_inner - vi + ci[0] + ci[1]
        for k, (lo_, hi_) in enumerate(((lo, mid), (mid, hi))):
            panels[next_id] = (lo_, hi_, cv[k], ce[k], ci[k], ca[k])
            heapq.heappush(heap, (-float(np.max(ce[k])), next_id))
            next_id += 1
    # resum in a fixed order so the result does not depend on heap history
    order = sorted(panels.values(), key=lambda p: p[0])
    total = np.sum([p[2] for p in order], axis=0)
    total_err = np.sum([p[3] + p[4] for p in order], axis=0)
    total_abs = np.sum([p[5] for p in order], axis=0)
    return total, np.abs(total_err), total_abs, evals


def _finish(value, error, evals):
    if np.ndim(value) == 0:
        return QuadratureResult(float(value), float(error), evals)
    return QuadratureResult(value, error, evals)


def integrate_interval(f: Callable, a: float, b: float,
                       cfg: QuadratureConfig | None = None,
                       initial_panels: int = 1) -> QuadratureResult:
    """Adaptive GK15 integral of `f` over the finite interval [a, b]."""
    cfg = cfg or QuadratureConfig()
    value, error, _, evals = _adaptive(f, a, b, cfg, initial_panels)
    return _finish(value, error, evals)


def integrate_semi_infinite(f: Callable, cfg: QuadratureConfig | None = None,
                            scale: float = 1.0, decay_rate: float | None = None
                            ) -> QuadratureResult:
    """Integrate `f` over (0, inf) through the substitution ``x = scale * exp(t)``.

    Parameters
    ----------
    f : callable
        Vectorised integrand, finite on (0, inf).
    cfg : QuadratureConfig, optional
    scale : float
        Characteristic scale of the integrand; nodes are spread evenly in
        ``log(x / scale)``.
    decay_rate : float, optional
        Exponential decay rate of `f`.  The core window then ends at
        ``tail_cutoff_multiplier / decay_rate``; by default it ends at
        ``tail_cutoff_multiplier * scale``.

    Notes
    -----
    After the core window has converged, windows of width 4 in ``t`` are
    appended on either side until a window contributes less than a tenth of
    the tolerance, so algebraic tails and integrable behaviour at the origin
    are both captured.  The integrand is only sampled at interior points.
    """
    cfg = cfg or QuadratureConfig()
    if not scale > 0:
        raise ValueError("scale must be positive")
    x_hi = cfg.tail_cutoff_multiplier * (scale if decay_rate is None else 1.0 / decay_rate)
    t_hi = math.log(max(x_hi, 2.0 * scale) / scale)
    t_lo = -5.0

    def g(t):
        x = scale * np.exp(t)
        vals, inner = _split(f(x))
        if inner is None:
            return vals * x
        return vals * x, inner * x

    value, error, magnitude, evals = _adaptive(g, t_lo, t_hi, cfg, initial_panels=4)
    width = 4.0
    for direction in (+1, -1):
        edge = t_hi if direction > 0 else t_lo
        for _ in range(200):
            lo, hi = (edge, edge + width) if direction > 0 else (edge - width, edge)
            piece_cfg = QuadratureConfig(cfg.rel_tol,
                                         max(cfg.abs_tol, 0.1 * _tolerance(value, cfg, magnitude)),
                                         max(cfg.max_evaluations - evals, 1), cfg.tail_cutoff_multiplier)
            try:
                v, e, m, n = _adaptive(g, lo, hi, piece_cfg)
            except ConvergenceError as exc:
                res = QuadratureResult(value + exc.result.value, error + exc.result.error_estimate,
                                       evals + exc.result.evaluations)
                raise ConvergenceError(str(exc), res) from None
            evals += n
            value = value + v
            error = error + e
            magnitude = magnitude + m
            edge = hi if direction > 0 else lo
            if float(np.max(m)) <= 0.1 * _tolerance(value, cfg, magnitude):
                break
            if direction < 0 and scale * math.exp(edge) < _UFLOW:
                break
        else:
            raise ConvergenceError("tail did not decay", QuadratureResult(value, error, evals))
    return _finish(value, error, evals)


def integrate_periodic(f: Callable, period: float = 2 * math.pi,
                       cfg: QuadratureConfig | None = None, n_start: int = 16,
                       n_max: int = 1 << 16) -> QuadratureResult:
    """Trapezoid rule over one period, doubling the node count until stable.

    Spectrally accurate for smooth periodic integrands.  Each doubling reuses
    the previous nodes.
    """
    cfg = cfg or QuadratureConfig()
    n = n_start
    x = np.arange(n) * (period / n)
    vals, _ = _split(f(x))
    sums = vals.sum(axis=-1)
    abs_sums = np.abs(vals).sum(axis=-1)
    evals = n
    estimate = sums * (period / n)
    while True:
        x_new = (np.arange(n) + 0.5) * (period / n)
        new_vals, _ = _split(f(x_new))
        evals += n
        sums = sums + new_vals.sum(axis=-1)
        abs_sums = abs_sums + np.abs(new_vals).sum(axis=-1)
        n *= 2
        refined = sums * (period / n)
        err = np.abs(refined - estimate)
        if float(np.max(err)) <= _tolerance(refined, cfg, abs_sums * (period / n)):
            return _finish(refined, err, evals)
        if n >= n_max or evals >= cfg.max_evaluations:
            raise ConvergenceError("periodic trapezoid rule did not converge",
                                   QuadratureResult(refined, err, evals))
        estimate = refined


def gauss_legendre_converged(f: Callable, a: float, b: float,
                             cfg: QuadratureConfig | None = None,
                             n_start: int = 16, n_max: int = 1024) -> QuadratureResult:
    """Gauss-Legendre rule on [a, b] with the order doubled until two agree."""
    cfg = cfg or QuadratureConfig()
    evals = 0
    previous = None
    n = n_start
    while n <= n_max:
        value, magnitude = _gauss_legendre(f, a, b, n)
        evals += n
        if previous is not None:
            err = np.abs(value - previous)
            if float(np.max(err)) <= _tolerance(value, cfg, magnitude):
                return _finish(value, err, evals)
        previous = value
        n *= 2
    raise ConvergenceError("Gauss-Legendre doubling did not converge",
                           QuadratureResult(previous, np.abs(previous), evals))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _gauss_legendre(f, a, b, n):
    x, w = gauss_legendre_rule(n)
    half = 0.5 * (b - a)
    vals, _ = _split(f(0.5 * (a + b) + half * x))
    return vals @ w * half, np.abs(vals) @ w * abs(half)


def integrate_k_polar(f: Callable, cfg: QuadratureConfig | None = None,
                      scale: float = 1.0, decay_rate: float | None = None
                      ) -> QuadratureResult:
    """Integrate ``f(k, phi)`` over the plane in polar coordinates.

    Computes ``int_0^inf dk k int_0^{2 pi} dphi f(k, phi)``.  The angular
    integral uses the periodic trapezoid rule with doubling; the radial one is
    `integrate_semi_infinite`.  Each level gets a third of ``rel_tol``.
    """
    cfg = cfg or QuadratureConfig()
    level = cfg.scaled(1.0 / 3.0)

    def radial(k):
        def angular(phi):
            vals = np.asarray(f(k[:, None], phi[None, :]))
            return vals
        res = integrate_periodic(angular, cfg=level)
        return k * res.value, k * res.error_estimate

    return integrate_semi_infinite(radial, level, scale=scale, decay_rate=decay_rate)
