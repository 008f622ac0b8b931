"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run alone with ``pytest -v tests/test_acceptance.py`` (the lines are printed
even without ``-s``).
"""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy.constants import c as C0

from casimir_lateral.lateral_energy import (
    Geometry,
    v_components_retarded,
    v_components_vdw,
    v_sum_trace_form,
)
from casimir_lateral.materials import Constant, PerfectConductor, Plasma
from casimir_lateral.polarizability import ParticleModel, depolarizing_factor
from casimir_lateral.quadrature import (
    QuadratureConfig,
    integrate_interval,
    integrate_k_polar,
    integrate_semi_infinite,
)
from casimir_lateral.regimes import find_transition, sweep
from casimir_lateral.scattering import CHANNELS, reflection_first_order
from casimir_lateral.special_functions import bessel_k

GOLD = Plasma(1.385e16)
SURFACES = {"gold": GOLD, "perfect": PerfectConductor(),
            "eps3.997": Constant(3.997), "eps8.673": Constant(8.673)}


def _verdict(capsys, n, ok, msg):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {msg}")
    assert ok, msg


def _particle(theta=math.pi / 2):
    return ParticleModel(2.0, 1e-24, GOLD, theta, 0.0)


# ---------------------------------------------------------------------------


def test_c01_bessel(capsys):
    t = time.perf_counter()
    mpmath.mp.dps = 40
    worst = 0.0
    for n in (2, 3):
        ref = float(mpmath.besselk(n, 1))
        worst = max(worst, abs(bessel_k(n, 1.0) / ref - 1))
    u = np.logspace(-2, 2, 400)
    k = {n: bessel_k(n, u) for n in range(4)}
    resid = max(np.max(np.abs(k[n + 1] - k[n - 1] - 2 * n / u * k[n]) / k[n + 1]) for n in (1, 2))
    # the recurrence residual is small by construction; also check each order against mpmath
    grid = max(abs(float(bessel_k(n, x)) / float(mpmath.besselk(n, x)) - 1)
               for n in range(4) for x in u[::20])
    dt = time.perf_counter() - t
    ok = worst <= 1e-11 and resid <= 1e-11 and grid <= 1e-11 and dt < 1.0
    _verdict(capsys, 1, ok, f"K2(1), K3(1) rel err {worst:.1e}; recurrence residual {resid:.1e}; "
                            f"grid vs mpmath {grid:.1e}; {dt:.2f} s")


def _cross_path(z0, c):
    p = _particle()
    cfg = QuadratureConfig(rel_tol=1e-8)
    out = []
    for lam in (1.0, 2.0, 4.0, 8.0):
        geom = Geometry.from_ratio(lam, z0)
        ret = v_components_retarded(p, GOLD, geom, cfg, c=c)
        vdw = v_components_vdw(p, GOLD, geom)
        out.append((lam, ret.v_sum / vdw.v_sum - 1))
    return out


def test_c02_vdw_cross_path(capsys):
    t = time.perf_counter()
    dev = _cross_path(5e-9, C0)
    dt = time.perf_counter() - t
    worst = max(abs(d) for _, d in dev)
    ok = worst <= 0.01 and dt < 120
    detail = ", ".join(f"{lam:g}: {d:+.3%}" for lam, d in dev)
    _verdict(capsys, 2, ok, f"retarded/closed-form - 1 at z0 = 5 nm [{detail}]; {dt:.1f} s")


def test_c03_artificial_c(capsys):
    t = time.perf_counter()
    dev = _cross_path(30e-9, C0 * 1e3)
    dt = time.perf_counter() - t
    worst = max(abs(d) for _, d in dev)
    ok = worst <= 1e-3 and dt < 120
    _verdict(capsys, 3, ok, f"c x 1e3 at z0 = 30 nm: worst deviation {worst:.1e}; {dt:.1f} s")


def test_c04_perfect_conductor(capsys):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        xi = rng.uniform(1.0, 5.0)
        k, q = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        for ch in CHANNELS:
            a = reflection_first_order(ch, k, q, xi, 1e10, c=1.0)
            b = reflection_first_order(ch, k, q, xi, math.inf, c=1.0)
            if b != 0:
                worst = max(worst, abs(a - b) / abs(b))
            else:
                worst = max(worst, abs(a))
    dt = time.perf_counter() - t
    ok = worst <= 1e-4 and dt < 1.0
    _verdict(capsys, 4, ok, f"eps = 1e10 vs closed limits: worst rel {worst:.1e}; {dt:.2f} s")


def test_c05_regime_dichotomy(capsys):
    t = time.perf_counter()
    flat = sweep(_particle(), GOLD, 30e-9, "retarded", 0.5, 12, 50)
    tilt = sweep(_particle(math.pi / 3), GOLD, 30e-9, "retarded", 0.5, 12, 50)
    dt = time.perf_counter() - t
    off = max(min(abs(r.delta), math.pi - abs(r.delta)) for r in flat)
    inside = [r.delta for r in tilt if r.v.v_sum != 0 and r.v.v_xz != 0]
    signs = {np.sign(d) for d in inside}
    strict = all(0 < abs(d) < math.pi for d in inside) and len(signs) == 1
    errors = sum(r.error is not None for r in flat + tilt)
    ok = off <= 1e-6 and strict and len(inside) == 50 and errors == 0 and dt < 300
    _verdict(capsys, 5, ok, f"theta = pi/2 max distance from {{0, pi}} {off:.1e}; theta = pi/3 "
                            f"{len(inside)} points with 0 < |delta| < pi, one sign "
                            f"({'+' if signs == {1.0} else '-'}); {dt:.1f} s")


@pytest.fixture(scope="module")
def roots():
    t = time.perf_counter()
    p = _particle()
    out = {}
    for z0, mode in ((30e-9, "vdw"), (1e-6, "retarded"), (1e-6, "vdw"), (0.5e-6, "retarded"),
                     (0.5e-6, "vdw")):
        for name in (SURFACES if (z0, mode) in ((30e-9, "vdw"), (1e-6, "retarded")) else ("gold",)):
            out[(z0, mode, name)] = find_transition(p, SURFACES[name], z0, mode)
    return out, time.perf_counter() - t


def test_c06_transition_ordering(capsys, roots):
    res, dt = roots
    lines, ok = [], dt < 600
    for z0, mode in ((30e-9, "vdw"), (1e-6, "retarded")):
        g = res[(z0, mode, "gold")]
        for name in ("perfect", "eps3.997", "eps8.673"):
            o = res[(z0, mode, name)]
            margin = g.root - o.root
            good = margin > 3 * (g.width + o.width)
            ok &= good
            lines.append(f"{mode}@{z0 * 1e9:g}nm gold {g.root:.5f} vs {name} {o.root:.5f}"
                         f"{'' if good else ' (ordering violated)'}")
    _verdict(capsys, 6, ok, "; ".join(lines) + f"; root searches {dt:.1f} s")


def test_c07_retardation_weakens(capsys, roots):
    res, _ = roots
    t = time.perf_counter()
    p = _particle()
    lo, hi, n = 0.5, 12.0, 50
    exclusion = 0.05 * (hi - lo)
    checked, bad = 0, []
    for z0 in (0.5e-6, 1e-6):
        ret = sweep(p, GOLD, z0, "retarded", lo, hi, n)
        vdw = sweep(p, GOLD, z0, "vdw", lo, hi, n)
        r_ret, r_vdw = res[(z0, "retarded", "gold")].root, res[(z0, "vdw", "gold")].root
        for a, b in zip(ret, vdw):
            lam = a.lambda_over_z0
            if abs(lam - r_ret) <= exclusion or abs(lam - r_vdw) <= exclusion:
                continue
            checked += 1
            if not abs(a.v.v_sum) < abs(b.v.v_sum):
                bad.append((z0, lam))
    dt = time.perf_counter() - t
    ok = not bad and checked > 0 and dt < 600
    _verdict(capsys, 7, ok, f"|V_sum ret| < |V_sum vdW| at {checked - len(bad)}/{checked} points "
                            f"{bad if bad else ''}; {dt:.1f} s")


def test_c08_retarded_root_shift(capsys, roots):
    res, _ = roots
    r = res[(1e-6, "retarded", "gold")]
    v = res[(1e-6, "vdw", "gold")]
    rel = (v.root - r.root) / v.root
    ok = r.hi < v.lo and rel < 0.15
    _verdict(capsys, 8, ok, f"z0 = 1 um root retarded {r.root:.5f} < vdW {v.root:.5f}, "
                            f"relative shift {rel:.2%}")


def test_c09_delta_crossover(capsys):
    t = time.perf_counter()
    p = _particle(math.pi / 3)
    ret = sweep(p, GOLD, 1e-6, "retarded", 0.5, 12, 50)
    vdw = sweep(p, GOLD, 1e-6, "vdw", 0.5, 12, 50)
    ratio = np.array([a.delta / b.delta for a, b in zip(ret, vdw)])
    lam = np.array([a.lambda_over_z0 for a in ret])
    cross = np.nonzero(np.sign(ratio[:-1] - 1) * np.sign(ratio[1:] - 1) < 0)[0]
    dt = time.perf_counter() - t
    ok = len(cross) >= 1 and dt < 600
    where = ", ".join(f"[{lam[i]:.3f}, {lam[i + 1]:.3f}]" for i in cross)
    _verdict(capsys, 9, ok, f"delta_ret/delta_vdW - 1 changes sign in {where or 'nowhere'}; "
                            f"ratio range [{ratio.min():.4f}, {ratio.max():.4f}]; {dt:.1f} s")


def test_c10_spheroid(capsys):
    t = time.perf_counter()
    # d approaches 1/3 linearly with slope -4/15, so the limit is probed below h = 1e-8
    d_err = max(abs(depolarizing_factor(1 + h) - 1 / 3) for h in (0.0, 1e-9, 1e-12, 1e-15))
    slope = (depolarizing_factor(1 + 1e-5) - 1 / 3) / 1e-5
    rng = np.random.default_rng(7)
    eig_err = trace_err = 0.0
    for _ in range(1000):
        r = rng.uniform(1, 10)
        p = ParticleModel(r, 1e-24, Constant(rng.uniform(1.5, 20)),
                          math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))
        a_par, a_perp = p.principal(0.0)
        tensor = p.tensor(0.0)
        ev = np.sort(np.linalg.eigvalsh(tensor.matrix()))
        ref = np.sort([a_par, a_perp, a_perp])
        eig_err = max(eig_err, np.max(np.abs(ev - ref)) / np.max(np.abs(ref)))
        trace_err = max(trace_err, abs(tensor.trace() - (a_par + 2 * a_perp)) / abs(a_par + 2 * a_perp))
    dt = time.perf_counter() - t
    ok = d_err <= 1e-8 and abs(slope + 4 / 15) < 1e-4 and eig_err <= 1e-10 and trace_err <= 1e-14 and dt < 1.0
    _verdict(capsys, 10, ok, f"|d - 1/3| {d_err:.1e}; slope {slope:.6f}; eigenvalues {eig_err:.1e}; "
                             f"trace {trace_err:.1e}; {dt:.2f} s")


def test_c11_quadrature(capsys):
    t = time.perf_counter()
    cfg = QuadratureConfig(rel_tol=1e-10)
    cases = [
        ("semi-infinite", integrate_semi_infinite, lambda x: np.exp(-x), 1.0),
        ("semi-infinite", integrate_semi_infinite, lambda x: x * x * np.exp(-x), 2.0),
        ("semi-infinite", integrate_semi_infinite, lambda x: np.exp(-x * x), math.sqrt(math.pi) / 2),
        ("polar", integrate_k_polar, lambda k, p: np.exp(-k) + 0 * p, 2 * math.pi),
        ("polar", integrate_k_polar, lambda k, p: k * np.exp(-k * k) + 0 * p, math.pi ** 1.5 / 2),
        ("polar", integrate_k_polar, lambda k, p: np.exp(-k) * (1 + np.cos(p) ** 2), 3 * math.pi),
    ]
    worst = 0.0
    for _, fn, f, exact in cases:
        worst = max(worst, abs(fn(f, cfg).value / exact - 1))
    for f, a, b, exact in ((np.sin, 0.0, math.pi, 2.0), (lambda x: 1 / (1 + x * x), -1.0, 1.0, math.pi / 2),
                           (np.exp, 0.0, 1.0, math.e - 1)):
        worst = max(worst, abs(integrate_interval(f, a, b, cfg).value / exact - 1))
    k3 = integrate_semi_infinite(lambda u: u**3 * bessel_k(3, u), QuadratureConfig(rel_tol=1e-9))
    k3_err = abs(k3.value / (15 * math.pi / 2) - 1)
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and k3_err <= 1e-8 and dt < 5.0
    _verdict(capsys, 11, ok, f"analytic battery worst rel {worst:.1e} (declared 1e-10 tolerance); "
                             f"u^3 K3 rel {k3_err:.1e}; {dt:.2f} s")


def test_c12_isotropic_trace_form(capsys):
    t = time.perf_counter()
    rng = np.random.default_rng(12)
    cfg = QuadratureConfig(rel_tol=1e-8)
    worst, ok = 0.0, True
    for _ in range(10):
        material = GOLD if rng.random() < 0.5 else Constant(rng.uniform(2, 12))
        surface = [GOLD, Constant(rng.uniform(2, 12)), PerfectConductor()][rng.integers(3)]
        p = ParticleModel(1.0, 1e-24, material)
        geom = Geometry.from_ratio(rng.uniform(0.5, 12), 10 ** rng.uniform(-8, -6))
        v = v_components_retarded(p, surface, geom, cfg)
        tr, err = v_sum_trace_form(p, surface, geom, cfg)
        diff = abs(tr - v.v_sum)
        worst = max(worst, diff / abs(v.v_sum))
        ok &= diff <= max(v.err_sum + err, 10 * cfg.rel_tol * abs(v.v_sum))
    dt = time.perf_counter() - t
    ok &= dt < 300
    _verdict(capsys, 12, ok, f"r = 1 assembly vs trace form worst rel {worst:.1e}; {dt:.1f} s")
