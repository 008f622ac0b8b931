import math

import numpy as np
import pytest

from casimir_lateral.materials import Constant, PerfectConductor, Plasma
from casimir_lateral.scattering import (
    CHANNELS,
    angle_factors,
    fused_components,
    fused_trace,
    integrand_a,
    outer_product_matrix,
    reflection_first_order,
    surface_response,
)

C = 299792458.0
Z0 = 30e-9
UNIT = C / Z0
PAIRS = [("x", "x"), ("y", "y"), ("z", "z"), ("x", "z"), ("z", "x")]


def random_states(n, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield rng.uniform(0.05, 3.0), rng.normal(size=2), rng.normal(size=2)


def test_angle_factors():
    assert angle_factors([1, 0], [1, 0]) == (0.0, 1.0)
    assert angle_factors([1, 0], [0, 1]) == (-1.0, 0.0)
    rng = np.random.default_rng(1)
    k, q = rng.normal(size=(50, 2)), rng.normal(size=(50, 2))
    S, Cc = angle_factors(k, q)
    assert np.allclose(S**2 + Cc**2, 1, rtol=0, atol=1e-14)
    with pytest.raises(ValueError):
        angle_factors([0, 0], [1, 0])


def test_outer_products():
    k = np.array([2.0, 0.0])
    m = outer_product_matrix(("TE", "TE"), k, k, 1.0)
    expected = np.zeros((3, 3))
    expected[1, 1] = 1
    assert np.allclose(m, expected)
    rng = np.random.default_rng(2)
    for _ in range(10):
        k, q, xi = rng.normal(size=2) * 1e7, rng.normal(size=2) * 1e7, rng.uniform(1e14, 1e16)
        te = outer_product_matrix(("TE", "TE"), k, q, xi)
        assert np.all(te[2, :] == 0) and np.all(te[:, 2] == 0)
        # channel (p, p') pairs e+_p(k) in the columns with e-_p'(k') in the rows
        assert np.all(outer_product_matrix(("TE", "TM"), k, q, xi)[:, 2] == 0)
        assert np.all(outer_product_matrix(("TM", "TE"), k, q, xi)[2, :] == 0)
        tm = outer_product_matrix(("TM", "TM"), k, q, xi)
        kn, qn = np.hypot(*k), np.hypot(*q)
        assert tm[2, 2].real == pytest.approx(-(qn**2) * kn**2 * C**2 / (xi**2 * kn * qn), rel=1e-14)


def test_outer_products_match_displayed_entries():
    # spot-check entries against the explicit matrices
    k, q, xi = np.array([0.3, -0.7]), np.array([1.1, 0.4]), 0.9
    kn, qn = np.hypot(*k), np.hypot(*q)
    kap, kapp = math.hypot(xi, kn), math.hypot(xi, qn)
    # e-_TM(k') e+_TE(k)
    m = outer_product_matrix(("TE", "TM"), k, q, xi, c=1.0)
    assert m[0, 0] == pytest.approx(kapp * q[0] * k[1] / (kn * qn * xi))
    assert m[2, 1] == pytest.approx(1j * k[0] * qn**2 / (kn * qn * xi))
    # e-_TE(k') e+_TM(k)
    m = outer_product_matrix(("TM", "TE"), k, q, xi, c=1.0)
    assert m[0, 0] == pytest.approx(-q[1] * kap * k[0] / (kn * qn * xi))
    assert m[0, 2] == pytest.approx(-1j * q[1] * kn**2 / (kn * qn * xi))
    m = outer_product_matrix(("TM", "TM"), k, q, xi, c=1.0)
    assert m[2, 0] == pytest.approx(1j * kap * k[0] * qn**2 / (kn * qn * xi**2))
    assert m[0, 1] == pytest.approx(-kapp * q[0] * kap * k[1] / (kn * qn * xi**2))


def test_vacuum_surface_reflects_nothing():
    rng = np.random.default_rng(3)
    for _ in range(20):
        k, q, xi = rng.normal(size=2), rng.normal(size=2), rng.uniform(0.1, 3)
        for ch in CHANNELS:
            assert reflection_first_order(ch, k, q, xi, 1.0, c=1.0) == 0


def test_perfect_conductor_limit():
    rng = np.random.default_rng(4)
    for _ in range(100):
        xi = rng.uniform(1.0, 5.0)
        k, q = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        for ch in CHANNELS:
            a = reflection_first_order(ch, k, q, xi, 1e10, c=1.0)
            b = reflection_first_order(ch, k, q, xi, math.inf, c=1.0)
            assert abs(a - b) <= 1e-4 * abs(b)


def test_cross_polarization_vanishes_for_collinear():
    k, q = np.array([1.0, 0.5]), np.array([-2.0, -1.0])
    for eps in (3.0, math.inf):
        assert reflection_first_order(("TE", "TM"), k, q, 0.7, eps, c=1.0) == 0
        assert reflection_first_order(("TM", "TE"), k, q, 0.7, eps, c=1.0) == 0


def test_tm_denominator_negative():
    rng = np.random.default_rng(5)
    for _ in range(200):
        xi, kn, eps = rng.uniform(1e-3, 10), rng.uniform(0, 10), rng.uniform(1, 100)
        kap = math.hypot(xi, kn)
        assert xi**2 - kap**2 * (eps + 1) < 0


@pytest.mark.parametrize("surface", [Plasma(1.385e16), Constant(3.997), PerfectConductor()])
def test_fused_matches_literal(surface):
    for zeta, k, q in random_states(40):
        xi = zeta * UNIT
        eps = surface.permittivity(xi)
        lit = np.array([integrand_a(m, n, k / Z0, q / Z0, xi, Z0, eps) for m, n in PAIRS])
        k1, k2 = np.hypot(*k), np.hypot(*q)
        scaled = lit * zeta**2 * k1 * k2
        ref = np.array([scaled[0].real, scaled[1].real, scaled[2].real, scaled[3].imag, scaled[4].imag])
        got = fused_components(zeta, k[0], k[1], q[0], q[1], k1, k2, surface_response(surface, zeta, UNIT))
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_reality_structure():
    surface = Plasma(1.385e16)
    for zeta, k, q in random_states(30, seed=7):
        xi = zeta * UNIT
        eps = surface.permittivity(xi)
        vals = {mn: integrand_a(*mn, k / Z0, q / Z0, xi, Z0, eps) for mn in PAIRS}
        scale = max(abs(v) for v in vals.values())
        for mn in PAIRS[:3]:
            assert abs(vals[mn].imag) <= 1e-14 * scale
        for mn in PAIRS[3:]:
            assert abs(vals[mn].real) <= 1e-14 * scale


def test_exponential_factor():
    k, q, xi = np.array([0.4, 0.2]) / Z0, np.array([-0.3, 0.9]) / Z0, 0.8 * UNIT
    kap = math.hypot(xi / C, np.hypot(*k))
    kapp = math.hypot(xi / C, np.hypot(*q))
    a1 = integrand_a("x", "x", k, q, xi, Z0, 5.0)
    a2 = integrand_a("x", "x", k, q, xi, 2 * Z0, 5.0)
    assert a2 == pytest.approx(a1 * math.exp(-(kap + kapp) * Z0), rel=1e-12)


def test_trace_is_independent_assembly():
    for surface in (Plasma(1.385e16), Constant(8.673), PerfectConductor()):
        for zeta, k, q in random_states(30, seed=9):
            resp = surface_response(surface, zeta, UNIT)
            k1, k2 = np.hypot(*k), np.hypot(*q)
            comps = fused_components(zeta, k[0], k[1], q[0], q[1], k1, k2, resp)
            tr = fused_trace(zeta, k[0], k[1], q[0], q[1], k1, k2, resp)
            assert tr == pytest.approx(comps[:3].sum(), rel=1e-12, abs=1e-14 * np.abs(comps).max())


def test_small_zeta_branch_is_continuous():
    surface = Plasma(1.385e16)
    k, q = np.array([0.7, 0.3]), np.array([-0.5, 0.3])
    k1, k2 = np.hypot(*k), np.hypot(*q)
    args = (k[0], k[1], q[0], q[1], k1, k2)
    below = fused_components(0.9e-8, *args, surface_response(surface, 0.9e-8, UNIT))
    above = fused_components(1.1e-8, *args, surface_response(surface, 1.1e-8, UNIT))
    pc = fused_components(0.0, *args, surface_response(PerfectConductor(), 0.0, UNIT))
    assert np.allclose(below, above, rtol=1e-6, atol=1e-12)
    assert np.allclose(below, pc, rtol=1e-6, atol=1e-12)
    assert np.all(np.isfinite(pc))


def test_exponential_decay_in_k():
    resp = surface_response(Constant(4.0), 0.5, UNIT)
    vals = [np.abs(fused_components(0.5, s, 0.1, s - 1.0, 0.1, math.hypot(s, 0.1),
                                    math.hypot(s - 1, 0.1), resp)).max() for s in (5.0, 10.0, 20.0)]
    assert vals[1] < vals[0] * 1e-2 and vals[2] < vals[1] * 1e-3
