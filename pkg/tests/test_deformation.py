"""Radial rescaling, the map to the null cone, and its region-wise inverses."""

import math

import mpmath as mp
import numpy as np
import pytest

from planckwalk import brillouin as bz
from planckwalk import deformation as df
from planckwalk.walk_core import walk_vector

RNG = np.random.default_rng(303)


def hp_scale(m):
    """Independent high-precision quadrature oracle for the rescaling."""
    mp.mp.dps = 30
    m = np.asarray(m, dtype=float)
    r = float(np.linalg.norm(m))
    if r == 0.0:
        return 1.0
    prof = df.ray_profile(m / r)
    A, c = mp.mpf(prof.azim), mp.mpf(prof.curv)

    def integrand(s):
        return 1 / (1 - s**2) + 1 / (A + (mp.mpf("0.5") - c * s**2) ** 2)

    points = [0, r]
    if prof.curv > 0:
        dip = math.sqrt(0.5 / prof.curv)
        if dip < r:
            points = [0, dip, r]
    return float(1 + r * mp.quad(integrand, points))


def random_ball_point(rmax=0.97):
    while True:
        v = RNG.normal(size=3)
        v /= np.linalg.norm(v)
        m = RNG.uniform(0.02, rmax) * v
        if not bz.in_cut_set(m):
            return m


def test_gap_functions_at_reference_points():
    assert df.sphere_gap([0.0, 0.0, 0.0]) == 1.0
    assert df.ellipse_gap([0.0, 0.0, 0.0]) == pytest.approx(1.25)
    v = np.array([0.6, 0.64, 0.48])
    v /= np.linalg.norm(v)
    assert df.sphere_gap(v) == pytest.approx(0.0, abs=1e-15)
    assert df.ellipse_gap([0.5, 0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)
    assert df.ellipse_gap([0.0, 1.0 / math.sqrt(2.0), 0.0]) == pytest.approx(0.0, abs=1e-15)
    ks = RNG.uniform(-0.9, 0.9, size=(50, 3))
    assert np.all(df.ellipse_gap(ks) >= 0.0)


def test_scale_is_one_at_origin_with_zero_gradient():
    sv = df.radial_scale(np.zeros(3), want_gradient=True)
    assert sv.value == 1.0
    assert np.all(sv.gradient == 0.0)


def test_scale_matches_high_precision_oracle():
    m = np.array([0.5, 0.0, 0.0])
    assert df.radial_scale(m).value == pytest.approx(hp_scale(m), abs=1e-12)
    for _ in range(15):
        m = random_ball_point()
        assert df.radial_scale(m).value == pytest.approx(hp_scale(m), rel=1e-12)
    # critical-plane ray, inside the arc radius
    m = np.array([0.4, 0.4, 0.4])
    assert df.radial_scale(m).value == pytest.approx(hp_scale(m), rel=1e-12)
    # exact y-axis ray (azimuthal constant 0 by the ray convention)
    m = np.array([0.0, 0.6, 0.0])
    assert df.radial_scale(m).value == pytest.approx(hp_scale(m), rel=1e-12)


def test_exact_and_quadrature_methods_agree():
    for _ in range(15):
        m = random_ball_point()
        exact = df.radial_scale(m).value
        quad = df.radial_scale(m, method="quad").value
        assert abs(exact - quad) <= 1e-12 * max(1.0, abs(exact))


def test_scale_is_radially_monotonic_and_diverges_at_boundary():
    for _ in range(100):
        v = RNG.normal(size=3)
        v /= np.linalg.norm(v)
        prof = df.ray_profile(v)
        top = min(0.9999, 0.9999 * prof.r_max)
        rs = np.linspace(1e-3, top, 120)
        gs = np.array([df._scaled_radius(float(r), prof) for r in rs])
        assert np.all(np.diff(gs) > 0.0)
    assert df.radial_scale([0.999, 0.0, 0.0]).value > df.radial_scale([0.99, 0.0, 0.0]).value
    assert df.radial_scale([0.9999999, 0.0, 0.0]).value > 1e2 / 14  # ~ atanh divergence


def test_scale_domain_errors():
    with pytest.raises(ValueError):
        df.radial_scale([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        df.radial_scale([0.5, 0.5, 0.5])  # on the excised cut set


def test_scale_gradient_matches_finite_differences():
    h = 1e-6
    for m in [np.array([0.3, 0.1, -0.2]), np.array([0.05, 0.6, 0.3]), random_ball_point(0.7)]:
        grad = df.radial_scale(m, want_gradient=True).gradient
        fd = np.zeros(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd[j] = (df.radial_scale(m + e).value - df.radial_scale(m - e).value) / (2 * h)
        assert grad == pytest.approx(fd, rel=2e-5, abs=2e-6)


def test_onshell_point_validation():
    x = df.onshell_point([0.3, 0.1, -0.2], 1, 1)
    assert x.region == 0
    assert math.sin(x.omega) ** 2 == pytest.approx(float(np.sum(x.n**2)), abs=1e-12)
    with pytest.raises(ValueError):
        df.onshell_point([0.0, math.pi / 4, 0.0])  # region boundary
    with pytest.raises(ValueError):
        df.onshell_point([0.3, 0.1, -0.2], branch=2)


def test_deform_outputs_null_momenta():
    for region in range(4):
        for x in df.sample_onshell(region, 50, RNG):
            p = df.deform(x)
            assert abs(p[0] ** 2 - np.sum(p[1:] ** 2)) <= 1e-10 * max(1.0, np.max(np.abs(p)) ** 2)
            assert (p[0] >= 0.0) == (x.branch == 1)


def test_deform_small_k_is_identity():
    for _ in range(20):
        k = RNG.uniform(-1e-3, 1e-3, 3)
        x = df.onshell_point(k, 1, 1)
        p = df.deform(x)
        assert p == pytest.approx(x.four_vector(), abs=5e-6)
    # on-axis closed form: p = g(n) * (sin 0.2, sin 0.2, 0, 0)
    x = df.onshell_point([0.2, 0.0, 0.0], 1, 1)
    g = hp_scale(walk_vector(x.k))
    s = math.sin(0.2)
    assert df.deform(x) == pytest.approx([g * s, g * s, 0.0, 0.0], abs=1e-12)


def test_deformation_jacobian_at_origin_is_identity():
    h = 1e-4
    jac = np.zeros((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fp = df.deformation_map(e[0], e[1:])
        fm = df.deformation_map(-e[0], -e[1:])
        jac[:, j] = (fp - fm) / (2 * h)
    assert np.max(np.abs(jac - np.eye(4))) <= 1e-6


def test_invert_radial_round_trip():
    m0, om0 = df.invert_radial(np.zeros(4))
    assert np.all(m0 == 0.0) and om0 == 0.0
    for _ in range(100):
        m = random_ball_point()
        g = df.radial_scale(m).value
        branch = 1 if RNG.random() < 0.5 else -1
        r = float(np.linalg.norm(m))
        p = np.concatenate([[branch * g * r], g * m])
        m2, omega = df.invert_radial(p)
        assert m2 == pytest.approx(m, abs=1e-11)
        assert omega == pytest.approx(branch * math.asin(r), abs=1e-11)


def test_invert_radial_huge_momentum_converges():
    # generic ray: the target exceeds the representable range, radius saturates
    p = 1e6 * np.array([1.0, 1.0, 0.0, 0.0])
    m, _ = df.invert_radial(p)
    assert np.linalg.norm(m) > 1.0 - 1e-12
    # critical-plane ray: the scale has a pole there, the root is genuine
    j = np.ones(3) / math.sqrt(3.0)
    p = 1e6 * np.concatenate([[1.0], j])
    m, _ = df.invert_radial(p)
    r = float(np.linalg.norm(m))
    assert r < math.sqrt(3.0) / 2.0  # inside the in-plane arc radius
    assert r * df.radial_scale(m).value == pytest.approx(1e6, rel=1e-8)


def test_invert_deform_round_trip_all_regions():
    for chi in (1, -1):
        for region in range(4):
            for x in df.sample_onshell(region, 40, RNG, chi=chi):
                p = df.deform(x)
                y = df.invert_deform(p, region, chi)
                assert y.k == pytest.approx(x.k, abs=1e-9)
                assert y.branch == x.branch
                assert y.omega == pytest.approx(x.omega, abs=1e-9)


def test_invert_deform_zero_momentum_gives_region_center():
    y = df.invert_deform(np.zeros(4), 0)
    assert np.all(y.k == 0.0)
    assert y.branch == 1


def test_same_momentum_in_sibling_regions_shares_the_vector():
    x = df.sample_onshell(0, 1, RNG)[0]
    p = df.deform(x)
    y0 = df.invert_deform(p, 0)
    y2 = df.invert_deform(p, 2)
    assert np.max(np.abs(y0.k - y2.k)) > 0.1
    assert walk_vector(y0.k) == pytest.approx(walk_vector(y2.k), abs=1e-10)


def test_pluggable_scale_round_trip():
    # any radially monotone divergent factor works through the same machinery
    custom = lambda m: 1.0 / max(1e-300, 1.0 - float(np.sum(np.square(m))))
    x = df.onshell_point([0.35, 0.15, -0.1], 1, 1)
    p = df.deform(x, scale=custom)
    n = walk_vector(x.k)
    r = float(np.linalg.norm(n))
    assert p[1:] == pytest.approx(n / (1.0 - r * r), abs=1e-14)
    # analytic inverse of r/(1-r^2) = t cross-checks the generic bisection
    t = float(np.linalg.norm(p[1:]))
    r_expect = (-1.0 + math.sqrt(1.0 + 4.0 * t * t)) / (2.0 * t)
    m2, _ = df.invert_radial(p, scale=custom)
    assert np.linalg.norm(m2) == pytest.approx(r_expect, abs=1e-12)
    y = df.invert_deform(p, x.region, scale=custom)
    assert y.k == pytest.approx(x.k, abs=1e-9)


def test_invert_deform_rejects_non_null_momentum():
    with pytest.raises(ValueError):
        df.invert_deform(np.array([1.0, 0.2, 0.0, 0.0]), 0)
    with pytest.raises(ValueError):
        df.invert_deform(np.zeros(4), 7)
