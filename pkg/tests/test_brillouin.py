"""Zone wrapping, region decomposition, cut set, arcs and their preimages."""

import itertools
import math

import numpy as np
import pytest

from planckwalk import brillouin as bz
from planckwalk.walk_core import walk_scalar, walk_vector

RNG = np.random.default_rng(202)
HALF_PI = math.pi / 2


def test_wrap_keeps_interior_points():
    ks = bz.sample_zone(RNG, 500)
    interior = ks[bz.region_margin(ks) > 1e-6]
    assert np.allclose(bz.wrap_to_zone(interior), interior)


def test_wrap_identifies_reciprocal_translates():
    # oracle: enumerate integer combinations of the reciprocal generators
    coeffs = np.array(list(itertools.product((-2, -1, 0, 1, 2), repeat=3)))
    shifts = coeffs @ bz.RECIP_BASIS.T
    k = np.array([0.31, -0.74, 0.52])
    base = bz.wrap_to_zone(k)
    for g in shifts[RNG.choice(len(shifts), 40, replace=False)]:
        assert bz.wrap_to_zone(k + g) == pytest.approx(base, abs=1e-12)


def test_wrap_is_idempotent_and_lands_in_zone():
    raw = RNG.uniform(-9, 9, size=(800, 3))
    w = bz.wrap_to_zone(raw)
    assert bz.in_zone(w).all()
    assert np.allclose(bz.wrap_to_zone(w), w, atol=1e-12)


def test_wrap_pairs_opposite_faces():
    # a point on the face k_x + k_y = pi and its identified opposite
    for _ in range(20):
        t = RNG.uniform(-0.4, 0.4)
        s = RNG.uniform(-0.4, 0.4)
        face = np.array([HALF_PI + t, HALF_PI - t, s])
        opposite = face - np.pi * np.array([1.0, 1.0, 0.0])
        assert bz.wrap_to_zone(face) == pytest.approx(bz.wrap_to_zone(opposite), abs=1e-12)


def test_classify_region_examples():
    assert bz.classify_region([0.0, 0.0, 0.0]) == 0
    assert bz.classify_region([HALF_PI, HALF_PI, HALF_PI]) == 3
    assert bz.classify_region([0.0, HALF_PI, 0.0]) == bz.BOUNDARY  # lam = 0
    assert bz.classify_region([0.0, math.pi / 4, 0.0]) == bz.BOUNDARY  # cos 2k_y = 0
    assert bz.classify_region([1.7, 0.0, 0.0]) == 1
    assert bz.classify_region([-HALF_PI, -HALF_PI, -HALF_PI]) == 2


def test_region_signs_match_independent_reclassification():
    # independent oracle: lam from the trace of the walk matrix
    from planckwalk.walk_core import walk_matrix

    ks = bz.sample_zone(RNG, 300)
    regs = bz.classify_region(ks)
    for k, reg in zip(ks, regs):
        if reg == bz.BOUNDARY:
            continue
        lam = float(np.real(np.trace(walk_matrix(k)))) / 2.0
        expect = (lam < 0) + 2 * (math.cos(2.0 * k[1]) < 0)
        assert reg == expect


def test_jacobian_determinant_closed_form():
    assert bz.jacobian_det([0.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert bz.jacobian_det([0.0, math.pi / 4, 0.0]) == pytest.approx(0.0, abs=1e-15)
    h = 1e-5
    for _ in range(40):
        k = RNG.uniform(-3, 3, 3)
        chi = 1 if RNG.random() < 0.5 else -1
        fd = np.zeros((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd[:, j] = (walk_vector(k + e, chi) - walk_vector(k - e, chi)) / (2 * h)
        det_fd = float(np.linalg.det(fd))
        det = float(bz.jacobian_det(k, chi))
        if abs(det) > 1e-2:
            assert det == pytest.approx(det_fd, rel=1e-6)


def test_jacobian_sign_is_constant_per_region():
    ks = bz.sample_zone(RNG, 20000)
    regs = bz.classify_region(ks)
    dets = bz.jacobian_det(ks)
    signs = {}
    for region in range(4):
        vals = dets[regs == region]
        assert np.all(vals != 0.0)
        assert np.all(np.sign(vals) == np.sign(vals[0]))
        signs[region] = np.sign(vals[0])
    assert signs == {0: 1.0, 1: -1.0, 2: -1.0, 3: 1.0}


def test_region_partition_covers_zone():
    n = 64
    u = (np.arange(n) + 0.5) / n - 0.5
    frac = np.stack(np.meshgrid(u, u, u, indexing="ij"), axis=-1).reshape(-1, 3)
    ks = bz.wrap_to_zone(frac @ bz.RECIP_BASIS.T)
    regs = bz.classify_region(ks)
    counts = {r: int(np.sum(regs == r)) for r in (-1, 0, 1, 2, 3)}
    assert sum(counts.values()) == len(ks)
    for region in range(4):
        assert counts[region] > 0


def test_unit_vector_norm_iff_scalar_vanishes():
    ks = bz.sample_zone(RNG, 5000)
    lam = walk_scalar(ks)
    norms = np.linalg.norm(walk_vector(ks), axis=1)
    assert np.max(np.abs((1.0 - norms**2) - lam**2)) <= 1e-12


def test_doubling_points_kill_the_vector():
    for chi in (1, -1):
        pts = bz.doubling_points(chi)
        assert len(pts) == 4
        assert any(np.all(p == 0.0) for p, _ in pts)
        flips = 0
        for p, flip in pts:
            assert np.max(np.abs(walk_vector(p, chi))) <= 1e-12
            assert abs(walk_scalar(p, chi)) == pytest.approx(1.0, abs=1e-12)
            flips += int(flip)
        assert flips == 2  # two species of each handedness


def test_region_centers_are_in_their_regions():
    for chi in (1, -1):
        for region in range(4):
            center, jac = bz.region_center(region, chi)
            assert bz.classify_region(center, chi) == region
            # the linearization there is an exact signed permutation
            assert np.max(np.abs(np.abs(jac) - np.eye(3))) <= 1e-12


def test_cut_set_membership():
    assert not bz.in_cut_set([0.0, 0.0, 0.0])
    assert bz.in_cut_set([0.5, 0.5, 0.5])
    assert not bz.in_cut_set([0.1, 0.9, 0.2])
    assert bz.in_cut_set([0.0, 0.8, 0.0])  # on the y-axis past the arc radius
    assert not bz.in_cut_set([0.0, 0.5, 0.0])


def test_arch_points_and_punctured_ball():
    quarter = bz.arch_point(1, math.pi / 4)
    assert quarter == pytest.approx([0.5, 0.5, 0.5])
    assert bz.in_punctured_ball([0.0, 0.0, 0.0], "a")
    assert bz.in_punctured_ball([0.0, 0.0, 0.0], "b")
    # e_+(pi/4) lies on the first-quadrant + arc: excluded from image a,
    # contained in image b (consistent with the arc-inclusion table)
    assert not bz.in_punctured_ball(quarter, "a")
    assert bz.in_punctured_ball(quarter, "b")
    # and e_+(3 pi/4) the other way around
    three_q = bz.arch_point(1, 3 * math.pi / 4)
    assert bz.in_punctured_ball(three_q, "a")
    assert not bz.in_punctured_ball(three_q, "b")
    assert not bz.in_punctured_ball([1.0, 0.0, 0.0], "a")  # on the sphere
    assert not bz.in_punctured_ball([0.8, 0.4, 0.5], "a")  # outside


def test_region_images_land_in_their_punctured_ball():
    for region, which in ((0, "a"), (1, "b"), (2, "a"), (3, "b")):
        ks = bz.sample_zone(RNG, 4000)
        sel = (bz.classify_region(ks) == region) & (bz.region_margin(ks) > 1e-6)
        ns = walk_vector(ks[sel])
        ok = bz.in_punctured_ball(ns, which)
        assert np.all(ok)


def test_arch_inclusion_spot_checks():
    # one included and one excluded arc per image class
    rep = bz.verify_arch_inclusion(0, (1, 2), samples=12)
    assert rep.expected_included and rep.solved == 12 and rep.consistent
    rep = bz.verify_arch_inclusion(0, (1, 1), samples=12)
    assert not rep.expected_included and rep.solved == 0 and rep.consistent
    rep = bz.verify_arch_inclusion(1, (1, 1), samples=12)
    assert rep.expected_included and rep.solved == 12 and rep.consistent


def test_solve_in_region_round_trip():
    for chi in (1, -1):
        for region in range(4):
            ks = bz.sample_zone(RNG, 40)
            sel = (bz.classify_region(ks, chi) == region) & (bz.region_margin(ks, chi) > 1e-3)
            for k in ks[sel]:
                m = walk_vector(k, chi)
                if bz.in_cut_set(m):
                    continue
                sol = bz.solve_in_region(m, region, chi)
                assert sol is not None
                assert walk_vector(sol, chi) == pytest.approx(m, abs=1e-11)
                assert bz.wrap_to_zone(k) == pytest.approx(np.asarray(sol), abs=1e-9)
