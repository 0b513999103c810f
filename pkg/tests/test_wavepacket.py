"""Packet preparation, exact long-time evolution, and transport measurement."""

import math
import warnings

import numpy as np
import pytest

from planckwalk import brillouin as bz
from planckwalk import wavepacket as wp
from planckwalk.walk_core import walk_matrix, walk_scalar, walk_vector

RNG = np.random.default_rng(606)


@pytest.fixture(scope="module")
def grid():
    return wp.KGrid((24, 24, 24))


def nearest_node(grid, target):
    d2 = np.sum((grid.k.reshape(-1, 3) - np.asarray(target)) ** 2, axis=1)
    return grid.k.reshape(-1, 3)[int(np.argmin(d2))]


def test_grid_requires_minimum_size():
    with pytest.raises(ValueError):
        wp.KGrid((2, 8, 8))


def test_packet_is_normalized_and_centered(grid):
    pkt = wp.gaussian_packet(grid, [0.2, 0.0, 0.0], 0.1, spinor=[1.0, 0.0])
    assert pkt.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        wp.gaussian_packet(grid, [0.2, 0.0, 0.0], -1.0)


def test_packet_at_symmetric_point_is_even(grid):
    # an origin-centered envelope weights k and -k equally
    pkt = wp.gaussian_packet(grid, [0.0, 0.0, 0.0], 0.2, spinor=[1.0, 0.0])
    dens = np.sum(np.abs(pkt.amps) ** 2, axis=-1).reshape(-1)
    ks = grid.k.reshape(-1, 3)
    order = np.lexsort(np.round(ks, 9).T)
    order_neg = np.lexsort(np.round(bz.wrap_to_zone(-ks), 9).T)
    assert dens[order] == pytest.approx(dens[order_neg], abs=1e-12)


def test_tiny_sigma_concentrates_on_nearest_node(grid):
    target = nearest_node(grid, [0.31, -0.12, 0.05])
    pkt = wp.gaussian_packet(grid, target, 1e-4, spinor=[1.0, 0.0])
    dens = np.sum(np.abs(pkt.amps) ** 2, axis=-1)
    assert float(np.max(dens)) == pytest.approx(1.0, abs=1e-12)


def test_evolution_semigroup_and_norm(grid):
    pkt = wp.gaussian_packet(grid, [0.2, 0.1, 0.0], 0.08, spinor=[0.6, 0.8])
    assert np.array_equal(wp.evolve(pkt, 0).amps, pkt.amps)
    two_step = wp.evolve(wp.evolve(pkt, 7), 5)
    one_step = wp.evolve(pkt, 12)
    assert np.max(np.abs(two_step.amps - one_step.amps)) <= 1e-10
    long = wp.evolve(pkt, 10**4)
    assert abs(long.norm() - 1.0) <= 1e-10


def test_evolution_matches_matrix_power(grid):
    pkt = wp.gaussian_packet(grid, [0.3, 0.0, 0.0], 0.05, spinor=[1.0, 1.0])
    out = wp.evolve(pkt, 3)
    idx = (5, 7, 11)
    k = pkt.grid.k[idx]
    expect = np.linalg.matrix_power(walk_matrix(k), 3) @ pkt.amps[idx]
    assert out.amps[idx] == pytest.approx(expect, abs=1e-13)


def test_branch_packet_acquires_single_phase(grid):
    # each mode of a +branch packet picks up exactly exp(-i t omega_plus)
    pkt = wp.gaussian_packet(grid, [0.25, 0.05, 0.0], 0.1, branch=1)
    t = 37
    out = wp.evolve(pkt, t)
    omega = np.arccos(np.clip(walk_scalar(grid.k), -1.0, 1.0))
    expect = np.exp(-1j * t * omega)[..., None] * pkt.amps
    assert np.max(np.abs(out.amps - expect)) <= 1e-10


def test_group_velocity_values_and_bound():
    assert wp.group_velocity([0.01, 0.0, 0.0]) == pytest.approx([1.0, 0.0, 0.0], abs=1e-6)
    # approaching the conical point at the zone vertex the speed tends to 1
    near = np.array([math.pi, 0.0, 0.0]) - np.array([1e-4, 1e-4, 1e-4]) / math.sqrt(3)
    assert np.linalg.norm(wp.group_velocity(near)) == pytest.approx(1.0, abs=1e-4)
    h = 1e-6
    for _ in range(25):
        k = bz.sample_zone(RNG, 1)[0]
        if np.linalg.norm(walk_vector(k)) < 1e-3:
            continue
        fd = np.zeros(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd[j] = (
                math.acos(float(walk_scalar(k + e))) - math.acos(float(walk_scalar(k - e)))
            ) / (2 * h)
        gv = wp.group_velocity(k)
        assert gv == pytest.approx(fd, rel=1e-6, abs=1e-7)
        assert np.max(np.abs(gv)) <= 1.0 + 1e-9
    with pytest.raises(ValueError):
        wp.group_velocity([0.0, 0.0, 0.0])


def test_measured_velocity_matches_group_velocity(grid):
    k0 = nearest_node(grid, [0.3, 0.25, 0.1])
    pkt = wp.gaussian_packet(grid, k0, 0.01, branch=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = wp.measure_packet_velocity(pkt, 10**4)
    gv = wp.group_velocity(k0, 1, 1)
    assert np.linalg.norm(v - gv) / np.linalg.norm(gv) <= 1e-2
    # minus branch moves the opposite way
    pkt2 = wp.gaussian_packet(grid, k0, 0.01, branch=-1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v2 = wp.measure_packet_velocity(pkt2, 10**4)
    assert np.linalg.norm(v2 + gv) / np.linalg.norm(gv) <= 1e-2


def test_resolved_packet_velocity_with_spread_correction(grid):
    # a grid-resolved Gaussian picks up an O(sigma^2) curvature correction
    k0 = nearest_node(grid, [0.9, 0.5, 0.2])
    pkt = wp.gaussian_packet(grid, k0, 0.3, branch=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = wp.measure_packet_velocity(pkt, 1000)
    weights = np.sum(np.abs(pkt.amps) ** 2, axis=-1).reshape(-1)
    ks = grid.k.reshape(-1, 3)
    ok = np.linalg.norm(walk_vector(ks), axis=1) > 1e-9
    expect = np.einsum("n,nj->j", weights[ok], np.stack([wp.group_velocity(k) for k in ks[ok]]))
    assert v == pytest.approx(expect, abs=1e-9)


def test_speed_never_exceeds_one_per_axis(grid):
    for center in ([0.2, 0.0, 0.0], [0.5, 0.5, 0.5], [1.2, 0.3, -0.4]):
        pkt = wp.gaussian_packet(grid, center, 0.05, branch=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = wp.measure_packet_velocity(pkt, 5000)
        assert np.max(np.abs(v)) <= 1.0 + 1e-6


def test_resolution_warning_for_short_runs(grid):
    pkt = wp.gaussian_packet(grid, [0.2, 0.0, 0.0], 0.1, branch=1)
    with pytest.warns(UserWarning, match="two lattice sites"):
        wp.measure_packet_velocity(pkt, 1)
    with pytest.raises(ValueError):
        wp.measure_packet_velocity(pkt, 0)


def test_arrival_delay_between_diagonal_packets(grid):
    # group speed varies along the diagonal, so packets of different |k0| drift apart
    steps = 4000
    speeds = {}
    for mag in (0.1, 0.5):
        k0 = nearest_node(grid, mag * np.ones(3) / math.sqrt(3.0))
        pkt = wp.gaussian_packet(grid, k0, 0.01, branch=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            speeds[mag] = (
                float(np.linalg.norm(wp.measure_packet_velocity(pkt, steps))),
                float(np.linalg.norm(wp.group_velocity(k0))),
            )
    measured_delay = steps * (speeds[0.5][0] - speeds[0.1][0])
    analytic_delay = steps * (speeds[0.5][1] - speeds[0.1][1])
    assert measured_delay == pytest.approx(analytic_delay, rel=2e-2)
    assert measured_delay > 0.0
