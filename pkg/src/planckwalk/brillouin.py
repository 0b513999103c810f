"""Geometry of the BCC Brillouin zone and the four-region decomposition.

In rescaled lattice units the walk lattice is body-centered cubic with the
eight nearest-neighbour steps (+-1, +-1, +-1).  Its Brillouin zone is the
rhombic dodecahedron

    |k_x +- k_y| <= pi,  |k_y +- k_z| <= pi,  |k_x +- k_z| <= pi ,

with opposite faces identified: two wave-vectors are the same state when they
differ by a vector of the reciprocal lattice generated by
pi(1,1,0), pi(1,0,1), pi(0,1,1).

The zone splits into four open regions by the signs of ``walk_scalar(k)`` and
``cos(2 k_y)``; on each region the map k -> n(k) is a diffeomorphism onto the
open unit ball minus two half-ellipse arcs.  This module provides the
canonical wrapping, the region classifier, the arcs, the excised "cut set"
that makes the image star-shaped, and a damped Newton solver that inverts
n(k) = m inside a chosen region.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .walk_core import walk_scalar, walk_vector, walk_vector_jacobian

#: the region classifier returns this for points within tolerance of a region edge
BOUNDARY = -1

#: primitive translations of the walk lattice (rescaled units)
LATTICE_BASIS = np.array([[1, 1, -1], [1, -1, 1], [-1, 1, 1]], dtype=float)

#: the eight nearest-neighbour displacements
NEIGHBOR_STEPS = np.array(list(itertools.product((-1, 1), repeat=3)), dtype=float)

#: dual basis: DUAL_BASIS[i] . LATTICE_BASIS[j] = delta_ij
DUAL_BASIS = np.linalg.inv(LATTICE_BASIS).T

#: reciprocal lattice generators (columns), an FCC lattice of spacing 2*pi
RECIP_BASIS = (2.0 * np.pi * DUAL_BASIS).T

# the 12 zone faces come in 6 opposite pairs with normals along (1,+-1,0)-type
# directions; |k . f| <= pi for each row f
_FACE_FORMS = np.array(
    [
        [1, 1, 0],
        [1, -1, 0],
        [1, 0, 1],
        [1, 0, -1],
        [0, 1, 1],
        [0, 1, -1],
    ],
    dtype=float,
)

_OFFSETS = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=float)
_RECIP_OFFSETS = _OFFSETS @ RECIP_BASIS.T


@dataclass(frozen=True)
class BrillouinZone:
    """Bundle of the lattice/zone geometry constants."""

    lattice_basis: np.ndarray = LATTICE_BASIS
    dual_basis: np.ndarray = DUAL_BASIS
    reciprocal_basis: np.ndarray = RECIP_BASIS
    neighbor_steps: np.ndarray = NEIGHBOR_STEPS


BZ = BrillouinZone()


def in_zone(k, tol: float = 1e-9):
    """True where k lies in the closed rhombic dodecahedron (within tol)."""
    k = np.asarray(k, dtype=float)
    forms = k @ _FACE_FORMS.T
    return np.all(np.abs(forms) <= np.pi + tol, axis=-1)


def wrap_to_zone(k):
    """Canonical zone representative of k modulo the reciprocal lattice.

    The representative minimizes |k - G| over reciprocal vectors G; face,
    edge and vertex ties are broken by picking the lexicographically largest
    (k_x, k_y, k_z) among the minimizers, so identified boundary points map to
    one canonical output.
    """
    k = np.asarray(k, dtype=float)
    single = k.ndim == 1
    pts = k.reshape(-1, 3)
    frac = pts @ np.linalg.inv(RECIP_BASIS.T)
    base = np.rint(frac) @ RECIP_BASIS.T
    # candidate representatives over the 27 neighbouring reciprocal vectors
    cands = pts[:, None, :] - base[:, None, :] - _RECIP_OFFSETS[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", cands, cands)
    best = np.min(d2, axis=1, keepdims=True)
    tie = d2 <= best + 1e-9 * (1.0 + best)
    # lexicographic maximum among the tied candidates
    out = np.empty_like(pts)
    for i in range(pts.shape[0]):
        rows = cands[i][tie[i]]
        order = np.lexsort((rows[:, 2], rows[:, 1], rows[:, 0]))
        out[i] = rows[order[-1]]
    return out[0] if single else out.reshape(k.shape)


def sample_zone(rng: np.random.Generator, size: int):
    """Uniformly distributed wave-vectors in the zone, shape (size, 3)."""
    frac = rng.random((size, 3)) - 0.5
    return wrap_to_zone(frac @ RECIP_BASIS.T)


def classify_region(k, chi: int = 1, tol: float = 1e-12):
    """Region index 0..3 of k, or BOUNDARY within ``tol`` of an edge.

    Region 0: lam > 0, cos(2 k_y) > 0;  1: lam < 0, cos > 0;
    region 2: lam > 0, cos < 0;         3: lam < 0, cos < 0.
    """
    k = np.asarray(k, dtype=float)
    lam = walk_scalar(k, chi)
    cy2 = np.cos(2.0 * k[..., 1])
    region = (lam < 0).astype(int) + 2 * (cy2 < 0).astype(int)
    region = np.where((np.abs(lam) <= tol) | (np.abs(cy2) <= tol), BOUNDARY, region)
    return region if region.ndim else int(region)


def region_margin(k, chi: int = 1):
    """min(|lam|, |cos 2 k_y|): distance proxy from the region edges."""
    k = np.asarray(k, dtype=float)
    return np.minimum(np.abs(walk_scalar(k, chi)), np.abs(np.cos(2.0 * k[..., 1])))


def jacobian_det(k, chi: int = 1):
    """Closed-form determinant of d n / d k:  cos(2 k_y) * walk_scalar(k)."""
    k = np.asarray(k, dtype=float)
    return np.cos(2.0 * k[..., 1]) * walk_scalar(k, chi)


def doubling_points(chi: int = 1):
    """The four zone points where n vanishes, with their chirality-flip flags.

    Each region contains exactly one such point, around which the walk again
    behaves like a small-wave-vector walk; the flag says whether the local
    handedness is exchanged relative to the origin.  The points are returned
    as convenient class representatives; (pi,0,0), (0,pi,0), (0,0,pi) and
    their negatives are all the same zone point.
    """
    half_pi = 0.5 * np.pi
    pts = [
        np.zeros(3),
        half_pi * np.array([1.0, 1.0, 1.0]),
        -half_pi * np.array([1.0, 1.0, 1.0]),
        np.array([np.pi, 0.0, 0.0]),
    ]
    out = []
    for p in pts:
        lam = float(walk_scalar(p, chi))
        det = float(np.linalg.det(walk_vector_jacobian(p, chi)))
        out.append((p, lam * det < 0))
    return out


def region_center(region: int, chi: int = 1):
    """The doubling point sitting inside ``region`` and the (diagonal) Jacobian there."""
    for p, _ in doubling_points(chi):
        if classify_region(p, chi) == region:
            return p, walk_vector_jacobian(p, chi)
    raise ValueError(f"no doubling point found for region {region!r}")


# ---------------------------------------------------------------------------
# elliptic arcs and the excised sets in the image ball
# ---------------------------------------------------------------------------

#: open parameter intervals of the four quadrant arcs
ARCH_INTERVALS = {
    1: (0.0, 0.5 * np.pi),
    2: (0.5 * np.pi, np.pi),
    3: (-0.5 * np.pi, 0.0),
    4: (-np.pi, -0.5 * np.pi),
}


def arch_point(sign: int, t):
    """Point (sin t, cos t, sign*sin t)/sqrt(2) of the +/- ellipse, shape (..., 3)."""
    if sign not in (1, -1):
        raise ValueError("arch sign must be +1 or -1")
    t = np.asarray(t, dtype=float)
    s = np.sin(t) / np.sqrt(2.0)
    return np.stack([s, np.cos(t) / np.sqrt(2.0), sign * s], axis=-1)


def arch_distance(m, sign: int, t_lo: float, t_hi: float, refine: bool = True):
    """Euclidean distance from point(s) m to the arc e_sign([t_lo, t_hi])."""
    m = np.asarray(m, dtype=float)
    single = m.ndim == 1
    pts = np.atleast_2d(m)
    ts = np.linspace(t_lo, t_hi, 513)
    arc = arch_point(sign, ts)
    d2 = np.sum((pts[:, None, :] - arc[None, :, :]) ** 2, axis=-1)
    idx = np.argmin(d2, axis=1)
    best = np.sqrt(d2[np.arange(len(pts)), idx])
    if refine:
        # local golden-section polish around the best grid sample
        lo = ts[np.maximum(idx - 1, 0)]
        hi = ts[np.minimum(idx + 1, len(ts) - 1)]
        for _ in range(40):
            mid1 = lo + 0.382 * (hi - lo)
            mid2 = lo + 0.618 * (hi - lo)
            f1 = np.sum((pts - arch_point(sign, mid1)) ** 2, axis=-1)
            f2 = np.sum((pts - arch_point(sign, mid2)) ** 2, axis=-1)
            take1 = f1 < f2
            hi = np.where(take1, mid2, hi)
            lo = np.where(take1, lo, mid1)
        tb = 0.5 * (lo + hi)
        best = np.minimum(best, np.linalg.norm(pts - arch_point(sign, tb), axis=-1))
    return best[0] if single else best.reshape(m.shape[:-1])


def in_cut_set(m, tol: float = 1e-12):
    """Membership in the excised set of the unit ball.

    The set consists of points on the planes m_x = +- m_z with
    2 m_x^2 + m_y^2 <= 1 and 2 m_x^2 + 2 m_y^2 >= 1; removing it makes the
    region-image ball star-shaped.  Plane membership is tested to ``tol``.
    """
    m = np.asarray(m, dtype=float)
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    on_plane = np.minimum(np.abs(mx - mz), np.abs(mx + mz)) <= tol
    res = on_plane & (2 * mx**2 + my**2 <= 1.0 + tol) & (2 * mx**2 + 2 * my**2 >= 1.0 - tol)
    return res if res.ndim else bool(res)


def in_punctured_ball(m, which: str = "a", tol: float = 1e-9):
    """Membership in the region image: open unit ball minus two excluded arcs.

    Image "a" (regions 0 and 2) excludes the + arc over (-pi/2, pi/2) and the
    - arc over its complement; image "b" (regions 1 and 3) swaps the two.
    Arc membership is a proximity test at tolerance ``tol``.
    """
    if which not in ("a", "b"):
        raise ValueError("which must be 'a' or 'b'")
    m = np.asarray(m, dtype=float)
    r = np.linalg.norm(m, axis=-1)
    inside = r < 1.0
    half = 0.5 * np.pi
    if which == "a":
        excl = [(1, -half, half), (-1, half, 1.5 * np.pi)]
    else:
        excl = [(-1, -half, half), (1, half, 1.5 * np.pi)]
    clear = np.ones_like(inside, dtype=bool)
    for sign, lo, hi in excl:
        clear &= arch_distance(m, sign, lo, hi) > tol
    res = inside & clear
    return res if res.ndim else bool(res)


def arch_included(region: int, arch: tuple[int, int]) -> bool:
    """Whether arc ``arch = (sign, quadrant)`` lies in the image of ``region``."""
    sign, quadrant = arch
    if region not in (0, 1, 2, 3):
        raise ValueError(f"bad region {region!r}")
    if sign not in (1, -1) or quadrant not in (1, 2, 3, 4):
        raise ValueError(f"bad arch id {arch!r}")
    in_a = (sign == 1) == (quadrant in (2, 4))
    return in_a if region in (0, 2) else not in_a


# ---------------------------------------------------------------------------
# inverting n(k) = m inside one region
# ---------------------------------------------------------------------------

_GRID_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

# deterministic multi-start offsets for stubborn targets
_PERTURBATIONS = np.array(
    [
        [0.17, 0.05, -0.11],
        [-0.13, 0.19, 0.07],
        [0.08, -0.21, 0.13],
        [-0.19, -0.07, -0.17],
        [0.23, 0.11, 0.19],
        [-0.05, 0.13, -0.23],
        [0.11, -0.17, -0.05],
        [-0.23, -0.13, 0.21],
    ]
)


def _seed_grid(chi: int):
    """Cached coarse wrapped grid with region labels and n values."""
    if chi not in _GRID_CACHE:
        n_side = 24
        u = (np.arange(n_side) + 0.5) / n_side - 0.5
        frac = np.stack(np.meshgrid(u, u, u, indexing="ij"), axis=-1).reshape(-1, 3)
        ks = frac @ RECIP_BASIS.T
        _GRID_CACHE[chi] = (ks, classify_region(ks, chi), walk_vector(ks, chi))
    return _GRID_CACHE[chi]


def _newton_step(m, k, r, chi):
    jac = walk_vector_jacobian(k, chi)
    try:
        return np.linalg.solve(jac, r)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(jac, r, rcond=None)[0]


def _newton(m, k0, chi, region, tol, max_iter, max_halvings):
    """Damped Newton for n(k) = m; optionally keeps iterates inside ``region``.

    After reaching ``tol`` a few undamped steps polish the residual down to
    the float floor: callers that re-amplify the residual (the deformation
    near the image sphere) need every spare digit.
    """
    k = np.array(k0, dtype=float)
    r = walk_vector(k, chi) - m
    rn = float(np.linalg.norm(r))
    converged = rn <= tol
    for _ in range(max_iter):
        if converged:
            break
        step = _newton_step(m, k, r, chi)
        alpha = 1.0
        for _ in range(max_halvings):
            k_try = k - alpha * step
            if region is None or classify_region(k_try, chi) == region:
                r_try = walk_vector(k_try, chi) - m
                rn_try = float(np.linalg.norm(r_try))
                if rn_try < rn:
                    k, r, rn = k_try, r_try, rn_try
                    break
            alpha *= 0.5
        else:
            return k, rn <= tol
        converged = rn <= tol
    if not converged:
        return k, False
    for _ in range(3):
        if rn == 0.0:
            break
        k_try = k - _newton_step(m, k, r, chi)
        if region is not None and classify_region(k_try, chi) != region:
            break
        r_try = walk_vector(k_try, chi) - m
        rn_try = float(np.linalg.norm(r_try))
        if rn_try >= rn:
            break
        k, r, rn = k_try, r_try, rn_try
    return k, True


def solve_in_region(
    m,
    region: int,
    chi: int = 1,
    seeds=None,
    constrained: bool = True,
    tol: float = 1e-12,
    max_iter: int = 200,
    max_halvings: int = 20,
):
    """Solve n(k) = m for the unique preimage inside ``region``.

    Seeds are tried in order: the small-|m| linearization around the region's
    doubling point, any caller-provided seeds, the best match on a cached
    coarse grid, and deterministic perturbations of the linearized seed.
    Returns the wrapped solution, or ``None`` if no start converges.
    """
    m = np.asarray(m, dtype=float)
    center, jac_c = region_center(region, chi)
    linearized = center + np.linalg.solve(jac_c, m)

    def candidates():
        yield linearized
        if seeds is not None:
            yield from (np.asarray(s, dtype=float) for s in seeds)
        ks, regs, ns = _seed_grid(chi)
        mask = regs == region
        if np.any(mask):
            d2 = np.sum((ns[mask] - m) ** 2, axis=1)
            yield ks[mask][np.argmin(d2)]
        yield from (linearized + p for p in _PERTURBATIONS)

    for k0 in candidates():
        if constrained and classify_region(k0, chi) != region:
            continue
        k, ok = _newton(m, k0, chi, region if constrained else None, tol, max_iter, max_halvings)
        if ok and classify_region(k, chi) == region:
            return wrap_to_zone(k)
    return None


# ---------------------------------------------------------------------------
# arc-inclusion verification
# ---------------------------------------------------------------------------

# preimages of the arcs lie on lines k_x = pi/4 + n pi/2, k_z = +- k_x + m pi
_ARCH_LINE_X = np.pi / 4.0 + np.pi / 2.0 * np.arange(4)
_ARCH_LINE_SHIFT = np.array([0.0, np.pi])


@dataclass(frozen=True)
class ArchCheck:
    """Result of numerically probing one (region, arc) inclusion claim."""

    region: int
    arch: tuple[int, int]
    expected_included: bool
    samples: int
    solved: int
    solved_elsewhere: int
    nonconverged: int

    @property
    def consistent(self) -> bool:
        want = self.samples if self.expected_included else 0
        return self.solved == want


def _arch_seed(target, region, sign, chi):
    """Best region-matching point on the candidate preimage lines."""
    ys = np.linspace(-np.pi, np.pi, 161)
    best, best_d = None, np.inf
    for kx in _ARCH_LINE_X:
        for shift in _ARCH_LINE_SHIFT:
            kz = sign * kx + shift
            ks = np.stack([np.full_like(ys, kx), ys, np.full_like(ys, kz)], axis=-1)
            ok = classify_region(ks, chi) == region
            if not np.any(ok):
                continue
            d2 = np.sum((walk_vector(ks[ok], chi) - target) ** 2, axis=1)
            i = np.argmin(d2)
            if d2[i] < best_d:
                best_d, best = d2[i], ks[ok][i]
    return best


def verify_arch_inclusion(
    region: int,
    arch: tuple[int, int],
    samples: int = 100,
    chi: int = 1,
    tol: float = 1e-10,
) -> ArchCheck:
    """Probe whether arc ``arch`` lies in the n-image of ``region``.

    For each arc parameter sample the solver attempts n(k) = e(t) from seeds
    on the known preimage lines (plus the generic seeds).  A sample counts as
    solved when the residual is below ``tol`` and the solution classifies into
    ``region``; converged solutions in another region are counted separately
    from plain non-convergence.
    """
    sign, quadrant = arch
    lo, hi = ARCH_INTERVALS[quadrant]
    ts = lo + (hi - lo) * (np.arange(samples) + 0.5) / samples
    solved = elsewhere = failed = 0
    for t in ts:
        target = arch_point(sign, t)
        seed = _arch_seed(target, region, sign, chi)
        seeds = [seed] if seed is not None else None
        k = solve_in_region(target, region, chi, seeds=seeds, constrained=False, tol=tol)
        if k is not None:
            solved += 1
            continue
        # did the unconstrained solver land on a preimage outside the region?
        found_elsewhere = False
        for k0 in ([seed] if seed is not None else []) + [region_center(region, chi)[0]]:
            k_end, ok = _newton(target, k0, chi, None, tol, 200, 20)
            if ok and classify_region(k_end, chi) != region:
                found_elsewhere = True
                break
        if found_elsewhere:
            elsewhere += 1
        else:
            failed += 1
    return ArchCheck(
        region=region,
        arch=arch,
        expected_included=arch_included(region, arch),
        samples=samples,
        solved=solved,
        solved_elsewhere=elsewhere,
        nonconverged=failed,
    )
