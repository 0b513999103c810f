"""Deformation between the walk's dispersion surfaces and the flat null cone.

On each zone region the on-shell points (omega, k) are mapped to real
four-momenta by

    D(omega, k) = g(n(k)) * (sin(omega), n(k)) ,

where the radial rescaling g is built so that the image is the full null cone
p0^2 = |p|^2 and the map is invertible region by region.  Explicitly, for
m = r*j with unit direction j,

    g(m) = 1 + r * Integral_0^r [ 1/(1 - s^2) + 1/ellipse_gap(s*j) ] ds ,

so g == 1 at the origin with vanishing gradient, g grows monotonically along
every ray, and it diverges where the ray leaves the admissible star-shaped
set (the unit sphere, or the excluded ellipse arcs on the planes m_x = +-m_z).

Both factors of the integrand are rational in s along a fixed ray, so the
integral has a stable closed form, used by default; an adaptive quadrature
evaluation is kept as an independent cross-check (``method="quad"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import brillouin
from .walk_core import walk_scalar, walk_vector

#: null-cone and round-trip tolerances
NULL_TOL = 1e-10
ROUNDTRIP_TOL = 1e-9

_A_EPS = 1e-300
_C_EPS = 1e-14


class InversionError(RuntimeError):
    """Raised when a numerically controlled inverse fails to converge."""


def sphere_gap(m):
    """1 - |m|^2: vanishes exactly on the unit sphere."""
    m = np.asarray(m, dtype=float)
    return 1.0 - np.sum(m * m, axis=-1)


def ellipse_gap(m):
    """Polynomial vanishing exactly on the two unit-frame ellipses.

    In spherical coordinates (m_x, m_y, m_z) = r (cos th cos ph, sin th,
    cos th sin ph) this is (cos^2 ph - sin^2 ph)^2 + (1/2 - r^2 (1 - cos^2 th
    sin^2 ph))^2.  The azimuthal factor is taken in the limit along the ray:
    it is 0 on the y-axis (the ray continues into the excluded ellipse points)
    and 1 at the origin.
    """
    m = np.asarray(m, dtype=float)
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    den = mx * mx + mz * mz
    with np.errstate(invalid="ignore", divide="ignore"):
        azim = np.where(den > 0.0, ((mx * mx - mz * mz) / np.where(den > 0, den, 1.0)) ** 2, 0.0)
    azim = np.where((den == 0.0) & (my == 0.0), 1.0, azim)
    return azim + (0.5 - mx * mx - my * my) ** 2


@dataclass(frozen=True)
class RayProfile:
    """Direction-dependent constants of the radial integrand.

    Along the ray through unit vector j the ellipse gap is
    ``azim + (1/2 - curv * s^2)^2`` with ray-constant ``azim`` and ``curv``;
    ``r_max`` is where the ray leaves the admissible set (1 on generic rays,
    earlier on the critical planes |j_x| = |j_z| where the gap has a real
    zero inside the ball).
    """

    azim: float
    curv: float
    r_max: float


def ray_profile(j) -> RayProfile:
    j = np.asarray(j, dtype=float)
    jx, jz = j[0], j[2]
    den = jx * jx + jz * jz
    azim = 0.0 if den == 0.0 else float(((jx * jx - jz * jz) / den) ** 2)
    curv = float(1.0 - jz * jz)
    r_max = 1.0
    if azim < _A_EPS and curv > 0.5:
        root = 1.0 / math.sqrt(2.0 * curv)
        r_max = min(1.0, root)
    return RayProfile(azim=azim, curv=curv, r_max=r_max)


def _ellipse_integral(r: float, prof: RayProfile) -> float:
    """Closed form of Integral_0^r ds / (azim + (1/2 - curv s^2)^2)."""
    A, c = prof.azim, prof.curv
    if r == 0.0:
        return 0.0
    if c < _C_EPS:
        return r / (A + 0.25)
    if A < _A_EPS:
        # gap is a perfect square; diverges at the in-plane arc radius
        w = math.sqrt(2.0 * c)
        if w * r >= 1.0:
            return math.inf
        return 2.0 * r / (1.0 - 2.0 * c * r * r) + (2.0 / w) * math.atanh(w * r)
    b = math.sqrt(0.25 + A) / c
    a = math.sqrt(2.0 * b + 1.0 / c)
    # d^2 = b - a^2/4 rationalized to avoid cancellation for tiny A
    d2 = A / (c * (2.0 * math.sqrt(0.25 + A) + 1.0))
    d = math.sqrt(d2)
    u = 1.0 / (2.0 * a * b)
    plus = (r + 0.5 * a) ** 2 + d2
    minus = (r - 0.5 * a) ** 2 + d2
    log_term = 0.5 * u * math.log(plus / minus)
    atan_term = math.atan2(2.0 * r * d, (0.5 * a - r) * (0.5 * a + r) + d2) / (4.0 * b * d)
    return (log_term + atan_term) / (c * c)


def _ellipse_integrand(s: float, prof: RayProfile) -> float:
    return 1.0 / (prof.azim + (0.5 - prof.curv * s * s) ** 2)


def _radial_integral(r: float, prof: RayProfile, method: str) -> float:
    """Integral_0^r [1/(1-s^2) + 1/gap(s)] ds by closed form or quadrature."""
    if method == "exact":
        return math.atanh(r) + _ellipse_integral(r, prof)
    if method == "quad":
        f = lambda s: 1.0 / (1.0 - s * s) + _ellipse_integrand(s, prof)
        points = None
        if prof.curv > 0.0:
            dip = math.sqrt(0.5 / prof.curv)
            if dip < r:
                points = [dip]
        val, _ = integrate.quad(f, 0.0, r, epsabs=1e-13, epsrel=1e-13, limit=200, points=points)
        return val
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ScaleValue:
    """Value (and optional gradient) of the radial rescaling at one point."""

    value: float
    gradient: np.ndarray | None = None


def radial_scale(m, method: str = "exact", want_gradient: bool = False) -> ScaleValue:
    """The rescaling g(m) = 1 + r * Integral_0^r (1/(1-s^2) + 1/gap) ds.

    Defined for |m| < 1 outside the excised cut set; raises ``ValueError``
    otherwise.  ``g(0) = 1`` exactly and g is strictly increasing along each
    ray.  The gradient, when requested, combines the radial derivative with
    the ray-constant angular derivatives of the integrand (quadrature for the
    two angular integrals).
    """
    m = np.asarray(m, dtype=float)
    r = float(np.linalg.norm(m))
    if r >= 1.0:
        raise ValueError(f"|m| = {r} is outside the open unit ball")
    if brillouin.in_cut_set(m):
        raise ValueError("m lies on the excised cut set")
    if r == 0.0:
        return ScaleValue(1.0, np.zeros(3) if want_gradient else None)
    j = m / r
    prof = ray_profile(j)
    integral = _radial_integral(r, prof, method)
    value = 1.0 + r * integral
    if not want_gradient:
        return ScaleValue(value)
    # d/dr of r*I(r) along the ray, plus angular (profile) derivatives
    endpoint = 1.0 / (1.0 - r * r) + _ellipse_integrand(r, prof)
    radial = integral + r * endpoint
    grad = radial * j
    mx, my, mz = m
    den = mx * mx + mz * mz
    if den > 0.0:
        gap2 = lambda s: _ellipse_integrand(s, prof) ** 2
        d_azim = -integrate.quad(gap2, 0.0, r, epsabs=1e-12, limit=200)[0]
        d_curv = integrate.quad(
            lambda s: 2.0 * s * s * (0.5 - prof.curv * s * s) * gap2(s), 0.0, r,
            epsabs=1e-12, limit=200,
        )[0]
        u_ratio = (mx * mx - mz * mz) / den
        grad_u = np.array([4.0 * mx * mz * mz, 0.0, -4.0 * mx * mx * mz]) / den**2
        grad_azim = 2.0 * u_ratio * grad_u
        grad_curv = 2.0 * mz * mz / r**4 * m - np.array([0.0, 0.0, 2.0 * mz / r**2])
        grad = grad + r * (d_azim * grad_azim + d_curv * grad_curv)
    return ScaleValue(value, grad)


def _scaled_radius(r: float, prof: RayProfile, method: str = "exact") -> float:
    """G(r) = r * g(r j): the radial part of the deformation along a ray."""
    return r + r * r * _radial_integral(r, prof, method)


def _scaled_radius_slope(r: float, prof: RayProfile) -> float:
    integral = _radial_integral(r, prof, "exact")
    endpoint = 1.0 / (1.0 - r * r) + _ellipse_integrand(r, prof)
    return 1.0 + 2.0 * r * integral + r * r * endpoint


def _invert_scaled_radius(target: float, prof: RayProfile) -> float:
    """Solve G(r) = target on (0, r_max) by safeguarded Newton.

    G is strictly increasing and diverges at r_max, so a bracketed root always
    exists; when the root is closer to r_max than one ulp (targets beyond the
    representable range, |p| of order 20+ on generic rays) the closest
    representable radius is returned.
    """
    if target <= 0.0:
        return 0.0
    hi = np.nextafter(prof.r_max, 0.0)
    if _scaled_radius(hi, prof) <= target:
        return hi
    lo = 0.0
    r = min(target / (1.0 + target), 0.5 * hi)
    for _ in range(200):
        val = _scaled_radius(r, prof) - target
        if abs(val) <= 1e-14 * (1.0 + target):
            break
        if val < 0.0:
            lo = r
        else:
            hi = r
        step = val / _scaled_radius_slope(r, prof)
        r_new = r - step
        if not (lo < r_new < hi):
            r_new = 0.5 * (lo + hi)
        if abs(r_new - r) <= 1e-17 * (1.0 + r):
            r = r_new
            break
        r = r_new
    return r


# ---------------------------------------------------------------------------
# on-shell points and the deformation proper
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OnShellPoint:
    """A point of one dispersion-surface sheet: wave-vector, branch, region."""

    k: np.ndarray
    branch: int
    region: int
    chirality: int

    @property
    def n(self) -> np.ndarray:
        return walk_vector(self.k, self.chirality)

    @property
    def omega(self) -> float:
        lam = float(walk_scalar(self.k, self.chirality))
        return self.branch * float(np.arccos(np.clip(lam, -1.0, 1.0)))

    def four_vector(self) -> np.ndarray:
        """(omega, k) as a plain 4-vector."""
        return np.concatenate([[self.omega], self.k])


def onshell_point(k, branch: int = 1, chi: int = 1) -> OnShellPoint:
    """Validated on-shell point: wraps k, assigns its region, checks the cut set."""
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    k = brillouin.wrap_to_zone(np.asarray(k, dtype=float))
    region = brillouin.classify_region(k, chi)
    if region == brillouin.BOUNDARY:
        raise ValueError("wave-vector lies on a region boundary")
    if brillouin.in_cut_set(walk_vector(k, chi)):
        raise ValueError("n(k) lies on the excised cut set")
    return OnShellPoint(k=k, branch=branch, region=int(region), chirality=chi)


def deformation_map(omega: float, k, chi: int = 1) -> np.ndarray:
    """The raw map (omega, k) -> g(n(k)) * (sin omega, n(k)) without on-shell input."""
    n = walk_vector(k, chi)
    g = radial_scale(n).value
    return np.concatenate([[g * math.sin(omega)], g * n])


def deform(x: OnShellPoint, scale=None) -> np.ndarray:
    """Null four-momentum of an on-shell point.

    Uses sin(omega) = branch * |n(k)| exactly, so the output is null to
    rounding; the sign of p0 is the branch sign.  ``scale`` may be any
    radially monotone positive callable m -> value replacing the built-in
    rescaling (only the built-in ships; the hook exists for exploring other
    members of the symmetry family).
    """
    n = walk_vector(x.k, x.chirality)
    r = float(np.linalg.norm(n))
    g = radial_scale(n).value if scale is None else float(scale(n))
    return np.concatenate([[x.branch * g * r], g * n])


def _invert_generic_scale(target: float, j, scale) -> float:
    """Bracketed bisection for r * scale(r j) = target with a generic scale."""
    top = np.nextafter(1.0, 0.0)
    lo, hi = 0.0, 0.5
    while hi < top and hi * float(scale(hi * j)) < target:
        lo = hi
        hi = min(top, 0.5 * (hi + 1.0) + 0.25 * (1.0 - hi))
    if hi * float(scale(hi * j)) < target:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid * float(scale(mid * j)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def invert_radial(p, scale=None) -> tuple[np.ndarray, float]:
    """Invert the radial rescaling: find m with g(m) m = p-spatial.

    Returns (m, omega) with omega = sign(p0) * arcsin(|m|), the frequency of
    the flat parameterization; region-aware branch lifting happens in
    :func:`invert_deform`.  A custom ``scale`` callable is inverted by
    bracketed bisection along the ray.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError("expected a four-vector")
    spatial = p[1:]
    t = float(np.linalg.norm(spatial))
    if t == 0.0:
        return np.zeros(3), 0.0
    j = spatial / t
    if scale is None:
        r = _invert_scaled_radius(t, ray_profile(j))
    else:
        r = _invert_generic_scale(t, j, scale)
    omega = math.copysign(math.asin(min(r, 1.0)), p[0]) if p[0] != 0.0 else math.asin(r)
    return r * j, omega


def invert_deform(
    p, region: int, chi: int = 1, tol: float = ROUNDTRIP_TOL, scale=None
) -> OnShellPoint:
    """Region-wise inverse of :func:`deform`.

    Checks that p is null, strips the radial rescaling, then solves
    n(k) = m inside ``region`` by damped Newton (seeded from the region's
    doubling-point linearization with multistart fallbacks).  The result is
    verified by re-deforming; failure raises :class:`InversionError`.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError("expected a four-vector")
    if region not in (0, 1, 2, 3):
        raise ValueError(f"bad region {region!r}")
    size = float(np.max(np.abs(p)))
    if abs(p[0] ** 2 - np.sum(p[1:] ** 2)) > NULL_TOL * max(1.0, size**2):
        raise ValueError("four-momentum is not null")
    if size == 0.0:
        center, _ = brillouin.region_center(region, chi)
        return OnShellPoint(
            k=brillouin.wrap_to_zone(center), branch=1, region=region, chirality=chi
        )
    m, _ = invert_radial(p, scale=scale)
    k = brillouin.solve_in_region(m, region, chi)
    if k is None:
        raise InversionError(f"wave-vector solve failed in region {region} for |m|={np.linalg.norm(m):.6f}")
    branch = 1 if p[0] >= 0.0 else -1
    x = OnShellPoint(k=k, branch=branch, region=region, chirality=chi)
    q = deform(x, scale=scale)
    err = float(np.max(np.abs(q - p))) / max(1.0, size)
    if err > tol:
        raise InversionError(f"re-deformed residual {err:.3e} exceeds {tol:.1e}")
    return x


def sample_onshell(
    region: int,
    count: int,
    rng: np.random.Generator,
    chi: int = 1,
    margin: float = 1e-6,
    max_p: float | None = None,
) -> list[OnShellPoint]:
    """Random on-shell points of one region, away from its edges.

    ``margin`` excludes a neighbourhood of the region boundary (where the
    wave-vector map degenerates); ``max_p`` optionally caps the momentum
    magnitude so subsequent boosts stay within the numerically invertible
    range.
    """
    out: list[OnShellPoint] = []
    while len(out) < count:
        ks = brillouin.sample_zone(rng, max(4 * (count - len(out)), 64))
        regs = brillouin.classify_region(ks, chi)
        marg = brillouin.region_margin(ks, chi)
        ks = ks[(regs == region) & (marg > margin)]
        for k in ks:
            if len(out) >= count:
                break
            n = walk_vector(k, chi)
            if brillouin.in_cut_set(n):
                continue
            branch = 1 if rng.random() < 0.5 else -1
            x = OnShellPoint(k=k, branch=branch, region=region, chirality=chi)
            if max_p is not None and float(np.linalg.norm(deform(x)[1:])) > max_p:
                continue
            out.append(x)
    return out
