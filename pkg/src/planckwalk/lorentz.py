"""Lorentz transformations, their spin-1/2 representations, and the nonlinear
region-wise action on the walk's solution space.

A standard transformation T acts on deformed four-momenta; conjugating with
the deformation gives the nonlinear action on on-shell points,

    x  ->  invert_deform( T @ deform(x) ) ,

well defined region by region.  The walk's eigenvalue equation

    [sin(omega) I + n(k) . sigma^chi] psi = 0

is covariant under this relabeling with wave-vector-independent spinor
matrices: the two half-rapidity boost elements exp(+-eta u.sigma/2) (and the
usual half-angle rotation unitaries), paired according to the walk chirality,
with the scalar rescaling ratio carried explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .deformation import InversionError, OnShellPoint, deform, invert_deform, radial_scale
from .walk_core import PAULI, pauli_dot, walk_vector

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])

#: default spinor-intertwining pass tolerance
COVARIANCE_TOL = 1e-7


class BoundaryProximityWarning(UserWarning):
    """The image of a transformed point came close to the excised cut set."""


def boost_matrix(beta) -> np.ndarray:
    """Pure boost with velocity ``beta`` (|beta| < 1): p0' = gamma (p0 - beta.p)."""
    beta = np.asarray(beta, dtype=float)
    b2 = float(beta @ beta)
    if b2 >= 1.0:
        raise ValueError("boost velocity must satisfy |beta| < 1")
    L = np.eye(4)
    if b2 == 0.0:
        return L
    g = 1.0 / math.sqrt(1.0 - b2)
    L[0, 0] = g
    L[0, 1:] = -g * beta
    L[1:, 0] = -g * beta
    L[1:, 1:] += (g - 1.0) * np.outer(beta, beta) / b2
    return L


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Spatial rotation by ``angle`` around unit vector ``axis`` (p0 fixed)."""
    axis = np.asarray(axis, dtype=float)
    nrm = float(np.linalg.norm(axis))
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError("rotation axis must be a unit vector")
    ux, uy, uz = axis
    K = np.array([[0.0, -uz, uy], [uz, 0.0, -ux], [-uy, ux, 0.0]])
    R3 = np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
    T = np.eye(4)
    T[1:, 1:] = R3
    return T


def is_lorentz(T, tol: float = 1e-12) -> bool:
    """Check T^t eta T = eta to ``tol`` in max-norm."""
    T = np.asarray(T, dtype=float)
    return bool(np.max(np.abs(T.T @ MINKOWSKI @ T - MINKOWSKI)) <= tol)


def rotation_spinor(axis, angle: float) -> np.ndarray:
    """Half-angle SU(2) element exp(-i angle axis.sigma / 2); same for both handednesses."""
    axis = np.asarray(axis, dtype=float)
    half = 0.5 * angle
    return math.cos(half) * np.eye(2) - 1j * math.sin(half) * pauli_dot(axis)


def boost_spinor(beta, handedness: str) -> np.ndarray:
    """Hermitian half-rapidity element exp(-+ eta u.sigma / 2).

    ``handedness`` "left" takes the minus sign, "right" the plus sign; the two
    are related by Lambda_right = (Lambda_left^dag)^-1.
    """
    if handedness not in ("left", "right"):
        raise ValueError("handedness must be 'left' or 'right'")
    beta = np.asarray(beta, dtype=float)
    b = float(np.linalg.norm(beta))
    if b >= 1.0:
        raise ValueError("boost velocity must satisfy |beta| < 1")
    if b == 0.0:
        return np.eye(2, dtype=complex)
    eta = math.atanh(b)
    sgn = -1.0 if handedness == "left" else 1.0
    u = beta / b
    return math.cosh(0.5 * eta) * np.eye(2) + sgn * math.sinh(0.5 * eta) * pauli_dot(u)


def _rotation_quaternion(R3) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a 3x3 rotation matrix (Shepperd's method)."""
    m = np.asarray(R3, dtype=float)
    tr = float(np.trace(m))
    q = np.empty(4)
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q[:] = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    else:
        i = int(np.argmax(np.diag(m)))
        j, l = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(m[i, i] - m[j, j] - m[l, l] + 1.0, 0.0)) * 2.0
        q[0] = (m[l, j] - m[j, l]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + l] = (m[l, i] + m[i, l]) / s
    return q / np.linalg.norm(q)


def polar_decompose(T) -> tuple[np.ndarray, np.ndarray, float]:
    """Split a proper orthochronous T into boost velocity, rotation axis and angle.

    T = boost_matrix(beta) @ rotation_matrix(axis, angle); the boost part is
    read off the first column of T, the rotation via its quaternion.
    """
    T = np.asarray(T, dtype=float)
    if T[0, 0] <= 0.0:
        raise ValueError("expected an orthochronous transformation")
    beta = -T[1:, 0] / T[0, 0]
    R = boost_matrix(-beta) @ T
    w, *xyz = _rotation_quaternion(R[1:, 1:])
    v = np.array(xyz)
    vn = float(np.linalg.norm(v))
    angle = 2.0 * math.atan2(vn, w)
    axis = v / vn if vn > 0.0 else np.array([0.0, 0.0, 1.0])
    return beta, axis, angle


def spinor_of_matrix(T, handedness: str) -> np.ndarray:
    """Spin-1/2 representative of a proper orthochronous T (up to overall sign)."""
    beta, axis, angle = polar_decompose(T)
    return boost_spinor(beta, handedness) @ rotation_spinor(axis, angle)


def covariance_pair(T, chi: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """The (Gamma, Gamma_tilde) spinor pair intertwining the walk equation.

    For the sigma walk (chi = +1) the pair is (right, left).  Conjugating the
    transposed walk's eigen-form with sigma_y maps it onto the sigma form, and
    sigma_y M sigma_y = (M^t)^-1 on unit-determinant matrices, so the chi = -1
    pair is the inverse-transposed one with the handedness roles exchanged
    (for pure boosts this reduces to plain transposes).
    """
    right = spinor_of_matrix(T, "right")
    left = spinor_of_matrix(T, "left")
    if chi == 1:
        return right, left
    if chi == -1:
        return np.linalg.inv(left).T, np.linalg.inv(right).T
    raise ValueError("chirality must be +1 or -1")


def _cut_set_margin(m) -> float:
    """Rough distance from m to the excised cut set (plane distance, gated by the radii)."""
    mx, my, mz = m
    plane = min(abs(mx - mz), abs(mx + mz)) / math.sqrt(2.0)
    inner = 2.0 * mx * mx + 2.0 * my * my - 1.0
    outer = 1.0 - 2.0 * mx * mx - my * my
    if inner < 0.0 or outer < 0.0:
        return max(plane, -min(inner, outer))
    return plane


def nonlinear_transform(x: OnShellPoint, T, warn_margin: float = 1e-6) -> OnShellPoint:
    """Region-wise nonlinear action of T: deform, transform, invert in place.

    The output stays in the region of ``x`` and on its dispersion sheet;
    points whose image approaches the excised cut set trigger
    :class:`BoundaryProximityWarning`.
    """
    T = np.asarray(T, dtype=float)
    if not is_lorentz(T, tol=1e-9):
        raise ValueError("transformation does not preserve the Minkowski metric")
    if np.array_equal(T, np.eye(4)):
        return x
    p = T @ deform(x)
    y = invert_deform(p, x.region, x.chirality)
    if _cut_set_margin(y.n) < warn_margin:
        warnings.warn(
            "transformed point lies within margin of the excised cut set",
            BoundaryProximityWarning,
            stacklevel=2,
        )
    return y


@dataclass(frozen=True)
class CovarianceReport:
    """Residual of the observer-change identity at one (k, T, chirality)."""

    residual: float
    tolerance: float
    k_in: np.ndarray
    k_out: np.ndarray
    scalar_ratio: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def eigen_form(x: OnShellPoint) -> np.ndarray:
    """Matrix sin(omega) I + n(k).sigma^chi annihilating the walk eigenvector."""
    n = walk_vector(x.k, x.chirality)
    sin_om = x.branch * float(np.linalg.norm(n))
    return sin_om * np.eye(2, dtype=complex) + pauli_dot(n, x.chirality)


def covariance_check(
    x: OnShellPoint,
    T,
    tol: float = COVARIANCE_TOL,
    swap_pair: bool = False,
) -> CovarianceReport:
    """Verify that the relabeled eigenvalue equation reproduces the original.

    Computes x' = nonlinear_transform(x, T) and the residual of

        E(x) = (f'/f) * Gamma_tilde^-1 E(x') Gamma ,

    where E is the eigen-form matrix and f, f' the radial rescalings at the
    two points.  ``swap_pair`` exchanges Gamma and Gamma_tilde (the pair of
    the opposite walk), which must break the identity for boosts.
    """
    y = nonlinear_transform(x, T)
    f_in = radial_scale(walk_vector(x.k, x.chirality)).value
    f_out = radial_scale(walk_vector(y.k, y.chirality)).value
    gamma, gamma_t = covariance_pair(T, x.chirality)
    if swap_pair:
        gamma, gamma_t = gamma_t, gamma
    lhs = eigen_form(x)
    rhs = (f_out / f_in) * np.linalg.inv(gamma_t) @ eigen_form(y) @ gamma
    residual = float(np.max(np.abs(lhs - rhs)))
    return CovarianceReport(
        residual=residual,
        tolerance=tol,
        k_in=x.k,
        k_out=y.k,
        scalar_ratio=f_out / f_in,
    )


@dataclass(frozen=True)
class OrbitTrace:
    """Sweep of a one-parameter subgroup applied to a single starting point."""

    start: OnShellPoint
    kind: str
    direction: np.ndarray
    params: np.ndarray
    points: list[OnShellPoint]
    residuals: np.ndarray
    failed_at: int | None = None

    @property
    def complete(self) -> bool:
        return self.failed_at is None


def _orbit_transform(kind: str, direction, param: float) -> np.ndarray:
    if kind == "rotation":
        return rotation_matrix(direction, param)
    if kind == "boost":
        return boost_matrix(math.tanh(param) * np.asarray(direction, dtype=float))
    raise ValueError("generator kind must be 'rotation' or 'boost'")


def trace_orbit(
    x0: OnShellPoint,
    kind: str,
    direction,
    steps: int,
    max_param: float,
) -> OrbitTrace:
    """Orbit of ``x0`` under a rotation (angle-uniform) or boost (rapidity-uniform).

    Each point is produced from ``x0`` by the exact group element at that
    parameter, so no error accumulates along the trace.  The residual stored
    per point is the relative mismatch between its re-deformed momentum and
    the transformed one; the trace is truncated at the first inversion
    failure.
    """
    if steps < 2:
        raise ValueError("need at least 2 steps")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    params = np.linspace(0.0, max_param, steps)
    p0 = deform(x0)
    points: list[OnShellPoint] = []
    residuals: list[float] = []
    failed_at = None
    for i, a in enumerate(params):
        T = _orbit_transform(kind, direction, float(a))
        target = T @ p0
        try:
            y = invert_deform(target, x0.region, x0.chirality)
        except InversionError:
            failed_at = i
            break
        points.append(y)
        scale = max(1.0, float(np.max(np.abs(target))))
        residuals.append(float(np.max(np.abs(deform(y) - target))) / scale)
    return OrbitTrace(
        start=x0,
        kind=kind,
        direction=direction,
        params=params[: len(points)],
        points=points,
        residuals=np.array(residuals),
        failed_at=failed_at,
    )
