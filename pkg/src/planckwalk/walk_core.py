"""Closed forms for the two isotropic spin-1/2 quantum walks on the BCC lattice.

A single step of the walk acts in wave-vector space as the unitary 2x2 matrix

    A(k) = lam(k) * I - 1j * n(k) . sigma^chi ,

where ``lam`` and the three-vector ``n`` are products of cosines and sines of
the wave-vector components, and ``chi = +1 / -1`` selects the ordinary Pauli
vector ``sigma`` or its transpose.  Everything here uses rescaled lattice
units: the eight nearest-neighbour steps are (+-1, +-1, +-1) and for small
wave-vectors ``n(k) ~ k``.

The eigenphases of ``A(k)`` give the dispersion relation

    cos(omega) = lam(k),   sin(omega)^2 = |n(k)|^2 ,

so ``lam^2 + |n|^2 = 1`` identically.  All functions are pure and accept
batched inputs with shape (..., 3) where that makes sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

#: default tolerance for algebraic identities
ALG_TOL = 1e-12
#: default tolerance for round-trip / decomposition numerics
ROUNDTRIP_TOL = 1e-9


def _check_chirality(chi: int) -> int:
    if chi not in (1, -1):
        raise ValueError(f"chirality must be +1 or -1, got {chi!r}")
    return chi


def _trig(k):
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 3:
        raise ValueError("wave-vector must have 3 components")
    c = np.cos(k)
    s = np.sin(k)
    return (c[..., 0], c[..., 1], c[..., 2], s[..., 0], s[..., 1], s[..., 2])


def walk_scalar(k, chi: int = 1):
    """Identity-component lam(k) of the walk matrix; equals cos(omega)."""
    _check_chirality(chi)
    cx, cy, cz, sx, sy, sz = _trig(k)
    return cx * cy * cz - chi * sx * sy * sz


def walk_vector(k, chi: int = 1):
    """Pauli-component vector n(k) of the walk matrix, shape (..., 3)."""
    _check_chirality(chi)
    cx, cy, cz, sx, sy, sz = _trig(k)
    return np.stack(
        [
            sx * cy * cz + chi * cx * sy * sz,
            cx * sy * cz - chi * sx * cy * sz,
            cx * cy * sz + chi * sx * sy * cz,
        ],
        axis=-1,
    )


def walk_scalar_gradient(k, chi: int = 1):
    """Gradient of ``walk_scalar`` with respect to k, shape (..., 3)."""
    _check_chirality(chi)
    cx, cy, cz, sx, sy, sz = _trig(k)
    return np.stack(
        [
            -(sx * cy * cz + chi * cx * sy * sz),
            -(cx * sy * cz + chi * sx * cy * sz),
            -(cx * cy * sz + chi * sx * sy * cz),
        ],
        axis=-1,
    )


def walk_vector_jacobian(k, chi: int = 1):
    """Jacobian matrix d n_i / d k_j, shape (..., 3, 3).

    All nine entries are again trigonometric monomials, so the matrix is exact
    (no differencing).  Its determinant has the closed form
    ``cos(2 k_y) * walk_scalar(k)``, exposed in :mod:`planckwalk.brillouin`.
    """
    _check_chirality(chi)
    cx, cy, cz, sx, sy, sz = _trig(k)
    row1 = [
        cx * cy * cz - chi * sx * sy * sz,
        -sx * sy * cz + chi * cx * cy * sz,
        -sx * cy * sz + chi * cx * sy * cz,
    ]
    row2 = [
        -sx * sy * cz - chi * cx * cy * sz,
        cx * cy * cz + chi * sx * sy * sz,
        -cx * sy * sz - chi * sx * cy * cz,
    ]
    row3 = [
        -sx * cy * sz + chi * cx * sy * cz,
        -cx * sy * sz + chi * sx * cy * cz,
        cx * cy * cz - chi * sx * sy * sz,
    ]
    return np.stack(
        [np.stack(row1, axis=-1), np.stack(row2, axis=-1), np.stack(row3, axis=-1)],
        axis=-2,
    )


def pauli_dot(v, chi: int = 1):
    """Contraction v . sigma^chi for a real 3-vector (or batch), shape (..., 2, 2)."""
    _check_chirality(chi)
    v = np.asarray(v, dtype=float)
    vx, vy, vz = v[..., 0], chi * v[..., 1], v[..., 2]
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = vz
    out[..., 0, 1] = vx - 1j * vy
    out[..., 1, 0] = vx + 1j * vy
    out[..., 1, 1] = -vz
    return out


def walk_matrix(k, chi: int = 1):
    """Single-step walk matrix A(k) = lam I - 1j n . sigma^chi, shape (..., 2, 2)."""
    lam = walk_scalar(k, chi)
    n = walk_vector(k, chi)
    eye = np.eye(2, dtype=complex)
    return np.asarray(lam)[..., None, None] * eye - 1j * pauli_dot(n, chi)


def extract_walk_vector(A, chi: int = 1, tol: float = ROUNDTRIP_TOL):
    """Recover n from a walk matrix via n . sigma^chi = (1j/2) (A - A^dag).

    Raises ``ValueError`` when the anti-Hermitian part of ``A`` is not a real
    combination of the chosen Pauli vector (identity component or imaginary
    residue above ``tol`` in max-norm).
    """
    _check_chirality(chi)
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError("expected a single 2x2 matrix")
    m = 0.5j * (A - A.conj().T)
    # m is Hermitian by construction; decompose on {I, sigma}
    a0 = 0.5 * np.trace(m)
    coeff = np.array([0.5 * np.trace(m @ PAULI[i]) for i in range(3)])
    residual = max(abs(a0), float(np.max(np.abs(coeff.imag))))
    if residual > tol:
        raise ValueError(
            f"anti-Hermitian part is not in the span of sigma^chi (residual {residual:.3e})"
        )
    n = coeff.real
    n[1] *= chi
    return n


@dataclass(frozen=True)
class DispersionPoint:
    """One point (omega, k) on a branch of the dispersion surface."""

    omega: float
    k: np.ndarray
    branch: int


def dispersion(k, chi: int = 1, branch: int = 1) -> DispersionPoint:
    """Eigenphase omega = branch * arccos(lam(k)) of the walk at ``k``.

    The + branch lies in [0, pi], the - branch is its negative, and
    ``sin(omega)^2 = |n(k)|^2`` holds by construction.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    lam = float(walk_scalar(k, chi))
    omega = branch * float(np.arccos(np.clip(lam, -1.0, 1.0)))
    if omega <= -np.pi:
        omega = np.pi  # the two branches coincide at the conical points
    return DispersionPoint(omega=omega, k=np.asarray(k, dtype=float), branch=branch)


@dataclass(frozen=True)
class UnitSystem:
    """Lattice spacing, time step and maximum mass fixing the physical units."""

    a: float
    tau: float
    mu: float

    def __post_init__(self):
        if self.a <= 0 or self.tau <= 0 or self.mu <= 0:
            raise ValueError("all unit parameters must be positive")


def planck_units(units: UnitSystem) -> tuple[float, float]:
    """Emergent (c, hbar) of the small wave-vector regime: c = a/(sqrt(3) tau), hbar = mu a c."""
    c = units.a / (SQRT3 * units.tau)
    hbar = units.mu * units.a * c
    return c, hbar
