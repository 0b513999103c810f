"""The massive walk obtained by coupling a walk with its adjoint.

The 4x4 step operator pairs the two internal blocks through a mass parameter,

    D(k) = [[ n A(k),  i m I ],
            [ i m I ,  n A(k)^dag ]],     n^2 + m^2 = 1 ,

which is unitary exactly because the diagonal blocks are mutual adjoints.
Its eigenphases satisfy cos(omega) = n * walk_scalar(k), equivalently the
five-component mass-shell relation

    sin(omega)^2 - (1 - m^2) |n(k)|^2 - m^2 = 0 ,

flat at m = 1 and reducing to the massless dispersion at m = 0.  The
eigenvectors solve the momentum-space Dirac equation in the Weyl
representation with the deformed momentum (and mass) rescaled by the same
radial factor as in the massless theory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deformation import radial_scale
from .walk_core import pauli_dot, walk_matrix, walk_scalar, walk_vector

#: Dirac gamma matrices in the Weyl (chiral) representation
GAMMA = np.zeros((4, 4, 4), dtype=complex)
GAMMA[0, :2, 2:] = np.eye(2)
GAMMA[0, 2:, :2] = np.eye(2)
for _i in range(3):
    _s = np.zeros(3)
    _s[_i] = 1.0
    GAMMA[_i + 1, :2, 2:] = pauli_dot(_s)
    GAMMA[_i + 1, 2:, :2] = -pauli_dot(_s)


@dataclass(frozen=True)
class DiracParams:
    """Unitarity-constrained coupling pair: n^2 + m^2 = 1 with 0 <= n, m <= 1."""

    n: float
    m: float

    def __post_init__(self):
        if not (0.0 <= self.n <= 1.0 and 0.0 <= self.m <= 1.0):
            raise ValueError("parameters must lie in [0, 1]")
        if abs(self.n**2 + self.m**2 - 1.0) > 1e-12:
            raise ValueError("parameters must satisfy n^2 + m^2 = 1")

    @classmethod
    def from_mass(cls, m: float) -> "DiracParams":
        return cls(n=math.sqrt(max(0.0, 1.0 - m * m)), m=m)


def dirac_matrix(k, params: DiracParams, chi: int = 1) -> np.ndarray:
    """The 4x4 step matrix; unitary for any valid parameters."""
    A = walk_matrix(k, chi)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = params.n * A
    out[2:, 2:] = params.n * A.conj().T
    out[:2, 2:] = 1j * params.m * np.eye(2)
    out[2:, :2] = 1j * params.m * np.eye(2)
    return out


def dirac_eigensystem(k, params: DiracParams, chi: int = 1):
    """Eigenphases (sorted ascending) and eigenvectors of the step matrix."""
    vals, vecs = np.linalg.eig(dirac_matrix(k, params, chi))
    phases = np.angle(vals)
    order = np.argsort(phases)
    return phases[order], vecs[:, order]


def dirac_dispersion(k, params: DiracParams, chi: int = 1) -> np.ndarray:
    """The four eigenphases in (-pi, pi], each a root of the mass-shell relation."""
    return dirac_eigensystem(k, params, chi)[0]


def mass_shell_residual(omega, k, m: float, chi: int = 1):
    """sin(omega)^2 - (1 - m^2) |n(k)|^2 - m^2; zero on dispersion points.

    At m = 0 this reduces to the massless null-norm relation.  The relation is
    the norm conserved by the symmetry group mixing frequency, wave-vector and
    mass (a de Sitter group in the flat parameterization).
    """
    omega = np.asarray(omega, dtype=float)
    n = walk_vector(k, chi)
    n2 = np.sum(n * n, axis=-1)
    return np.sin(omega) ** 2 - (1.0 - m * m) * n2 - m * m


def deformed_momentum(omega: float, k, m: float, chi: int = 1) -> tuple[np.ndarray, float]:
    """Deformed four-momentum and rescaled mass entering the Dirac equation.

    The spatial part of the bare momentum is sqrt(1-m^2) n(k); the whole
    five-component object (p0, p, m) is rescaled by the radial factor
    evaluated at that spatial part, so the massless limit reproduces the
    massless deformation exactly.
    """
    nu = math.sqrt(max(0.0, 1.0 - m * m))
    spatial = nu * walk_vector(k, chi)
    g = radial_scale(spatial).value
    p = np.concatenate([[g * math.sin(omega)], g * spatial])
    return p, g * m


def dirac_equation_residual(omega: float, k, m: float, psi, chi: int = 1) -> float:
    """Norm of [p_mu gamma^mu - m I] psi with the deformed momentum and mass.

    Vanishes on eigenvectors of the step matrix at on-shell (omega, k); the
    index contraction uses the metric (+,-,-,-).
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError("expected a 4-component spinor")
    p, m_eff = deformed_momentum(omega, k, m, chi)
    slash = p[0] * GAMMA[0] - p[1] * GAMMA[1] - p[2] * GAMMA[2] - p[3] * GAMMA[3]
    return float(np.linalg.norm((slash - m_eff * np.eye(4)) @ psi))
