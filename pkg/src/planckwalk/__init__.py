"""Weyl and Dirac quantum walks on the BCC lattice and their nonlinear Lorentz symmetry."""

from .walk_core import (
    DispersionPoint,
    UnitSystem,
    dispersion,
    extract_walk_vector,
    planck_units,
    walk_matrix,
    walk_scalar,
    walk_vector,
    walk_vector_jacobian,
)
from .brillouin import (
    BOUNDARY,
    classify_region,
    doubling_points,
    in_cut_set,
    in_punctured_ball,
    jacobian_det,
    sample_zone,
    solve_in_region,
    verify_arch_inclusion,
    wrap_to_zone,
)
from .deformation import (
    InversionError,
    OnShellPoint,
    ScaleValue,
    deform,
    deformation_map,
    invert_deform,
    invert_radial,
    onshell_point,
    radial_scale,
    sample_onshell,
)
from .lorentz import (
    BoundaryProximityWarning,
    CovarianceReport,
    OrbitTrace,
    boost_matrix,
    boost_spinor,
    covariance_check,
    nonlinear_transform,
    rotation_matrix,
    rotation_spinor,
    spinor_of_matrix,
    trace_orbit,
)
from .dirac import (
    DiracParams,
    dirac_dispersion,
    dirac_equation_residual,
    dirac_matrix,
    mass_shell_residual,
)
from .wavepacket import (
    KGrid,
    Wavepacket,
    evolve,
    gaussian_packet,
    group_velocity,
    measure_packet_velocity,
)

__all__ = [
    "BOUNDARY",
    "BoundaryProximityWarning",
    "CovarianceReport",
    "DiracParams",
    "DispersionPoint",
    "InversionError",
    "KGrid",
    "OnShellPoint",
    "OrbitTrace",
    "ScaleValue",
    "UnitSystem",
    "Wavepacket",
    "boost_matrix",
    "boost_spinor",
    "classify_region",
    "covariance_check",
    "deform",
    "deformation_map",
    "dirac_dispersion",
    "dirac_equation_residual",
    "dirac_matrix",
    "dispersion",
    "doubling_points",
    "evolve",
    "extract_walk_vector",
    "gaussian_packet",
    "group_velocity",
    "in_cut_set",
    "in_punctured_ball",
    "invert_deform",
    "invert_radial",
    "jacobian_det",
    "mass_shell_residual",
    "measure_packet_velocity",
    "nonlinear_transform",
    "onshell_point",
    "planck_units",
    "radial_scale",
    "rotation_matrix",
    "rotation_spinor",
    "sample_onshell",
    "sample_zone",
    "solve_in_region",
    "spinor_of_matrix",
    "trace_orbit",
    "verify_arch_inclusion",
    "walk_matrix",
    "walk_scalar",
    "walk_vector",
    "walk_vector_jacobian",
    "wrap_to_zone",
]

__version__ = "0.1.0"
