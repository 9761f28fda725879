"""Projective geometry over R and C: collineation and symmetry lifts.

A ray map that preserves lines lifts to a semi-linear map (unique up to a
scalar); one that preserves transition probabilities lifts to a unitary or
anti-unitary operator (unique up to a phase).
"""

from projsym.artin_lift import (
    LiftDiagnostics,
    SemiLinearMap,
    Sigma,
    apply_semilinear,
    detect_automorphism,
    lift_collineation,
    scalar_align,
)
from projsym.errors import *  # noqa: F401,F403
from projsym.projective_core import (
    Field,
    ProjectiveSubspace,
    Ray,
    collinear,
    contains,
    is_projective_frame,
    join,
    projectively_independent,
    ray_from_vector,
    rays_equal,
    transition_probability,
)
from projsym.ray_maps import (
    MatrixInduced,
    OracleMap,
    RayMap,
    Tabulated,
    VerificationReport,
    Witness,
    check_collineation,
    check_quasi_unitary,
    probe_images,
    probe_set,
)
from projsym.wigner_lift import (
    Kind,
    SemiUnitary,
    SymmetryCertificate,
    classify,
    lift_symmetry,
    phase_align,
    verify_compatibility,
)

__version__ = "0.1.0"
