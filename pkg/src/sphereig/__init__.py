"""Neumann Laplace-Beltrami eigenvalues for domains in a hemisphere.

A numerical laboratory built around three solvers:

* a shooting solver for the singular radial eigenproblems of geodesic caps
  on S^N (``cap_spectrum``),
* a P1 finite element solver on stereographic chart domains of S^2 and on
  meridian sections of rotationally symmetric S^3 domains (``mesh``,
  ``fem``, ``eigensolve``),
* an end-to-end verifier for the sharp harmonic-mean inequality
  sum_{i<N} 1/mu_i(Omega) >= (N-1)/mu_1(D_gamma) between a hemisphere
  domain and the geodesic ball of equal volume (``verifier``).
"""

from sphereig.cap_spectrum import (
    CapProblem,
    ExtendedProfile,
    LemmaReport,
    RadialEigenpair,
    check_lemma,
    extend_profile,
    frobenius_coefficient,
    mu1_cap,
    rayleigh_quotient_radial,
    solve_mode,
)
from sphereig.stereographic import (
    ChartPoint,
    SphereVolume,
    TestFunctionSet,
    cap_volume,
    conformal_factor,
    equivalent_radius,
    gradient_identity_check,
    s_from_theta,
    test_function_values,
    theta_from_s,
    unit_ball_volume,
)
from sphereig.mesh import (
    DomainSpec,
    TriangleMesh,
    build_meridian_mesh,
    build_planar_mesh,
    export_mesh,
    mesh_volume,
    refine,
)
from sphereig.fem import (
    AssembledSystem,
    assemble_s2,
    assemble_s3_axisym,
    export_matrix,
    interpolate,
    neumann_spectrum,
)
from sphereig.eigensolve import (
    SparseSymmetric,
    deflate_constants,
    dense_generalized,
    lanczos_shift_invert,
)
from sphereig.verifier import (
    InequalityReport,
    Rotation,
    check_proof_steps,
    corpus,
    find_balancing_rotation,
    load_domain_spec,
    sweep,
    verify_domain,
)

__version__ = "0.1.0"
