"""Para-Kahler-Einstein metrics on cotangent bundles.

Builds, for projective, conformal and Grassmannian-type structures given
in local coordinates, the modified Patterson-Walker metric and its
symplectic partner on T*M, and certifies numerically that the pair is
almost para-Kahler with an Einstein metric.
"""

from .connections import (
    Connection,
    StructureSpec,
    algebraic_bracket,
    christoffel_eval,
    curvature,
    gauge_transform,
    grassmannian_flat,
    levi_civita,
    ricci,
    round_sphere_connection,
    torsion,
    weyl_conformal,
)
from .cotangent import (
    CotangentPoint,
    modified_metric,
    para_complex,
    patterson_walker,
    q_tensor,
    symplectic_form,
    tau_refined,
    tautological,
)
from .errors import (
    ConventionError,
    DegenerateMetricError,
    GeometryError,
    ScenarioError,
    TorsionError,
    UnsupportedStructureError,
)
from .jets import (
    Jet,
    PolyField,
    active_backend,
    available_backends,
    jet_eval,
    jet_space,
)
from .rho import (
    partial_rho,
    rho_closed_form,
    rho_from_ricci,
    rho_generic,
    ricci_type_contraction,
)
from .tensors import GrassBilinear, grassmann_projections, split_sym_alt
from .verify import (
    CheckResult,
    VerificationReport,
    einstein_residual,
    homogeneity_semibasic_check,
    isometry_check,
    para_kahler_check,
    crosscheck_suite,
    run_suite,
)

__version__ = "0.1.0"
