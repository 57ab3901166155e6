"""Valiron renormalization for hyperbolic self-maps of the Siegel domain.

Solves the Schroder equation sigma(phi(q)) = lambda sigma(q) by
renormalizing forward orbits, together with the invariant geometry
(Kobayashi distance, horoballs, Koranyi regions) and boundary-limit
estimators (K-, E- and E0-limits) that frame the construction.
"""

from .dynamics import (
    SequenceClassification,
    classify_sequence,
    compute_orbit,
    estimate_drift,
    estimate_multiplier,
    summarize_orbit,
)
from .geometry import (
    INFINITY,
    BallPoint,
    BoundaryDirection,
    DomainError,
    KoranyiRegion,
    LinearProjectionAtInfinity,
    SiegelAutomorphism,
    SiegelPoint,
    cayley_to_ball,
    cayley_to_siegel,
    first_coordinate_projection,
    halfplane_distance,
    horoball_value,
    kobayashi_distance,
    koranyi_contains,
    koranyi_margin,
    left_inverse_value,
    project,
    siegel_height,
)
from .limits import (
    ApproachFamily,
    LimitVerdict,
    c_special_family,
    e0_limit,
    e_limit,
    estimate_limit,
    generate_sequences,
    jwc_check,
    k_limit,
    koranyi_family,
    left_inverse_ratio_check,
    projection_invariance_check,
    radial_family,
    zero_special_family,
)
from .maps import (
    HoloMap,
    PsiChoice,
    ScaleOverflowError,
    catalog,
    conjugate_map,
    iterate,
    make_ball_map_from_siegel,
    make_halfplane_affine,
    make_siegel_linear,
    make_siegel_map_from_ball,
    make_valiron_example,
    validate_self_map,
)
from .renorm import (
    EvaluationGrid,
    ValironResult,
    ball_side_theta,
    conjugation_transport,
    default_grid,
    run_valiron,
    schroder_residual,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "ApproachFamily",
    "BallPoint",
    "BoundaryDirection",
    "DomainError",
    "EvaluationGrid",
    "HoloMap",
    "KoranyiRegion",
    "LimitVerdict",
    "LinearProjectionAtInfinity",
    "PsiChoice",
    "ScaleOverflowError",
    "SequenceClassification",
    "SiegelAutomorphism",
    "SiegelPoint",
    "ValironResult",
    "ball_side_theta",
    "c_special_family",
    "catalog",
    "cayley_to_ball",
    "cayley_to_siegel",
    "classify_sequence",
    "compute_orbit",
    "conjugate_map",
    "conjugation_transport",
    "default_grid",
    "e0_limit",
    "e_limit",
    "estimate_drift",
    "estimate_limit",
    "estimate_multiplier",
    "first_coordinate_projection",
    "generate_sequences",
    "halfplane_distance",
    "horoball_value",
    "iterate",
    "jwc_check",
    "k_limit",
    "kobayashi_distance",
    "koranyi_contains",
    "koranyi_family",
    "koranyi_margin",
    "left_inverse_ratio_check",
    "left_inverse_value",
    "make_ball_map_from_siegel",
    "make_halfplane_affine",
    "make_siegel_linear",
    "make_siegel_map_from_ball",
    "make_valiron_example",
    "project",
    "projection_invariance_check",
    "radial_family",
    "run_valiron",
    "schroder_residual",
    "siegel_height",
    "summarize_orbit",
    "validate_self_map",
    "zero_special_family",
]
