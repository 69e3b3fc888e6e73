"""Augmented trees of iterated function systems and Lipschitz equivalence of their attractors."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AugtreeError,
    CapExceeded,
    DimensionMismatch,
    InvariantViolation,
    SpecError,
    UndecidedEdge,
)
from .similitude import (  # noqa: E402
    IFS,
    Similitude,
    affine_1d,
    compose,
    enumerate_level,
    level_membership,
    load_ifs,
    loads_ifs,
    maps_equal,
)
from .geometry import EdgeDecision, Hull, cylinder_hull, decide_edge, dist_bound, invariant_hull  # noqa: E402
from .tree import Component, Snapshot, build_snapshot, components_at, offspring_components, to_dot  # noqa: E402
from .quotient import build_quotient, degree_profile, has_coincidences, reduce_to_tree  # noqa: E402
from .classification import (  # noqa: E402
    ClassTable,
    ConjugacyCertificate,
    classify,
    conjugacy_equivalent,
    tree_isomorphism_by_B,
)
from .rearrange import (  # noqa: E402
    RearrangeabilityVerdict,
    RearrangingMatrix,
    is_rearrangeable,
    lift_certificate,
    necessary_check,
    solve_row,
    validate_certificate,
    wlog_power,
)
from .hyperbolic import (  # noqa: E402
    build_near_isometry,
    canonical_geodesic,
    delta_observed,
    graph_distance,
    gromov_product,
    horizontal_geodesic_bound,
    verify_near_isometry,
    visual_metric,
)
from .analysis import (  # noqa: E402
    disconnectedness_profile,
    hausdorff_dimension,
    lipschitz_report,
    spectral_radius,
)

__all__ = [name for name in dir() if not name.startswith("_")]
