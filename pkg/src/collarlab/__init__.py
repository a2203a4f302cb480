"""collarlab: local empirical processes in boundary collars of convex bodies.

The package provides exact planar collar geometry, the measures living on
the boundary cylinder, the indexing set classes and their derivative bands,
seeded sampling engines with the normalized local empirical process, and
Monte Carlo verification suites for its Gaussian limit.
"""

from .errors import (
    CollarLabError,
    CovarianceNotPSD,
    DegenerateSolution,
    EmptyPairing,
    EpsTooLarge,
    Infeasible,
    InvalidSchedule,
    NormalUndefinedAtCorner,
    OutsideNeighborhood,
    SkeletonPoint,
    TooManyPoints,
    UnsupportedFamily,
)
from .geometry import (
    BoundaryPoint,
    ConvexBody,
    ConvexPolygon,
    CylinderPoint,
    Disc,
    SignedProjection,
    boundary_distance,
    collar_areas,
    in_neighborhood,
    local_reach,
    magnify,
    magnify_many,
    make_disc,
    neighborhood_area,
    project,
    unit_square,
    unmagnify,
    unmagnify_many,
)
from .regions import (
    BandRegion,
    BoxRegion,
    CylinderRegion,
    EmptyRegion,
    FullRegion,
    GridRegion,
    SliceFnRegion,
    TauImageRegion,
    lower_half,
    sband,
    upper_half,
)
from .measures import (
    BoundaryDensity,
    CollarDensity,
    TwoLevelDensity,
    collar_prob,
    derivative_deficit,
    measure_derivative_check,
    mp_measure,
    mp_total,
    neighborhood_mass,
    q_measure,
    qn_measure,
    tv_distance,
    uniform_density,
)
from .families import (
    DiscElement,
    EllipseBandF,
    EllipseElement,
    IntervalBandsElement,
    PiecewiseConcaveBandF,
    PiecewiseLinearBandF,
    PolygonElement,
    ShiftedDiscFamily,
    SymmDiffElement,
    circle_perturbation_grid,
    d_metric,
    dn_metric,
    element_in_collar,
    hausdorff_gamma,
    tau_image,
)
from .entropy import BracketSet, bracket_cover, shatter_check
from .empirical import (
    GaussianDraw,
    LocalSample,
    ReplicationReport,
    brownian_field,
    make_schedule,
    psi_count,
    q_covariance,
    rep_rng,
    replicate,
    sample_ambient,
    sample_conditional,
    sample_two_stage,
    validate_schedule,
    vn_values,
    z_stat,
)
from .verify import (
    ChangeSetModel,
    DiscFit,
    changeset_counts,
    changeset_loglik,
    excess_mass,
    lens_area,
    min_volume_set,
    statement_a_generic,
    statement_a_statistic,
    statement_b_test,
    sup_functional_test,
    vn_replications,
)

__version__ = "0.1.0"
