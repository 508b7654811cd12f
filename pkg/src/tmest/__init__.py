"""Traffic matrix estimation from link loads under a distribution constraint."""

from .dist import (
    BetaAlphaOne,
    PowerLawCdf,
    TabulatedCdf,
    Uniform01,
    beta_alpha_one_sample,
    fit_alpha_mle,
    ks_distance,
    make_rng,
    normalized_cdf_of_max_ratio,
    sample_normalized_power_law,
    tabulated_from_sample,
)
from .errors import (
    DegenerateCandidate,
    DegenerateSample,
    DimensionMismatch,
    EmptyMask,
    InsufficientData,
    MalformedWeights,
    QuadratureFailure,
    TmestError,
    UnknownPair,
    UnreachablePair,
    ZeroLoadNorm,
    ZeroRow,
    ZeroTruth,
)
from .evaluate import (
    EvalReport,
    GanEstimator,
    OracleEstimator,
    ProjDEstimator,
    nmae,
    rmse,
    run_experiment,
)
from .gan import (
    GanEstimateConfig,
    GeneratorNet,
    gan_estimate,
    generator_forward,
    load_generator,
    loss_and_latent_gradient,
    save_generator,
)
from .projection import (
    ProjDConfig,
    SnapReport,
    cyclic_projection_solve,
    kaczmarz_project_row,
    optimal_lambda,
    proj_d_estimate,
    snap_to_distribution,
)
from .topology import (
    Link,
    RoutingMatrix,
    SupportSet,
    Topology,
    all_pairs,
    build_routing_matrix,
    from_edges,
    read_support,
    read_topology,
    shortest_paths,
    support_from_names,
    write_support,
    write_topology,
)
from .traffic import (
    LinkLoadVector,
    TrafficVector,
    read_loads,
    read_tm,
    residual,
    simulate_loads,
    write_loads,
    write_tm,
)

__version__ = "0.1.0"
