"""wkorient: (w,k)-orientations of random hypergraphs.

Decide and construct orientations where every size-h hyperedge marks w
distinct vertices and no vertex is marked more than k times; peel to the
(w,k+1)-core; and predict core size, density, and the sharp orientability
threshold by integrating the peeling process's differential equations.
"""

from .hypergraph import (
    DeterministicConditions,
    Hypergraph,
    Orientation,
    OrientationParams,
    SubsetStats,
    check_deterministic_conditions,
    check_property_A,
    check_property_T,
    expansion_condition,
    read_hypergraph,
    recommended_gamma,
    subset_stats,
    verify_orientation,
    w_density,
    w_induced_subgraph,
    write_hypergraph,
)
from .models import (
    EdgeCountVector,
    RetryBudgetError,
    RngSeed,
    sample_core_model,
    sample_nonuniform_multi,
    sample_truncated_degree_sequence,
    sample_uniform_multi,
    sample_uniform_simple,
)
from .peeling import (
    CoreStatistics,
    ExtensionConflictError,
    PeelResult,
    ProcessTrace,
    core_statistics,
    extend_orientation,
    rancore,
)
from .flow import (
    CutWitness,
    FlowNetwork,
    build_network,
    hakimi_check,
    max_flow,
    min_max_indegree,
    orient,
)
from .poisson import (
    TruncatedPoisson,
    heavy_bucket_fraction,
    initial_conditions,
    poisson_tail,
    poisson_tail_complement,
    solve_lambda,
    truncated_mean_from_rate,
)
from .ode import (
    BracketError,
    CoreStats,
    OdeParams,
    OdeState,
    StiffnessError,
    ThresholdResult,
    Trajectory,
    derivatives,
    find_threshold,
    integrate,
    trajectory_vs_trace,
)

__version__ = "0.1.0"
