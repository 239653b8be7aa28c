"""Canonical simultaneous block diagonalization for cluster-synchronization
stability analysis of networks."""

__version__ = "0.1.0"

from .graph import (
    EdgeListError,
    EdgeParam,
    Network,
    PlantedInfeasibleError,
    generate_planted,
    largest_connected_component,
    load_edge_list,
    network_from_json,
    network_to_json,
    save_edge_list,
    unweighted_copy,
)
from .partition import (
    IndicatorSet,
    NotEquitableError,
    Partition,
    build_indicators,
    check_equitable,
    coarsest_equitable_partition,
    partition_from_cells,
    quotient_spectrum,
)
from .commutant import (
    CommutantBasis,
    CommutantElement,
    CommutantProblem,
    NullspaceError,
    assemble_problem,
    nullspace,
    sample_element,
)
from .transform import (
    BlockTuple,
    CanonicalityError,
    CanonicalTransform,
    block_report,
    block_tuples,
    build_transform,
    canonical_pipeline,
    parameter_count,
    verify_canonical,
)
from .stability import (
    DynamicsSpec,
    TrajectoryParams,
    dynamics_preset,
    full_variational_rhs,
    quotient_integrate,
    transformed_variational_rhs,
    transverse_exponents,
)
from .sensitivity import SensitivityReport, sensitivity
from .bench import BenchRecord, baseline_sbd, run_bench
