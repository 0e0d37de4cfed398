"""ctdopt: canonical tensor decompositions, rank reduction, max-entry search,
and separated-representation global optimization."""

__version__ = "0.1.0"

from .ctd import (
    CTD,
    add,
    eval_entries,
    eval_entry,
    frobenius_norm,
    from_json,
    hadamard,
    inner,
    load_ctd,
    ones_ctd,
    random_ctd,
    renormalize,
    save_ctd,
    scale,
    spike_ctd,
    to_dense,
    to_json,
    zero_ctd,
)

from .reduction import (
    RankOneApprox,
    ReductionConfig,
    ReductionResult,
    als_sweep,
    interpolative_reduce,
    norm_of_difference,
    rank_one_approx,
    reduce,
    s_norm,
)
from .maxentry import (
    Candidate,
    DegenerateIterateError,
    FixedIterations,
    IterationRecord,
    LambdaStall,
    MaxEntrySearchConfig,
    MaxEntryTrace,
    RankThreshold,
    extract_candidates,
    iteration_bound,
    power_method_max,
    squaring_max,
)
from .sepfunc import (
    AckleyParams,
    ExpansionError,
    GaussianExpansion,
    Grid,
    OptimizationReport,
    SeparatedFunction,
    ackley_eval,
    ackley_gradient,
    ackley_separated,
    build_cosine_grid,
    build_gaussian_expansion,
    build_radial_grid,
    certify_expansion,
    compass_search,
    index_to_point,
    merge_grids,
    optimize_function,
    sample_to_ctd,
)
from .experiments import (
    ExperimentConfig,
    max_entry_file,
    parse_termination,
    reduce_file,
    run_ackley,
    run_compare,
    run_demo_convergence,
    run_demo_two_maxima,
    termination_to_string,
)
