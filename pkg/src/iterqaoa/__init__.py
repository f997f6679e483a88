"""Iterative warm-started QAOA simulations for MaxCut and discrete
minimum-variance portfolio optimization."""

__version__ = "0.1.0"

from .statevector import (
    DiagonalCost,
    MeasurementDistribution,
    StateVector,
    TwoLevelRotation,
    apply_diagonal_phase,
    apply_two_level_rotation,
    apply_x_mixer,
    expectation_diagonal,
    init_basis_state,
    init_superposition,
    init_uniform,
    sample,
)
from .graphs import (
    EdgeSubgraphClass,
    Graph,
    brute_force_maxcut,
    classify_edge_subgraphs,
    gen_random_cubic,
    gen_worst_case_graph,
    maxcut_cost,
)
from .portfolio import (
    PortfolioInstance,
    WeightVector,
    brute_force_extrema,
    classical_cost,
    classical_sampler_prob,
    enumerate_feasible,
    gen_instance,
)
from .ansatz import (
    MixerSchedule,
    QaoaParams,
    alpha_g6_landscape,
    apply_qaoa,
    build_dgmvp_cost,
    build_maxcut_cost,
    build_nn_mixer,
    maxbias_state,
)
from .optimizer import ObjectiveSpec, OptimizationResult, dual_annealing, estimate_expectation
from .warmstart import (
    AnsatzSpec,
    IterationRecord,
    RankedOutcomes,
    WarmStartConfig,
    build_order_statistic_state,
    build_percentile_state,
    dgmvp_problem,
    maxcut_problem,
    rank_outcomes,
    run_iterative,
    state_distance,
)
from .metrics import (
    PowerLawFit,
    alpha_mean,
    alpha_min_and_pmin,
    convergence_P,
    fit_power_law,
    ratio_r,
    relative_change_R,
)
