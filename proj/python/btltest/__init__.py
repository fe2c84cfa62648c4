"""Hypothesis testing for Bradley-Terry-Luce structure in pairwise comparison data."""

from btltest._core import (  # noqa: F401
    BtlError,
    ComparisonDataset,
    MarkovChain,
    ObservationGraph,
    PairwiseModel,
    StationaryDistribution,
    TestConfig,
    TestReport,
    ThresholdKind,
    adjacency_second_eigenvalue,
    analytic_threshold,
    borda_counts,
    btl_distance,
    btl_model,
    canonical_markov,
    circulant_expander,
    complete_graph,
    constant_margin_model,
    cycle_shuffle,
    cyclic_model,
    decide,
    degree_stats,
    dtm_edge_expansion,
    dtm_sigma2,
    dynamic_range,
    edge_expansion_exact,
    empirical_chain,
    erdos_renyi,
    load_aggregated_csv,
    load_matches_csv,
    lower_bound_model,
    lower_bound_separation_squared,
    lower_bound_stationary,
    permutation_threshold,
    principal_ratio,
    residual_decomposition,
    run_test,
    sample_dataset,
    separation,
    skew_shuffle,
    stability_model,
    stationary,
    test_statistic,
    uniform_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
