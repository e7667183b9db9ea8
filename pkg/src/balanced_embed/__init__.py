"""Balanced measures on connected graphs and their 1-Lipschitz l1 embeddings.

The library revolves around one loop: run the greedy remote-vertex procedure
on a graph's distance matrix, read a balanced probability measure off the
trajectory, verify it (variationally and against brute force at desk scale),
and turn it into an explicit embedding whose guarantees are audited.
"""

__version__ = "0.1.0"

from .embedding import (
    DistortionReport,
    Embedding,
    HyperplaneReport,
    LipschitzReport,
    PCAResult,
    SeparationReport,
    center_project,
    distortion_report,
    drop_small_coordinates,
    drop_to_top,
    embed,
    hyperplane_check,
    lipschitz_audit,
    pca_reduce,
    separation_check,
    support_l1_averages,
)
from .generators import (
    NAMED_GRAPHS,
    GluedPaths,
    PointCloud,
    gen_complete,
    gen_cycle,
    gen_erdos_renyi,
    gen_gaussian_clouds,
    gen_glued_paths,
    gen_grid,
    gen_path,
    gen_star,
    gen_swiss_roll,
    knn_graph,
    load_named,
)
from .graph import (
    BoundarySet,
    DistanceMatrix,
    Graph,
    GraphError,
    IsoperimetricReport,
    all_pairs_distances,
    boundary,
    build_graph,
    default_threads,
    isoperimetric_report,
)
from .greedy import (
    ConvergenceReport,
    Diagnostics,
    GreedyState,
    RunConfig,
    empirical_measure,
    greedy_step,
    init_state,
    run,
)
from .measures import (
    BalanceReport,
    MeasureError,
    RefinementResult,
    UnbalancedMeasureError,
    VertexMeasure,
    brute_force_balanced,
    directional_derivative,
    energy_quadratic,
    energy_quadratic_exact,
    extract_support,
    is_balanced,
    refine_on_support,
    simplex_grid,
    transport_costs,
    transport_costs_exact,
)
from .pipeline import PipelineResult, balanced_measure_pipeline, refine_with_search

__all__ = [name for name in dir() if not name.startswith("_")]
