"""Inference over tree-structured belief networks stored as low-rank sensitivities."""

from ._core import (
    BeliefNetwork,
    ClusterPlan,
    EngineStats,
    QuerySession,
    SensnetError,
    TreeNetwork,
    Variable,
    bench,
    binary_reverse,
    binary_sensitivity,
    check_plan,
    compile,
    compile_tree_shaped,
    cpt_to_sensitivity,
    load_network,
    load_plan,
    load_tree,
    numerical_rank,
    parse_network,
    parse_tree,
    plan_clusters,
    posterior,
    qr_factor,
    reverse_sensitivity,
    run_cli,
    sensitivity_to_cpt,
    truncated_query,
    truncation_radius,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
