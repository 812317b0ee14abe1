"""Centrality measures for multilayer networks."""

from ._core import (
    AdjacencyTensor,
    ConditioningError,
    ConvergenceError,
    DomainError,
    Error,
    NumericError,
    ParseError,
    SizeError,
    builtin_example1,
    dense_expm,
    dense_resolvent,
    effective_diameter,
    einstein,
    exponential_coefficients,
    flatten_index,
    from_edges,
    katz,
    lambda_max,
    load_network,
    parse_edge_list,
    subgraph,
    total_communicability,
    unflatten_index,
)

__all__ = [name for name in dir() if not name.startswith("_")]
