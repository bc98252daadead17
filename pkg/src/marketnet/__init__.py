"""marketnet: correlation networks from end-of-day stock prices.

Pipeline: EoD CSV -> aligned close-price panel -> returns -> Pearson
correlation matrix (pairwise-complete) -> thresholded company graph ->
structure queries, visualization exports, and forecast-transfer validation.
"""

from .correlation import (
    CorrelationMatrix,
    PairCorrelation,
    correlation_matrix,
    matrix_to_csv,
    pairs_to_csv,
    pearson,
    top_pairs,
)
from .errors import (
    CliqueLimitError,
    ConfigError,
    DataError,
    InternalError,
    ParseError,
    ToolError,
    UnknownSymbolError,
)
from .export import (
    EXPORT_FORMATS,
    export_graph,
    parse_edge_csv,
    to_dot,
    to_edge_csv,
    to_gexf,
    to_graphml,
)
from .ingest import (
    ColumnSchema,
    EodRow,
    PriceHistoryTable,
    PricePanel,
    build_panel,
    load_history,
    panel_to_csv,
    parse_eod,
    prune_universe,
    read_panel_csv,
    table_to_csv,
)
from .network import (
    CompanyGraph,
    GraphSummary,
    build_from_edge_list,
    build_graph,
    connected_components,
    degree_and_clustering,
    hop_distances,
    load_attributes,
    maximal_cliques,
    neighborhood,
    with_attributes,
)
from .returns import ReturnsPanel, compute_returns, returns_to_csv
from .transfer import (
    ErrorReport,
    Forecaster,
    TransferResult,
    evaluate,
    fit_forecaster,
    transfer_experiment,
    report_to_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CliqueLimitError",
    "ColumnSchema",
    "CompanyGraph",
    "ConfigError",
    "CorrelationMatrix",
    "DataError",
    "EodRow",
    "ErrorReport",
    "EXPORT_FORMATS",
    "Forecaster",
    "GraphSummary",
    "InternalError",
    "PairCorrelation",
    "ParseError",
    "PriceHistoryTable",
    "PricePanel",
    "ReturnsPanel",
    "ToolError",
    "TransferResult",
    "UnknownSymbolError",
    "build_from_edge_list",
    "build_graph",
    "build_panel",
    "compute_returns",
    "connected_components",
    "correlation_matrix",
    "degree_and_clustering",
    "evaluate",
    "export_graph",
    "fit_forecaster",
    "hop_distances",
    "load_attributes",
    "load_history",
    "matrix_to_csv",
    "maximal_cliques",
    "neighborhood",
    "pairs_to_csv",
    "panel_to_csv",
    "parse_edge_csv",
    "parse_eod",
    "pearson",
    "prune_universe",
    "read_panel_csv",
    "report_to_csv",
    "returns_to_csv",
    "table_to_csv",
    "to_dot",
    "to_edge_csv",
    "to_gexf",
    "to_graphml",
    "top_pairs",
    "transfer_experiment",
    "with_attributes",
]
