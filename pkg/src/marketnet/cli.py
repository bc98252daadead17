"""Command-line pipeline: prices -> returns -> correlation -> graph -> analysis.

Subcommands: ``ingest``, ``correlate``, ``graph``, ``transfer``, and
``pipeline`` (all of them in order). Every subcommand is deterministic for
identical inputs and settings: artifacts carry no timestamps, and internal
parallelism (``--threads``) cannot change a single output byte.

Exit codes: 0 success, 1 data error (code on stderr), 2 usage/config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import correlation, export, ingest, network, returns, transfer
from .config import (
    PipelineConfig,
    apply_settings,
    load_config,
    parse_column_mapping,
    parse_symbol_list,
    validate,
)
from .errors import ConfigError, DataError, ToolError

log = logging.getLogger("marketnet")


def _effective_threads(config: PipelineConfig) -> int:
    return config.threads if config.threads > 0 else (os.cpu_count() or 1)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(config: PipelineConfig) -> int:
    config.require("input")
    schema = config.column_schema()
    input_path = Path(config.input)
    source_files = (
        sorted(input_path.glob("*.csv")) if input_path.is_dir() else [input_path]
    )
    table = ingest.load_history([input_path], schema, date_format=config.date_format)
    log.info("parsed %d tickers, %d rows", len(table.tickers), table.n_rows)
    if config.window_start is not None:
        table = ingest.prune_universe(
            table, config.window_start, config.window_end, config.exclude_symbols
        )
        log.info("universe after pruning: %d tickers", len(table.tickers))
    panel = ingest.build_panel(table, config.calendar_policy)

    _write(config.artifact(config.panel, "panel.csv"), ingest.panel_to_csv(panel))
    manifest = {
        "command": "ingest",
        "inputs": [
            {"path": str(p), "sha256": _sha256(p), "bytes": p.stat().st_size}
            for p in source_files
        ],
        "tickers": len(panel.tickers),
        "rows": table.n_rows,
        "calendar": {
            "start": panel.calendar[0].isoformat(),
            "end": panel.calendar[-1].isoformat(),
            "length": len(panel.calendar),
        },
        "settings": {
            "window_start": config.window_start.isoformat() if config.window_start else None,
            "window_end": config.window_end.isoformat() if config.window_end else None,
            "exclude_symbols": list(config.exclude_symbols),
            "date_format": config.date_format,
            "calendar_policy": config.calendar_policy,
        },
    }
    _write(
        Path(config.out_dir) / "manifest.json",
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    )
    return 0


def _read_panel(config: PipelineConfig) -> ingest.PricePanel:
    panel_path = config.artifact(config.panel, "panel.csv")
    if not panel_path.exists():
        raise DataError(f"panel file not found: {panel_path} (run 'marketnet ingest' first)")
    return ingest.read_panel_csv(panel_path.read_bytes())


def cmd_correlate(config: PipelineConfig) -> int:
    panel = _read_panel(config)
    rets = returns.compute_returns(panel, config.returns_mode)
    if config.returns_out:
        _write(Path(config.returns_out), returns.returns_to_csv(rets))
    matrix = correlation.correlation_matrix(
        rets, config.min_overlap, threads=_effective_threads(config)
    )
    defined = sum(1 for _ in matrix.defined_pairs())
    if defined == 0:
        print(
            f"warning: no ticker pair has {config.min_overlap} overlapping "
            "observations; all off-diagonal coefficients are undefined",
            file=sys.stderr,
        )
    log.info("correlation matrix: %d tickers, %d defined pairs", len(matrix.tickers), defined)
    _write(config.artifact(config.matrix_out, "matrix.csv"), correlation.matrix_to_csv(matrix))
    _write(config.artifact(config.pairs_out, "pairs.csv"), correlation.pairs_to_csv(matrix))
    return 0


def _read_graph(config: PipelineConfig) -> network.CompanyGraph:
    pairs_path = config.artifact(config.pairs or config.pairs_out, "pairs.csv")
    if not pairs_path.exists():
        raise DataError(
            f"pairs file not found: {pairs_path} (run 'marketnet correlate' first)"
        )
    edges = export.parse_edge_csv(pairs_path.read_bytes())
    qualifying = [e for e in edges if e[2] > config.threshold]
    return network.build_from_edge_list(qualifying, config.threshold)


def _summary_text(graph: network.CompanyGraph, config: PipelineConfig) -> str:
    summary = network.degree_and_clustering(graph)
    components = network.connected_components(graph)
    cliques = network.maximal_cliques(
        graph, config.min_clique_size, config.max_cliques
    ) if graph.edge_count else ()
    by_degree = sorted(graph.nodes, key=lambda t: (-graph.degree(t), t))[:10]
    lines = [
        f"threshold: {graph.threshold!r}",
        f"nodes: {summary.node_count}",
        f"edges: {summary.edge_count}",
        f"components: {summary.component_count}",
        "component sizes: " + (", ".join(map(str, summary.component_sizes)) or "-"),
        f"triangles: {summary.triangle_count}",
        f"clustering coefficient: {summary.clustering_coefficient!r}",
        "degree histogram: "
        + (", ".join(f"{d}:{c}" for d, c in summary.degree_histogram) or "-"),
        "top degree: "
        + (", ".join(f"{t} ({graph.degree(t)})" for t in by_degree) or "-"),
        f"maximal cliques (size >= {config.min_clique_size}): {len(cliques)}",
    ]
    for clique in cliques[:10]:
        lines.append("  " + " ".join(clique))
    return "\n".join(lines) + "\n"


def cmd_graph(config: PipelineConfig) -> int:
    graph = _read_graph(config)
    if config.attributes:
        graph = network.with_attributes(
            graph, network.load_attributes(Path(config.attributes).read_bytes())
        )
    log.info("graph: %d nodes, %d edges", graph.node_count, graph.edge_count)
    extension = export.FORMAT_EXTENSIONS[config.format]
    out_path = config.artifact(config.graph_out, f"graph.{extension}")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(export.export_graph(graph, config.format))
    log.info("wrote %s", out_path)
    _write(Path(config.out_dir) / "summary.txt", _summary_text(graph, config))
    return 0


def cmd_transfer(config: PipelineConfig) -> int:
    config.require("source", "targets")
    panel = _read_panel(config)
    rets = returns.compute_returns(panel, config.returns_mode)
    graph = _read_graph(config)
    results = transfer.transfer_experiment(
        rets,
        graph,
        config.source,
        list(config.targets),
        window=config.window,
        split=config.split,
        threads=_effective_threads(config),
    )
    for result in results:
        hop = "inf" if result.hop_distance == math.inf else str(result.hop_distance)
        log.info(
            "%s: rmse=%.6g mae=%.6g hops=%s",
            result.report.target, result.report.rmse, result.report.mae, hop,
        )
    _write(config.artifact(config.transfer_out, "transfer.csv"), transfer.report_to_csv(results))
    return 0


def cmd_pipeline(config: PipelineConfig) -> int:
    cmd_ingest(config)
    cmd_correlate(config)
    cmd_graph(config)
    if config.source and config.targets:
        cmd_transfer(config)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="flat key=value config file")
    parser.add_argument("--out-dir", metavar="DIR", help="artifact directory (default: out)")
    parser.add_argument("--threads", type=int, metavar="N", help="worker threads (0 = all cores)")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketnet",
        description="Build and analyze a correlation network from end-of-day stock prices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse, prune, and align EoD prices into a panel")
    p_ingest.add_argument("--input", metavar="PATH", help="EoD CSV file or directory of per-ticker CSVs")
    p_ingest.add_argument("--window-start", metavar="DATE", help="analysis window start (ISO)")
    p_ingest.add_argument("--window-end", metavar="DATE", help="analysis window end (ISO)")
    p_ingest.add_argument("--exclude", metavar="SYMS", help="comma-separated symbols to drop")
    p_ingest.add_argument("--date-format", metavar="FMT", help="strptime format of the data's date column")
    p_ingest.add_argument("--calendar-policy", choices=("union", "intersection"))
    p_ingest.add_argument("--columns", metavar="MAP", help="column mapping, e.g. ticker=Symbol,close=Close")

    p_corr = sub.add_parser("correlate", help="compute returns and the correlation matrix")
    p_corr.add_argument("--panel", metavar="PATH", help="panel CSV (default: <out-dir>/panel.csv)")
    p_corr.add_argument("--returns-mode", choices=("simple", "diff", "log"))
    p_corr.add_argument("--min-overlap", type=int, metavar="N")
    p_corr.add_argument("--matrix-out", metavar="PATH")
    p_corr.add_argument("--pairs-out", metavar="PATH")
    p_corr.add_argument("--returns-out", metavar="PATH", help="also dump the returns panel CSV")

    p_graph = sub.add_parser("graph", help="build the thresholded graph, export it, summarize it")
    p_graph.add_argument("--pairs", metavar="PATH", help="pairs CSV (default: <out-dir>/pairs.csv)")
    p_graph.add_argument("--threshold", type=float, metavar="T")
    p_graph.add_argument("--format", choices=export.EXPORT_FORMATS)
    p_graph.add_argument("--min-clique-size", type=int, metavar="K")
    p_graph.add_argument("--attributes", metavar="PATH", help="side CSV ticker,key,value of node attributes")
    p_graph.add_argument("--out", dest="graph_out", metavar="PATH", help="export file path")

    p_tr = sub.add_parser("transfer", help="train on one ticker, score forecast error on others")
    p_tr.add_argument("--source", metavar="TICKER")
    p_tr.add_argument("--targets", metavar="LIST", help="comma list of tickers, or @file")
    p_tr.add_argument("--window", type=int, metavar="W", help="autoregressive lag count")
    p_tr.add_argument("--split", type=float, metavar="F", help="chronological train fraction")
    p_tr.add_argument("--panel", metavar="PATH")
    p_tr.add_argument("--pairs", metavar="PATH")
    p_tr.add_argument("--threshold", type=float, metavar="T")
    p_tr.add_argument("--out", dest="transfer_out", metavar="PATH")

    p_all = sub.add_parser("pipeline", help="run ingest, correlate, graph, and transfer in order")
    for flag_parser in (p_all,):
        flag_parser.add_argument("--input", metavar="PATH")
        flag_parser.add_argument("--window-start", metavar="DATE")
        flag_parser.add_argument("--window-end", metavar="DATE")
        flag_parser.add_argument("--exclude", metavar="SYMS")
        flag_parser.add_argument("--date-format", metavar="FMT")
        flag_parser.add_argument("--calendar-policy", choices=("union", "intersection"))
        flag_parser.add_argument("--columns", metavar="MAP")
        flag_parser.add_argument("--returns-mode", choices=("simple", "diff", "log"))
        flag_parser.add_argument("--min-overlap", type=int, metavar="N")
        flag_parser.add_argument("--returns-out", metavar="PATH")
        flag_parser.add_argument("--threshold", type=float, metavar="T")
        flag_parser.add_argument("--format", choices=export.EXPORT_FORMATS)
        flag_parser.add_argument("--min-clique-size", type=int, metavar="K")
        flag_parser.add_argument("--attributes", metavar="PATH")
        flag_parser.add_argument("--source", metavar="TICKER")
        flag_parser.add_argument("--targets", metavar="LIST")
        flag_parser.add_argument("--window", type=int, metavar="W")
        flag_parser.add_argument("--split", type=float, metavar="F")

    handlers = {
        "ingest": cmd_ingest,
        "correlate": cmd_correlate,
        "graph": cmd_graph,
        "transfer": cmd_transfer,
        "pipeline": cmd_pipeline,
    }
    for name, subparser in sub.choices.items():
        _add_common(subparser)
        subparser.set_defaults(handler=handlers[name])
    return parser


#: argparse dest -> config field, where the names differ
_FLAG_FIELDS = {"exclude": "exclude_symbols", "out_dir": "out_dir"}

#: flags whose raw string needs the config converter applied
_STRING_SETTINGS = {
    "window_start", "window_end", "exclude_symbols", "columns", "targets",
}


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if args.config:
        apply_settings(config, load_config(args.config))
    field_names = {f.name for f in fields(PipelineConfig)}
    for dest, value in vars(args).items():
        if dest in ("command", "handler", "config", "verbose") or value is None:
            continue
        name = _FLAG_FIELDS.get(dest, dest)
        if name not in field_names:
            continue
        if name == "targets" and isinstance(value, str) and value.startswith("@"):
            listing = Path(value[1:])
            if not listing.exists():
                raise ConfigError(f"targets file not found: {listing}")
            value = listing.read_text(encoding="utf-8")
        if name in _STRING_SETTINGS:
            apply_settings(config, {name: value})
        else:
            setattr(config, name, value)
    return validate(config)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        config = resolve_config(args)
        return args.handler(config)
    except ConfigError as exc:
        print(f"marketnet: error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except ToolError as exc:
        print(f"marketnet: error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
