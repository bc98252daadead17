"""Graph writers for visualization tools: GEXF 1.2, GraphML, DOT, edge CSV.

Output is assembled from the graph's canonical node/edge order, with no
timestamps or environment-dependent content, so a given graph always produces
byte-identical documents. Viewer formats carry weights rounded to 6 decimals;
the edge CSV keeps full precision so a re-import reproduces the graph exactly.
"""

from __future__ import annotations

import csv
import io
import re
from typing import IO, Iterable
from xml.sax.saxutils import escape, quoteattr

from .errors import ParseError
from .ingest import _as_text_lines
from .network import CompanyGraph

EXPORT_FORMATS = ("gexf", "graphml", "dot", "edge-csv")

FORMAT_EXTENSIONS = {"gexf": "gexf", "graphml": "graphml", "dot": "dot", "edge-csv": "csv"}

_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _weight(value: float) -> str:
    return format(value, ".6f")


def _attribute_keys(graph: CompanyGraph) -> list[str]:
    keys: set[str] = set()
    for pairs in graph.attributes.values():
        keys.update(pairs)
    return sorted(keys)


def to_gexf(graph: CompanyGraph) -> str:
    """GEXF 1.2, static undirected graph, node ids = tickers."""
    keys = _attribute_keys(graph)
    key_id = {key: str(i) for i, key in enumerate(keys)}
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">',
        "  <meta>",
        "    <creator>marketnet</creator>",
        f"    <description>company correlation network (threshold={graph.threshold!r})</description>",
        "  </meta>",
        '  <graph defaultedgetype="undirected" mode="static">',
    ]
    if keys:
        lines.append('    <attributes class="node">')
        for key in keys:
            lines.append(
                f'      <attribute id={quoteattr(key_id[key])} '
                f'title={quoteattr(key)} type="string"/>'
            )
        lines.append("    </attributes>")
    lines.append("    <nodes>")
    for node in graph.nodes:
        attrs = graph.attributes.get(node, {})
        opening = f"      <node id={quoteattr(node)} label={quoteattr(node)}"
        if attrs:
            lines.append(opening + ">")
            lines.append("        <attvalues>")
            for key in sorted(attrs):
                lines.append(
                    f"          <attvalue for={quoteattr(key_id[key])} "
                    f"value={quoteattr(attrs[key])}/>"
                )
            lines.append("        </attvalues>")
            lines.append("      </node>")
        else:
            lines.append(opening + "/>")
    lines.append("    </nodes>")
    lines.append("    <edges>")
    for index, (a, b, weight) in enumerate(graph.edges):
        lines.append(
            f'      <edge id="{index}" source={quoteattr(a)} '
            f'target={quoteattr(b)} weight="{_weight(weight)}"/>'
        )
    lines.append("    </edges>")
    lines.append("  </graph>")
    lines.append("</gexf>")
    return "\n".join(lines) + "\n"


def to_graphml(graph: CompanyGraph) -> str:
    """GraphML with a double ``weight`` edge attribute."""
    keys = _attribute_keys(graph)
    key_id = {key: f"d{i + 1}" for i, key in enumerate(keys)}
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns"',
        '         xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"',
        '         xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns'
        ' http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
        '  <key id="d0" for="edge" attr.name="weight" attr.type="double"/>',
    ]
    for key in keys:
        lines.append(
            f'  <key id="{key_id[key]}" for="node" '
            f"attr.name={quoteattr(key)} attr.type=\"string\"/>"
        )
    lines.append('  <graph id="G" edgedefault="undirected">')
    for node in graph.nodes:
        attrs = graph.attributes.get(node, {})
        if attrs:
            lines.append(f"    <node id={quoteattr(node)}>")
            for key in sorted(attrs):
                lines.append(
                    f'      <data key="{key_id[key]}">{escape(attrs[key])}</data>'
                )
            lines.append("    </node>")
        else:
            lines.append(f"    <node id={quoteattr(node)}/>")
    for index, (a, b, weight) in enumerate(graph.edges):
        lines.append(
            f'    <edge id="e{index}" source={quoteattr(a)} target={quoteattr(b)}>'
        )
        lines.append(f'      <data key="d0">{_weight(weight)}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def _dot_quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: CompanyGraph) -> str:
    """Graphviz DOT; node attributes with non-identifier keys are skipped."""
    lines = ["graph company_network {"]
    for node in graph.nodes:
        attrs = graph.attributes.get(node, {})
        rendered = [
            f"{key}={_dot_quote(attrs[key])}"
            for key in sorted(attrs)
            if _DOT_ID.match(key)
        ]
        suffix = f" [{', '.join(rendered)}]" if rendered else ""
        lines.append(f"  {_dot_quote(node)}{suffix};")
    for a, b, weight in graph.edges:
        lines.append(f"  {_dot_quote(a)} -- {_dot_quote(b)} [weight={_weight(weight)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_csv(graph: CompanyGraph) -> str:
    """Edge list ``ticker_a,ticker_b,rho`` with full-precision weights."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["ticker_a", "ticker_b", "rho"])
    for a, b, weight in graph.edges:
        writer.writerow([a, b, repr(weight)])
    return out.getvalue()


def parse_edge_csv(
    source: bytes | str | IO[bytes] | IO[str],
) -> list[tuple[str, str, float]]:
    """Read an edge CSV (``ticker_a,ticker_b,rho`` header, optional extras)."""
    reader = csv.reader(_as_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty edge file", line=1) from None
    if [h.strip() for h in header[:3]] != ["ticker_a", "ticker_b", "rho"]:
        raise ParseError("edge header must start with ticker_a,ticker_b,rho", line=1)
    edges: list[tuple[str, str, float]] = []
    for record in reader:
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) < 3:
            raise ParseError("expected at least 3 cells", line=reader.line_num)
        a, b = record[0].strip(), record[1].strip()
        try:
            weight = float(record[2])
        except ValueError:
            raise ParseError(
                f"bad rho {record[2]!r}", line=reader.line_num
            ) from None
        if not a or not b:
            raise ParseError("empty ticker", line=reader.line_num)
        edges.append((a, b, weight))
    return edges


def export_graph(graph: CompanyGraph, format: str) -> bytes:
    """Serialize to the chosen format as UTF-8 bytes."""
    if format == "gexf":
        text = to_gexf(graph)
    elif format == "graphml":
        text = to_graphml(graph)
    elif format == "dot":
        text = to_dot(graph)
    elif format == "edge-csv":
        text = to_edge_csv(graph)
    else:
        raise ValueError(f"format must be one of {EXPORT_FORMATS}")
    return text.encode("utf-8")
