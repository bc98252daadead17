"""The thresholded company graph and its structure.

Nodes are tickers, edges are correlations strictly above the threshold.
Graphs are immutable and canonically ordered (nodes lexicographic, edges by
(min, max) endpoint), which makes every analysis and export deterministic.
"""

from __future__ import annotations

import csv
import difflib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Mapping, Sequence

from .correlation import CorrelationMatrix
from .errors import CliqueLimitError, ParseError, UnknownSymbolError
from .ingest import _as_text_lines

DEFAULT_MAX_CLIQUES = 100_000


@dataclass(frozen=True, eq=False)
class CompanyGraph:
    """Undirected weighted graph over ticker symbols.

    ``edges`` hold (a, b, weight) with a < b, sorted; weights are the
    correlations that cleared ``threshold``. ``build_graph`` never emits
    isolated nodes, but induced subgraphs (e.g. a radius-0 neighborhood) may
    contain them.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    threshold: float
    attributes: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        if list(self.nodes) != sorted(set(self.nodes)):
            raise ValueError("nodes must be unique and sorted")
        node_set = set(self.nodes)
        seen: set[tuple[str, str]] = set()
        previous = None
        for a, b, weight in self.edges:
            if a >= b:
                raise ValueError(f"edge ({a}, {b}) must have a < b (no self-loops)")
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a}, {b}) references unknown node")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            if not (self.threshold < weight <= 1.0):
                raise ValueError(
                    f"edge weight {weight} for ({a}, {b}) outside ({self.threshold}, 1]"
                )
            if previous is not None and (a, b) < previous:
                raise ValueError("edges must be sorted by (min, max) endpoint")
            seen.add((a, b))
            previous = (a, b)
        unknown_attrs = set(self.attributes) - node_set
        if unknown_attrs:
            raise ValueError(f"attributes for unknown nodes: {sorted(unknown_attrs)}")

    @cached_property
    def _adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {node: {} for node in self.nodes}
        for a, b, weight in self.edges:
            adj[a][b] = weight
            adj[b][a] = weight
        return adj

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_node(self, ticker: str) -> bool:
        return ticker in self._adjacency

    def neighbors(self, ticker: str) -> tuple[str, ...]:
        return tuple(sorted(self._adjacency[ticker]))

    def degree(self, ticker: str) -> int:
        return len(self._adjacency[ticker])

    def weight(self, a: str, b: str) -> float | None:
        return self._adjacency[a].get(b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompanyGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.threshold == other.threshold
            and dict(self.attributes) == dict(other.attributes)
        )

    def __repr__(self) -> str:
        return (
            f"CompanyGraph({self.node_count} nodes, {self.edge_count} edges, "
            f"threshold={self.threshold})"
        )


@dataclass(frozen=True)
class GraphSummary:
    """Headline structure of a company graph."""

    node_count: int
    edge_count: int
    component_count: int
    component_sizes: tuple[int, ...]
    degree_histogram: tuple[tuple[int, int], ...]  # (degree, node count), ascending
    triangle_count: int
    clustering_coefficient: float


def _canonical_edges(
    raw: Iterable[tuple[str, str, float]]
) -> tuple[tuple[str, str, float], ...]:
    ordered = {}
    for a, b, weight in raw:
        if a == b:
            raise ValueError(f"self-loop on {a}")
        key = (a, b) if a < b else (b, a)
        if key in ordered and ordered[key] != weight:
            raise ValueError(f"conflicting weights for edge {key}")
        ordered[key] = weight
    return tuple((a, b, ordered[(a, b)]) for a, b in sorted(ordered))


def build_graph(matrix: CorrelationMatrix, threshold: float = 0.5) -> CompanyGraph:
    """Thresholded graph: edge iff rho is defined and strictly above threshold.

    Tickers with no qualifying edge are dropped entirely.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must be in [0, 1), got {threshold}")
    qualifying = [
        (a, b, value)
        for a, b, value, _ in matrix.defined_pairs()
        if value > threshold
    ]
    edges = _canonical_edges(qualifying)
    nodes = sorted({node for a, b, _ in edges for node in (a, b)})
    return CompanyGraph(tuple(nodes), edges, threshold)


def build_from_edge_list(
    edges: Iterable[tuple[str, str, float]],
    threshold: float,
    attributes: Mapping[str, Mapping[str, str]] | None = None,
) -> CompanyGraph:
    """Reconstruct a graph from explicit weighted edges (any endpoint order)."""
    canonical = _canonical_edges(edges)
    nodes = sorted({node for a, b, _ in canonical for node in (a, b)})
    attrs = {t: dict(v) for t, v in (attributes or {}).items() if t in set(nodes)}
    return CompanyGraph(tuple(nodes), canonical, threshold, attrs)


def connected_components(graph: CompanyGraph) -> tuple[tuple[str, ...], ...]:
    """Partition of the nodes by edge reachability, parts sorted by size
    descending then by smallest member."""
    seen: set[str] = set()
    parts: list[tuple[str, ...]] = []
    for start in graph.nodes:
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        members = [start]
        while queue:
            node = queue.popleft()
            for neighbor in graph.neighbors(node):
                if neighbor not in seen:
                    seen.add(neighbor)
                    members.append(neighbor)
                    queue.append(neighbor)
        parts.append(tuple(sorted(members)))
    parts.sort(key=lambda part: (-len(part), part[0]))
    return tuple(parts)


def maximal_cliques(
    graph: CompanyGraph,
    min_size: int = 3,
    max_cliques: int = DEFAULT_MAX_CLIQUES,
) -> tuple[tuple[str, ...], ...]:
    """All maximal cliques of at least ``min_size`` nodes, Bron-Kerbosch with
    pivoting, ordered by size descending then lexicographically.

    Raises :class:`CliqueLimitError` once more than ``max_cliques`` maximal
    cliques have been enumerated (pathologically dense graphs).
    """
    if min_size < 3:
        raise ValueError("min_size must be >= 3")
    adjacency = {node: set(graph._adjacency[node]) for node in graph.nodes}
    found: list[tuple[str, ...]] = []
    enumerated = 0

    def expand(clique: list[str], candidates: set[str], excluded: set[str]) -> None:
        nonlocal enumerated
        if not candidates and not excluded:
            enumerated += 1
            if enumerated > max_cliques:
                raise CliqueLimitError(
                    f"more than {max_cliques} maximal cliques; raise the "
                    "correlation threshold or the cap"
                )
            if len(clique) >= min_size:
                found.append(tuple(sorted(clique)))
            return
        # deterministic pivot: max |candidates ∩ N(u)|, lexicographic tie-break
        pivot = max(sorted(candidates | excluded), key=lambda u: len(candidates & adjacency[u]))
        for v in sorted(candidates - adjacency[pivot]):
            expand(clique + [v], candidates & adjacency[v], excluded & adjacency[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    expand([], set(graph.nodes), set())
    found.sort(key=lambda c: (-len(c), c))
    return tuple(found)


def degree_and_clustering(graph: CompanyGraph) -> GraphSummary:
    """Exact degree histogram, triangle count, and global clustering
    coefficient (3 * triangles / connected triples; 0 when no triples)."""
    degrees = [graph.degree(node) for node in graph.nodes]
    histogram: dict[int, int] = {}
    for d in degrees:
        histogram[d] = histogram.get(d, 0) + 1
    common_neighbor_sum = 0
    for a, b, _ in graph.edges:
        common_neighbor_sum += len(
            set(graph._adjacency[a]) & set(graph._adjacency[b])
        )
    assert common_neighbor_sum % 3 == 0
    triangles = common_neighbor_sum // 3
    triples = sum(d * (d - 1) // 2 for d in degrees)
    clustering = (3.0 * triangles / triples) if triples else 0.0
    components = connected_components(graph)
    return GraphSummary(
        node_count=graph.node_count,
        edge_count=graph.edge_count,
        component_count=len(components),
        component_sizes=tuple(len(part) for part in components),
        degree_histogram=tuple(sorted(histogram.items())),
        triangle_count=triangles,
        clustering_coefficient=clustering,
    )


def neighborhood(graph: CompanyGraph, ticker: str, radius: int) -> CompanyGraph:
    """Induced subgraph of every node within ``radius`` hops of ``ticker``.

    Radius 0 keeps just the ticker itself. Unknown tickers raise with the
    closest symbol matches.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if not graph.has_node(ticker):
        suggestions = tuple(
            difflib.get_close_matches(ticker, graph.nodes, n=5, cutoff=0.4)
        )
        raise UnknownSymbolError(ticker, suggestions)
    distance = {ticker: 0}
    queue = deque([ticker])
    while queue:
        node = queue.popleft()
        if distance[node] == radius:
            continue
        for neighbor in graph.neighbors(node):
            if neighbor not in distance:
                distance[neighbor] = distance[node] + 1
                queue.append(neighbor)
    kept = set(distance)
    edges = tuple(e for e in graph.edges if e[0] in kept and e[1] in kept)
    attrs = {t: dict(v) for t, v in graph.attributes.items() if t in kept}
    return CompanyGraph(tuple(sorted(kept)), edges, graph.threshold, attrs)


def hop_distances(graph: CompanyGraph, source: str) -> dict[str, int]:
    """BFS hop count from ``source`` to every reachable node (source -> 0)."""
    if not graph.has_node(source):
        return {}
    distance = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for neighbor in graph.neighbors(node):
            if neighbor not in distance:
                distance[neighbor] = distance[node] + 1
                queue.append(neighbor)
    return distance


def load_attributes(source: bytes | str | IO[bytes] | IO[str]) -> dict[str, dict[str, str]]:
    """Parse a side CSV of node attributes: header ``ticker,key,value``."""
    reader = csv.reader(_as_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty attributes file", line=1) from None
    if [h.strip() for h in header[:3]] != ["ticker", "key", "value"]:
        raise ParseError("attributes header must be ticker,key,value", line=1)
    attrs: dict[str, dict[str, str]] = {}
    for record in reader:
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) < 3:
            raise ParseError("expected 3 cells", line=reader.line_num)
        ticker, key, value = record[0].strip(), record[1].strip(), record[2]
        if not ticker or not key:
            raise ParseError("empty ticker or key", line=reader.line_num)
        attrs.setdefault(ticker, {})[key] = value
    return attrs


def with_attributes(
    graph: CompanyGraph, attributes: Mapping[str, Mapping[str, str]]
) -> CompanyGraph:
    """Merge external node attributes (unknown tickers are ignored)."""
    merged = {t: dict(v) for t, v in graph.attributes.items()}
    for ticker, pairs in attributes.items():
        if ticker in set(graph.nodes):
            merged.setdefault(ticker, {}).update(pairs)
    return CompanyGraph(graph.nodes, graph.edges, graph.threshold, merged)
