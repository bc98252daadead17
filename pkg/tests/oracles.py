"""Independent brute-force oracles the implementation is checked against.

Nothing here shares code with the package: correlation uses pure-Python
fsum accumulation of the direct covariance/sigma formula, graph structure
uses exhaustive or matrix-power enumeration, and the regression oracle solves
the normal equations in 50-digit arithmetic.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from itertools import combinations

import mpmath
import numpy as np


def pearson_oracle(x, y, min_overlap: int) -> tuple[float | None, int]:
    """Direct population-covariance correlation over the joint support."""
    pairs = [
        (float(a), float(b))
        for a, b in zip(x, y)
        if not (math.isnan(a) or math.isnan(b))
    ]
    n = len(pairs)
    if n < min_overlap or n < 2:
        return None, n
    mean_x = math.fsum(a for a, _ in pairs) / n
    mean_y = math.fsum(b for _, b in pairs) / n
    cov = math.fsum((a - mean_x) * (b - mean_y) for a, b in pairs) / n
    var_x = math.fsum((a - mean_x) ** 2 for a, _ in pairs) / n
    var_y = math.fsum((b - mean_y) ** 2 for _, b in pairs) / n
    if var_x == 0.0 or var_y == 0.0:
        return None, n
    rho = cov / (math.sqrt(var_x) * math.sqrt(var_y))
    return max(-1.0, min(1.0, rho)), n


def components_oracle(nodes, edges) -> tuple[tuple[str, ...], ...]:
    """Connected components from the transitive closure by repeated squaring."""
    order = sorted(nodes)
    index = {node: i for i, node in enumerate(order)}
    n = len(order)
    reach = np.eye(n, dtype=bool)
    for a, b in edges:
        reach[index[a], index[b]] = reach[index[b], index[a]] = True
    while True:
        squared = reach @ reach
        if np.array_equal(squared, reach):
            break
        reach = squared
    seen: set[int] = set()
    parts = []
    for i in range(n):
        if i in seen:
            continue
        members = [order[j] for j in range(n) if reach[i, j]]
        seen.update(index[m] for m in members)
        parts.append(tuple(sorted(members)))
    parts.sort(key=lambda part: (-len(part), part[0]))
    return tuple(parts)


def cliques_oracle(nodes, edges, min_size: int) -> tuple[tuple[str, ...], ...]:
    """All maximal cliques by checking every subset (exponential; tiny n only)."""
    order = sorted(nodes)
    adjacent = {node: set() for node in order}
    for a, b in edges:
        adjacent[a].add(b)
        adjacent[b].add(a)

    def is_clique(subset) -> bool:
        return all(b in adjacent[a] for a, b in combinations(subset, 2))

    cliques = []
    for size in range(1, len(order) + 1):
        for subset in combinations(order, size):
            if not is_clique(subset):
                continue
            extendable = any(
                all(node in adjacent[member] for member in subset)
                for node in order
                if node not in subset
            )
            if not extendable and size >= min_size:
                cliques.append(tuple(subset))
    cliques.sort(key=lambda c: (-len(c), c))
    return tuple(cliques)


def triangles_oracle(nodes, edges) -> int:
    """Triangle count by cubic enumeration of node triples."""
    order = sorted(nodes)
    adjacent = {node: set() for node in order}
    for a, b in edges:
        adjacent[a].add(b)
        adjacent[b].add(a)
    count = 0
    for a, b, c in combinations(order, 3):
        if b in adjacent[a] and c in adjacent[a] and c in adjacent[b]:
            count += 1
    return count


def hops_oracle(nodes, edges) -> dict[tuple[str, str], int]:
    """All-pairs hop distances via Floyd-Warshall."""
    order = sorted(nodes)
    index = {node: i for i, node in enumerate(order)}
    n = len(order)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b in edges:
        dist[index[a], index[b]] = dist[index[b], index[a]] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    out = {}
    for a in order:
        for b in order:
            d = dist[index[a], index[b]]
            if math.isfinite(d):
                out[(a, b)] = int(d)
    return out


def ar_fit_oracle(series, window: int) -> np.ndarray:
    """Normal-equations AR fit on the standardized series, 50-digit arithmetic."""
    with mpmath.workdps(50):
        values = [mpmath.mpf(float(v)) for v in series]
        n = len(values)
        mean = mpmath.fsum(values) / n
        variance = mpmath.fsum((v - mean) ** 2 for v in values) / n
        scale = mpmath.sqrt(variance)
        z = [(v - mean) / scale for v in values]
        rows = n - window
        design = mpmath.matrix(rows, window + 1)
        target = mpmath.matrix(rows, 1)
        for r in range(rows):
            design[r, 0] = mpmath.mpf(1)
            for k in range(1, window + 1):
                design[r, k] = z[window + r - k]
            target[r, 0] = z[window + r]
        gram = design.T * design
        moment = design.T * target
        solution = mpmath.lu_solve(gram, moment)
        return np.array([float(solution[i, 0]) for i in range(window + 1)])


GEXF_NS = "{http://www.gexf.net/1.2draft}"


def validate_gexf(text: str) -> tuple[list[str], list[tuple[str, str, float]]]:
    """Structural validation of a GEXF 1.2 document.

    Checks the constraints a schema validator would: namespace and version,
    required graph/nodes/edges structure, unique node and edge ids, edge
    endpoints referencing declared nodes, float weights, and attvalues
    referencing declared attributes. Returns (node ids, edges) for
    cross-checking against the source graph.
    """
    root = ET.fromstring(text)
    assert root.tag == GEXF_NS + "gexf", f"root element {root.tag}"
    assert root.get("version") == "1.2"
    graph = root.find(GEXF_NS + "graph")
    assert graph is not None, "missing <graph>"
    assert graph.get("defaultedgetype") in (None, "undirected", "directed", "mutual")
    assert graph.get("mode") in (None, "static", "dynamic")

    declared_attrs: set[str] = set()
    for attributes in graph.findall(GEXF_NS + "attributes"):
        assert attributes.get("class") in ("node", "edge")
        for attribute in attributes.findall(GEXF_NS + "attribute"):
            attr_id = attribute.get("id")
            assert attr_id is not None and attr_id not in declared_attrs
            assert attribute.get("title")
            declared_attrs.add(attr_id)

    nodes_element = graph.find(GEXF_NS + "nodes")
    edges_element = graph.find(GEXF_NS + "edges")
    assert nodes_element is not None, "missing <nodes>"
    assert edges_element is not None, "missing <edges>"

    node_ids: list[str] = []
    for node in nodes_element.findall(GEXF_NS + "node"):
        node_id = node.get("id")
        assert node_id is not None and node_id not in node_ids
        node_ids.append(node_id)
        for attvalues in node.findall(GEXF_NS + "attvalues"):
            for attvalue in attvalues.findall(GEXF_NS + "attvalue"):
                assert attvalue.get("for") in declared_attrs
                assert attvalue.get("value") is not None

    node_set = set(node_ids)
    edge_ids: set[str] = set()
    edges: list[tuple[str, str, float]] = []
    for edge in edges_element.findall(GEXF_NS + "edge"):
        edge_id = edge.get("id")
        assert edge_id is not None and edge_id not in edge_ids
        edge_ids.add(edge_id)
        source, target = edge.get("source"), edge.get("target")
        assert source in node_set and target in node_set
        weight = edge.get("weight")
        if weight is not None:
            edges.append((source, target, float(weight)))
        else:
            edges.append((source, target, 1.0))
    return node_ids, edges
