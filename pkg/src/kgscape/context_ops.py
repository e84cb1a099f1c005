"""Applying classified refinement directives to a computed layout.

Directives adjust emphasis only; node positions are never touched. Neighbor
directives scale node sizes by a score, Edge directives highlight and bundle
matching edges, Path directives discover paths under one of three criteria.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, TYPE_CHECKING

from .model import Edge, KnowledgeGraph, is_numeric_value, numeric_value, canonical_value
from .preferences import ContextDirective, EDGE, NEIGHBOR, PATH, SHORTEST, HOMOGENEOUS, DISJOINT

if TYPE_CHECKING:
    from .layout.engine import ContextLayout

MAX_SCALE_BOOST = 1.5
DEFAULT_MAX_PATHS = 10
DEFAULT_MAX_DEPTH = 6


class DirectiveError(ValueError):
    """A directive referenced unknown graph vocabulary or nodes."""


@dataclass(frozen=True)
class Bundle:
    id: str
    anchor: tuple[float, float]
    edge_ids: tuple[str, ...]
    expanded: bool = False


@dataclass(frozen=True)
class HighlightedPath:
    criterion: str
    node_ids: tuple[str, ...]
    edge_ids: tuple[str, ...]


@dataclass(frozen=True)
class EmphasisState:
    node_sizes: Mapping[str, float] = field(default_factory=dict)
    highlighted_edges: frozenset[str] = frozenset()
    bundles: tuple[Bundle, ...] = ()
    highlighted_paths: tuple[HighlightedPath, ...] = ()

    @staticmethod
    def empty() -> "EmphasisState":
        return EmphasisState()


@dataclass(frozen=True)
class PathCaps:
    max_paths: int = DEFAULT_MAX_PATHS
    max_depth: int = DEFAULT_MAX_DEPTH


@dataclass(frozen=True)
class PathResult:
    criterion: str
    paths: tuple[tuple[str, ...], ...]
    truncated: bool

    def node_sequences(self, kg: KnowledgeGraph, source: str) -> list[tuple[str, ...]]:
        """Expand edge-id sequences back into node-id sequences starting at source."""
        out = []
        for edge_ids in self.paths:
            nodes = [source]
            for eid in edge_ids:
                edge = kg.edge(eid)
                nodes.append(edge.target if edge.source == nodes[-1] else edge.source)
            out.append(tuple(nodes))
        return out


def _displayed_edges(layout: "ContextLayout", kg: KnowledgeGraph) -> list[Edge]:
    """Edges of the rendered subgraph: one endpoint clustered (interest), the
    other a displayed connected node."""
    shown = set(layout.positions)
    clustered = set(layout.cluster_of)
    out = []
    for edge in kg.edges:
        if edge.source in shown and edge.target in shown:
            a_interest = edge.source in clustered
            b_interest = edge.target in clustered
            if a_interest != b_interest:
                out.append(edge)
    return out


def displayed_degree(layout: "ContextLayout", kg: KnowledgeGraph) -> dict[str, int]:
    degree = {node_id: 0 for node_id in layout.positions}
    for edge in _displayed_edges(layout, kg):
        degree[edge.source] += 1
        degree[edge.target] += 1
    return degree


def apply_neighbor_context(
    layout: "ContextLayout", directive: ContextDirective, kg: KnowledgeGraph
) -> EmphasisState:
    """Scale node sizes by degree or by a numeric attribute.

    scale = 1 + 1.5 * score / max score over the directive's target type (all
    displayed nodes when no target type is given); a zero max leaves every
    scale at 1. Scores below zero clamp to a scale of 1.
    """
    if directive.kind != NEIGHBOR:
        raise DirectiveError("expected a neighbor directive")
    if directive.target_type is not None:
        targets = [
            node_id
            for node_id in layout.positions
            if kg.has_node(node_id) and kg.node(node_id).node_type == directive.target_type
        ]
    else:
        targets = [node_id for node_id in layout.positions if kg.has_node(node_id)]

    metric = directive.neighbor_metric
    if metric == "degree":
        degree = displayed_degree(layout, kg)
        scores = {node_id: float(degree.get(node_id, 0)) for node_id in targets}
    else:
        scores = {}
        for node_id in targets:
            node = kg.node(node_id)
            if metric not in node.attributes:
                continue
            value = node.attributes[metric]
            if not is_numeric_value(value):
                raise DirectiveError(
                    f"attribute {metric!r} is not numeric on node {node_id!r}"
                )
            scores[node_id] = numeric_value(value)
        if not scores:
            raise DirectiveError(f"no displayed node carries numeric attribute {metric!r}")

    s_max = max(scores.values(), default=0.0)
    sizes = dict(layout.emphasis.node_sizes)
    for node_id in targets:
        if s_max <= 0:
            sizes[node_id] = 1.0
        else:
            sizes[node_id] = 1.0 + MAX_SCALE_BOOST * max(scores.get(node_id, 0.0), 0.0) / s_max
    return replace(layout.emphasis, node_sizes=sizes)


def _edge_matches(edge: Edge, directive: ContextDirective) -> bool:
    if directive.edge_relation is not None and edge.relation != directive.edge_relation:
        return False
    if directive.edge_attribute is not None:
        name, value = directive.edge_attribute
        if name not in edge.attributes:
            return False
        if canonical_value(edge.attributes[name]) != canonical_value(value):
            return False
    return True


def apply_edge_context(
    layout: "ContextLayout", directive: ContextDirective, kg: KnowledgeGraph
) -> EmphasisState:
    """Highlight edges matching the predicate and bundle them by
    (source cluster, target connected node), anchored at the cluster centroid."""
    if directive.kind != EDGE:
        raise DirectiveError("expected an edge directive")
    if directive.edge_relation is not None:
        known = {e.relation for e in kg.edges}
        if directive.edge_relation not in known:
            raise DirectiveError(f"unknown relation {directive.edge_relation!r}")
    if directive.edge_attribute is not None:
        name = directive.edge_attribute[0]
        if not any(name in e.attributes for e in kg.edges):
            raise DirectiveError(f"unknown edge attribute {name!r}")

    matching = [e for e in _displayed_edges(layout, kg) if _edge_matches(e, directive)]
    grouped: dict[tuple[int, str], list[str]] = {}
    for edge in matching:
        if edge.source in layout.cluster_of:
            cluster_id, connected_id = layout.cluster_of[edge.source], edge.target
        else:
            cluster_id, connected_id = layout.cluster_of[edge.target], edge.source
        grouped.setdefault((cluster_id, connected_id), []).append(edge.id)

    existing_expanded = {b.id for b in layout.emphasis.bundles if b.expanded}
    bundles = []
    for (cluster_id, connected_id), edge_ids in sorted(grouped.items()):
        bundle_id = f"b-{cluster_id}-{connected_id}"
        bundles.append(
            Bundle(
                id=bundle_id,
                anchor=layout.centroids[cluster_id],
                edge_ids=tuple(sorted(edge_ids)),
                expanded=bundle_id in existing_expanded,
            )
        )
    highlighted = frozenset(e.id for e in matching)
    return replace(
        layout.emphasis,
        highlighted_edges=layout.emphasis.highlighted_edges | highlighted,
        bundles=tuple(bundles),
    )


def expand_bundle(emphasis: EmphasisState, bundle_id: str) -> EmphasisState:
    bundles = tuple(
        replace(b, expanded=True) if b.id == bundle_id else b for b in emphasis.bundles
    )
    if bundles == emphasis.bundles and all(b.id != bundle_id for b in bundles):
        raise DirectiveError(f"unknown bundle {bundle_id!r}")
    return replace(emphasis, bundles=bundles)


def _adjacency(kg: KnowledgeGraph, removed: set[str] | None = None) -> dict[str, list[tuple[str, str]]]:
    """Undirected adjacency as (edge id, neighbor) lists in deterministic order."""
    adj: dict[str, list[tuple[str, str]]] = {n.id: [] for n in kg.nodes}
    for edge in kg.edges:
        if removed and edge.id in removed:
            continue
        adj[edge.source].append((edge.id, edge.target))
        adj[edge.target].append((edge.id, edge.source))
    for entries in adj.values():
        entries.sort(key=lambda item: (item[1], item[0]))
    return adj


def bfs_distances(kg: KnowledgeGraph, source: str) -> dict[str, int]:
    adj = _adjacency(kg)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        current = queue.popleft()
        for _eid, nxt in adj[current]:
            if nxt not in dist:
                dist[nxt] = dist[current] + 1
                queue.append(nxt)
    return dist


def _shortest_paths(
    kg: KnowledgeGraph, source: str, target: str, caps: PathCaps
) -> tuple[list[tuple[str, ...]], bool]:
    adj = _adjacency(kg)
    dist = bfs_distances(kg, source)
    if target not in dist:
        return [], False
    paths: list[tuple[str, ...]] = []
    truncated = False

    def walk(node: str, edge_trail: list[str]) -> bool:
        nonlocal truncated
        if node == target:
            paths.append(tuple(edge_trail))
            if len(paths) >= caps.max_paths:
                truncated = True
                return True
            return False
        for eid, nxt in adj[node]:
            if dist.get(nxt) == dist[node] + 1:
                edge_trail.append(eid)
                if walk(nxt, edge_trail):
                    edge_trail.pop()
                    return True
                edge_trail.pop()
        return False

    walk(source, [])
    return paths, truncated


def _homogeneous_paths(
    kg: KnowledgeGraph, source: str, target: str, caps: PathCaps
) -> tuple[list[tuple[str, ...]], bool]:
    relations = sorted({e.relation for e in kg.edges})
    paths: list[tuple[str, ...]] = []
    truncated = False
    for relation in relations:
        adj: dict[str, list[tuple[str, str]]] = {n.id: [] for n in kg.nodes}
        for edge in kg.edges:
            if edge.relation != relation:
                continue
            adj[edge.source].append((edge.id, edge.target))
            adj[edge.target].append((edge.id, edge.source))
        for entries in adj.values():
            entries.sort(key=lambda item: (item[1], item[0]))

        def walk(node: str, visited: set[str], edge_trail: list[str]) -> bool:
            nonlocal truncated
            if len(paths) >= caps.max_paths:
                truncated = True
                return True
            if node == target:
                paths.append(tuple(edge_trail))
                return len(paths) >= caps.max_paths
            if len(edge_trail) >= caps.max_depth:
                return False
            for eid, nxt in adj[node]:
                if nxt in visited:
                    continue
                visited.add(nxt)
                edge_trail.append(eid)
                stop = walk(nxt, visited, edge_trail)
                edge_trail.pop()
                visited.remove(nxt)
                if stop:
                    return True
            return False

        if walk(source, {source}, []):
            break
    return paths, truncated


def _greedy_disjoint_paths(
    kg: KnowledgeGraph, source: str, target: str, caps: PathCaps
) -> tuple[list[tuple[str, ...]], bool]:
    removed: set[str] = set()
    paths: list[tuple[str, ...]] = []
    truncated = False
    while True:
        adj = _adjacency(kg, removed)
        prev: dict[str, tuple[str, str]] = {}
        seen = {source}
        queue = deque([source])
        while queue:
            current = queue.popleft()
            if current == target:
                break
            for eid, nxt in adj[current]:
                if nxt not in seen:
                    seen.add(nxt)
                    prev[nxt] = (current, eid)
                    queue.append(nxt)
        if target not in seen:
            break
        trail = []
        node = target
        while node != source:
            parent, eid = prev[node]
            trail.append(eid)
            node = parent
        trail.reverse()
        removed.update(trail)
        paths.append(tuple(trail))
        if len(paths) >= caps.max_paths:
            truncated = True
            break
    return paths, truncated


def find_paths(
    kg: KnowledgeGraph,
    source: str,
    target: str,
    criterion: str,
    caps: PathCaps = PathCaps(),
) -> PathResult:
    """Discover paths between two nodes under the given criterion.

    shortest: every minimum-hop path (BFS layering), capped.
    homogeneous: simple paths whose edges share one relation, depth-capped.
    disjoint: greedy edge-disjoint set, removing each found path's edges.
    Paths are edge-id sequences sorted by length then node sequence; no path
    existing is an empty result, not an error.
    """
    if source == target:
        raise DirectiveError("source and target must differ")
    for node_id in (source, target):
        if not kg.has_node(node_id):
            raise DirectiveError(f"unknown node {node_id!r}")
    if criterion == SHORTEST:
        paths, truncated = _shortest_paths(kg, source, target, caps)
    elif criterion == HOMOGENEOUS:
        paths, truncated = _homogeneous_paths(kg, source, target, caps)
    elif criterion == DISJOINT:
        paths, truncated = _greedy_disjoint_paths(kg, source, target, caps)
    else:
        raise DirectiveError(f"unknown path criterion {criterion!r}")

    def node_seq(edge_ids: Sequence[str]) -> tuple[str, ...]:
        nodes = [source]
        for eid in edge_ids:
            edge = kg.edge(eid)
            nodes.append(edge.target if edge.source == nodes[-1] else edge.source)
        return tuple(nodes)

    ordered = tuple(sorted(paths, key=lambda p: (len(p), node_seq(p))))
    return PathResult(criterion=criterion, paths=ordered, truncated=truncated)


def apply_path_context(
    layout: "ContextLayout",
    directive: ContextDirective,
    kg: KnowledgeGraph,
    caps: PathCaps = PathCaps(),
) -> EmphasisState:
    """Run path discovery on the full graph and record the highlighted paths."""
    if directive.kind != PATH:
        raise DirectiveError("expected a path directive")
    result = find_paths(kg, directive.path_source, directive.path_target, directive.path_criterion, caps)
    highlighted = tuple(
        HighlightedPath(criterion=result.criterion, node_ids=node_ids, edge_ids=edge_ids)
        for edge_ids, node_ids in zip(result.paths, result.node_sequences(kg, directive.path_source))
    )
    # Replace any previous result for the same (criterion, endpoints) so
    # re-applying a directive is a no-op.
    kept = tuple(
        p
        for p in layout.emphasis.highlighted_paths
        if not (
            p.criterion == result.criterion
            and p.node_ids
            and p.node_ids[0] == directive.path_source
            and p.node_ids[-1] == directive.path_target
        )
    )
    return replace(layout.emphasis, highlighted_paths=kept + highlighted)
