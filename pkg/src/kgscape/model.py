"""Property-graph data model: ingestion, schema derivation, type distances, retrieval."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .preferences import UserPreference

NUMERIC = "numeric"
TEXT = "text"


class GraphDocumentError(ValueError):
    """A graph document failed structural validation."""


class UnknownTypeError(KeyError):
    """A query referenced a node type absent from the graph."""


def canonical_value(value: Any) -> str:
    """Canonical string form of an attribute value, used for answer matching.

    Numbers (and numeric strings, with thousands separators stripped) normalize
    to a minimal decimal form, so 2018, "2018" and "2,018.0" all compare equal.
    """
    if isinstance(value, Mapping):
        value = value.get("value")
    text = str(value).strip()
    plain = text.replace(",", "")
    try:
        num = float(plain)
    except ValueError:
        return text
    if num.is_integer():
        return str(int(num))
    return str(num)


def is_numeric_value(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, float)):
        return True
    if isinstance(value, Mapping):
        inner = value.get("value")
        return isinstance(inner, (int, float)) and not isinstance(inner, bool)
    if isinstance(value, str):
        try:
            float(value.strip().replace(",", ""))
        except ValueError:
            return False
        return True
    return False


def numeric_value(value: Any) -> float:
    """Numeric content of an attribute value; unit-tagged dicts yield their value field."""
    if isinstance(value, Mapping):
        value = value["value"]
    if isinstance(value, str):
        value = value.strip().replace(",", "")
    return float(value)


@dataclass(frozen=True)
class Node:
    id: str
    node_type: str
    label: str
    attributes: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    relation: str
    attributes: Mapping[str, Any] = field(default_factory=dict)


class KnowledgeGraph:
    """Validated instance graph. Immutable after construction; safe to share across threads."""

    def __init__(
        self,
        nodes: Iterable[Node],
        edges: Iterable[Edge],
        attribute_index: Mapping[tuple[str, str], str],
        name: str = "",
    ):
        self.name = name
        self.nodes = list(nodes)
        self.edges = list(edges)
        self.attribute_index = dict(attribute_index)
        self._by_id = {n.id: n for n in self.nodes}
        self._edge_by_id = {e.id: e for e in self.edges}
        self._adjacency: dict[str, list[tuple[Edge, str]]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            self._adjacency[e.source].append((e, e.target))
            self._adjacency[e.target].append((e, e.source))
        self._by_type: dict[str, list[Node]] = {}
        for n in self.nodes:
            self._by_type.setdefault(n.node_type, []).append(n)

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    def edge(self, edge_id: str) -> Edge:
        return self._edge_by_id[edge_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def neighbors(self, node_id: str) -> list[tuple[Edge, str]]:
        """Incident edges with the opposite endpoint, both directions."""
        return self._adjacency[node_id]

    def degree(self, node_id: str) -> int:
        return len(self._adjacency[node_id])

    def nodes_of_type(self, node_type: str) -> list[Node]:
        return self._by_type.get(node_type, [])

    def types(self) -> list[str]:
        return sorted(self._by_type)

    def attributes_by_type(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for (node_type, attr), _kind in sorted(self.attribute_index.items()):
            out.setdefault(node_type, []).append(attr)
        return out

    def attribute_kind(self, node_type: str, attribute: str) -> str | None:
        return self.attribute_index.get((node_type, attribute))


def _infer_attribute_index(
    nodes: Sequence[Node],
    declared: Mapping[str, Mapping[str, str]],
) -> dict[tuple[str, str], str]:
    observed: dict[tuple[str, str], bool] = {}
    for n in nodes:
        for attr, value in n.attributes.items():
            key = (n.node_type, attr)
            observed[key] = observed.get(key, True) and is_numeric_value(value)
    index: dict[tuple[str, str], str] = {}
    for key, all_numeric in observed.items():
        node_type, attr = key
        stated = declared.get(node_type, {}).get(attr)
        if stated is not None:
            if stated not in (NUMERIC, TEXT):
                raise GraphDocumentError(
                    f"unknown attribute kind {stated!r} declared for {node_type}.{attr}"
                )
            if stated == NUMERIC and not all_numeric:
                raise GraphDocumentError(
                    f"mixed attribute kinds for ({node_type}, {attr}): declared numeric "
                    "but non-numeric values present"
                )
            index[key] = stated
        else:
            index[key] = NUMERIC if all_numeric else TEXT
    return index


def load_graph(document: Mapping[str, Any] | str | bytes, *, allow_self_loops: bool = False) -> KnowledgeGraph:
    """Parse and validate a graph document (see README for the JSON schema).

    Raises GraphDocumentError on malformed input, dangling edge endpoints,
    duplicate ids, or attribute values that violate a declared kind.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphDocumentError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise GraphDocumentError("graph document must be a JSON object")

    meta = document.get("meta", {})
    if not isinstance(meta, Mapping):
        raise GraphDocumentError("meta must be an object")
    declared = meta.get("attribute_kinds", {})

    nodes: list[Node] = []
    seen_nodes: set[str] = set()
    for raw in document.get("nodes", []):
        try:
            node = Node(
                id=str(raw["id"]),
                node_type=str(raw["type"]),
                label=str(raw["label"]),
                attributes=dict(raw.get("attributes", {})),
            )
        except (KeyError, TypeError) as exc:
            raise GraphDocumentError(f"malformed node entry {raw!r}") from exc
        if not node.node_type:
            raise GraphDocumentError(f"node {node.id!r} has an empty type")
        if not node.label:
            raise GraphDocumentError(f"node {node.id!r} has an empty label")
        if node.id in seen_nodes:
            raise GraphDocumentError(f"duplicate node id {node.id!r}")
        seen_nodes.add(node.id)
        nodes.append(node)

    edges: list[Edge] = []
    seen_edges: set[str] = set()
    for raw in document.get("edges", []):
        try:
            edge = Edge(
                id=str(raw["id"]),
                source=str(raw["source"]),
                target=str(raw["target"]),
                relation=str(raw["relation"]),
                attributes=dict(raw.get("attributes", {})),
            )
        except (KeyError, TypeError) as exc:
            raise GraphDocumentError(f"malformed edge entry {raw!r}") from exc
        if edge.id in seen_edges:
            raise GraphDocumentError(f"duplicate edge id {edge.id!r}")
        seen_edges.add(edge.id)
        for endpoint in (edge.source, edge.target):
            if endpoint not in seen_nodes:
                raise GraphDocumentError(
                    f"edge {edge.id!r} references missing node {endpoint!r}"
                )
        if edge.source == edge.target and not allow_self_loops:
            raise GraphDocumentError(f"edge {edge.id!r} is a self-loop (rejected by default)")
        edges.append(edge)

    index = _infer_attribute_index(nodes, declared)
    return KnowledgeGraph(nodes, edges, index, name=str(meta.get("name", "")))


def serialize_graph(kg: KnowledgeGraph) -> dict[str, Any]:
    """Canonical document form: nodes and edges sorted by id, kinds made explicit."""
    kinds: dict[str, dict[str, str]] = {}
    for (node_type, attr), kind in sorted(kg.attribute_index.items()):
        kinds.setdefault(node_type, {})[attr] = kind
    return {
        "meta": {"name": kg.name, "attribute_kinds": kinds},
        "nodes": [
            {"id": n.id, "type": n.node_type, "label": n.label, "attributes": dict(n.attributes)}
            for n in sorted(kg.nodes, key=lambda n: n.id)
        ],
        "edges": [
            {
                "id": e.id,
                "source": e.source,
                "target": e.target,
                "relation": e.relation,
                "attributes": dict(e.attributes),
            }
            for e in sorted(kg.edges, key=lambda e: e.id)
        ],
    }


@dataclass(frozen=True)
class Ontology:
    """Schema graph: node types as vertices, observed relations as edges."""

    types: tuple[str, ...]
    relations: tuple[tuple[str, str, str], ...]
    connected: bool

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {t: set() for t in self.types}
        for src, dst, _rel in self.relations:
            adj[src].add(dst)
            adj[dst].add(src)
        return adj

    def adjacent_types(self, node_type: str) -> set[str]:
        return self.adjacency().get(node_type, set())


def _type_graph_connected(types: Sequence[str], adj: Mapping[str, set[str]]) -> bool:
    if not types:
        return True
    seen = {types[0]}
    queue = deque([types[0]])
    while queue:
        current = queue.popleft()
        for nxt in adj[current]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(types)


def derive_ontology(kg: KnowledgeGraph) -> Ontology:
    """Project the instance graph onto its schema; deterministic lexicographic ordering."""
    types = tuple(sorted({n.node_type for n in kg.nodes}))
    relations = tuple(
        sorted({(kg.node(e.source).node_type, kg.node(e.target).node_type, e.relation) for e in kg.edges})
    )
    adj: dict[str, set[str]] = {t: set() for t in types}
    for src, dst, _rel in relations:
        adj[src].add(dst)
        adj[dst].add(src)
    return Ontology(types=types, relations=relations, connected=_type_graph_connected(types, adj))


@dataclass(frozen=True)
class DistanceMatrix:
    """Pairwise type-to-type hop counts on the undirected schema graph."""

    order: tuple[str, ...]
    d: np.ndarray

    def dist(self, a: str, b: str) -> float:
        return float(self.d[self.order.index(a), self.order.index(b)])


def distance_matrix(ontology: Ontology) -> DistanceMatrix:
    """All-pairs shortest hop counts between types.

    Pairs in different components get (largest finite distance) + 1 so downstream
    stress terms never divide by infinity.
    """
    if not ontology.types:
        raise ValueError("ontology has no types")
    order = tuple(ontology.types)
    n = len(order)
    adj = ontology.adjacency()
    d = np.full((n, n), np.inf)
    for i, start in enumerate(order):
        d[i, i] = 0.0
        dist = {start: 0}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for nxt in sorted(adj[current]):
                if nxt not in dist:
                    dist[nxt] = dist[current] + 1
                    queue.append(nxt)
        for t, hops in dist.items():
            d[i, order.index(t)] = float(hops)
    finite = d[np.isfinite(d)]
    penalty = (finite.max() if finite.size else 0.0) + 1.0
    d[~np.isfinite(d)] = penalty
    return DistanceMatrix(order=order, d=d)


@dataclass(frozen=True)
class InterestSubgraph:
    """Result of preference-driven retrieval: interest nodes, 1-hop connected nodes,
    the edges between the two sets, and the answer flags."""

    interest_nodes: tuple[Node, ...]
    connected_nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    answer_ids: frozenset[str]

    def node_ids(self) -> set[str]:
        return {n.id for n in self.interest_nodes} | {n.id for n in self.connected_nodes}


def query_instances(kg: KnowledgeGraph, pref: "UserPreference") -> InterestSubgraph:
    """Retrieve the interest set, its 1-hop connected-type neighbors, and induced edges.

    Only edges joining an interest node to a connected node are returned; edges
    inside either set are dropped.
    """
    interest = kg.nodes_of_type(pref.interest_type)
    if not interest:
        raise UnknownTypeError(pref.interest_type)
    interest = sorted(interest, key=lambda n: n.id)
    interest_ids = {n.id for n in interest}
    wanted_types = set(pref.connected_types)

    connected_ids: set[str] = set()
    edges: list[Edge] = []
    seen_edges: set[str] = set()
    for node in interest:
        for edge, other_id in kg.neighbors(node.id):
            if other_id in interest_ids:
                continue
            other = kg.node(other_id)
            if other.node_type not in wanted_types:
                continue
            connected_ids.add(other_id)
            if edge.id not in seen_edges:
                seen_edges.add(edge.id)
                edges.append(edge)

    target = canonical_value(pref.attribute_value)
    answers = frozenset(
        n.id
        for n in interest
        if pref.attribute in n.attributes and canonical_value(n.attributes[pref.attribute]) == target
    )
    return InterestSubgraph(
        interest_nodes=tuple(interest),
        connected_nodes=tuple(sorted((kg.node(i) for i in connected_ids), key=lambda n: n.id)),
        edges=tuple(sorted(edges, key=lambda e: e.id)),
        answer_ids=answers,
    )
