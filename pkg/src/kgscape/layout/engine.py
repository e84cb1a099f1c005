"""Full layout pipeline: retrieval, clustering, sampling, and geometry passes
assembled into a renderable ContextLayout with canonical JSON export."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from ..clustering import ClusterSet, cluster_numeric, cluster_text, label_clusters
from ..config import EngineConfig
from ..context_ops import EmphasisState
from ..llm import LanguageModelClient
from ..model import (
    NUMERIC,
    InterestSubgraph,
    KnowledgeGraph,
    Ontology,
    distance_matrix,
    numeric_value,
    query_instances,
)
from ..preferences import UserPreference
from ..sampling import SampleResult, sample_interest_nodes
from .forces import AnnealSchedule, layout_connected_nodes, layout_interest_nodes, map_to_region, resolve_overlaps
from .geometry import (
    Point,
    TypeRegion,
    cluster_slot_radius,
    compute_hulls,
    compute_pie_wedges,
    partition_regions,
    place_cluster_centroids,
)
from .stress import arrange_ontology


@dataclass(frozen=True)
class ContextLayout:
    """The renderable artifact: regions, positions, cluster geometry, emphasis."""

    regions: tuple[TypeRegion, ...]
    positions: Mapping[str, Point]
    radii: Mapping[str, float]
    cluster_of: Mapping[str, int]
    centroids: Mapping[int, Point]
    hulls: Mapping[int, list[Point]]
    pies: Mapping[str, list[tuple[int, float]]]
    emphasis: EmphasisState
    seed: int
    iteration_trace: Mapping[str, list] = field(default_factory=dict)

    def region_for(self, type_name: str) -> TypeRegion:
        for region in self.regions:
            if region.type == type_name:
                return region
        raise KeyError(type_name)

    def with_emphasis(self, emphasis: EmphasisState) -> "ContextLayout":
        return replace(self, emphasis=emphasis)


@dataclass(frozen=True)
class PipelineResult:
    layout: ContextLayout
    cluster_set: ClusterSet
    displayed_clusters: ClusterSet
    sample: SampleResult
    subgraph: InterestSubgraph
    preference: UserPreference


def _interest_values(subgraph: InterestSubgraph, pref: UserPreference, kind: str):
    """(node id, value) pairs for clustering; nodes missing the attribute are
    collected separately and become a trailing catch-all cluster."""
    valued = []
    missing = []
    for node in subgraph.interest_nodes:
        if pref.attribute in node.attributes:
            raw = node.attributes[pref.attribute]
            if kind == NUMERIC:
                valued.append((node.id, numeric_value(raw)))
            else:
                valued.append((node.id, str(raw)))
        else:
            missing.append(node.id)
    return valued, missing


def _append_missing_cluster(cluster_set: ClusterSet, missing: Sequence[str], attribute: str) -> ClusterSet:
    if not missing:
        return cluster_set
    from ..clustering import Cluster

    next_id = len(cluster_set.clusters)
    extra = Cluster(
        id=next_id,
        member_ids=tuple(sorted(missing)),
        label=f"(no {attribute})",
        centroid_feature=None,
    )
    return ClusterSet(
        clusters=cluster_set.clusters + (extra,),
        attribute=cluster_set.attribute,
        kind=cluster_set.kind,
        values=cluster_set.values,
    )


def build_clusters(
    kg: KnowledgeGraph,
    subgraph: InterestSubgraph,
    pref: UserPreference,
    config: EngineConfig,
    client: LanguageModelClient | None = None,
) -> ClusterSet:
    """Cluster interest nodes by the preferred attribute and label the clusters."""
    kind = kg.attribute_kind(pref.interest_type, pref.attribute) or "text"
    valued, missing = _interest_values(subgraph, pref, kind)
    if not valued:
        raise ValueError(f"no interest node carries attribute {pref.attribute!r}")
    if kind == NUMERIC:
        clusters = cluster_numeric(
            valued, eps=config.clustering_eps, min_pts=config.clustering_min_pts, attribute=pref.attribute
        )
    else:
        clusters = cluster_text(
            valued,
            config.make_embedder(),
            k_max=config.clustering_kmax,
            seed=config.clustering_seed,
            attribute=pref.attribute,
        )
    clusters = label_clusters(clusters, client)
    return _append_missing_cluster(clusters, missing, pref.attribute)


def _interest_link_counts(subgraph: InterestSubgraph) -> dict[str, int]:
    counts = {n.id: 0 for n in subgraph.interest_nodes}
    for edge in subgraph.edges:
        if edge.source in counts:
            counts[edge.source] += 1
        if edge.target in counts:
            counts[edge.target] += 1
    return counts


def _nearest_connected_center(
    interest_region: TypeRegion, regions: Sequence[TypeRegion], connected_types: Sequence[str]
) -> Point | None:
    candidates = [r for r in regions if r.type in connected_types]
    if not candidates:
        return None
    nearest = min(candidates, key=lambda r: math.dist(r.center, interest_region.center))
    return nearest.center


def build_layout(
    kg: KnowledgeGraph,
    ontology: Ontology,
    pref: UserPreference,
    *,
    seed: int,
    config: EngineConfig | None = None,
    budget: int | None = None,
    sigma: float | None = None,
    client: LanguageModelClient | None = None,
) -> PipelineResult:
    """Run the full pipeline for one preference; deterministic for a fixed seed."""
    config = config or EngineConfig()
    budget = budget if budget is not None else config.sampling_budget
    sigma = sigma if sigma is not None else pref.diversity

    subgraph = query_instances(kg, pref)
    cluster_set = build_clusters(kg, subgraph, pref, config, client)
    link_counts = _interest_link_counts(subgraph)

    sample = sample_interest_nodes(
        cluster_set,
        set(subgraph.answer_ids),
        link_counts,
        budget,
        sigma,
        seed,
        attribute_value=pref.attribute_value,
    )
    sampled = set(sample.ids)
    displayed_clusters = cluster_set.restrict(sampled)

    # Connected nodes adjacent to a sampled interest node, capped for safety.
    links: dict[str, list[str]] = {}
    for edge in subgraph.edges:
        if edge.source in sampled:
            links.setdefault(edge.target, []).append(edge.source)
        elif edge.target in sampled:
            links.setdefault(edge.source, []).append(edge.target)
    if len(links) > config.connected_cap:
        keep = sorted(links, key=lambda n: (-len(links[n]), n))[: config.connected_cap]
        links = {n: links[n] for n in keep}
    for entries in links.values():
        entries.sort()

    connected_by_type: dict[str, list[str]] = {}
    for node_id in links:
        connected_by_type.setdefault(kg.node(node_id).node_type, []).append(node_id)

    counts = {t: 0 for t in ontology.types}
    counts[pref.interest_type] = len(sampled)
    for t, ids in connected_by_type.items():
        counts[t] = len(ids)

    dm = distance_matrix(ontology)
    type_positions = arrange_ontology(dm, config.spacing)
    regions = partition_regions(type_positions, counts, spacing=config.spacing)
    region_map = {r.type: r for r in regions}
    interest_region = region_map[pref.interest_type]

    toward = _nearest_connected_center(interest_region, regions, pref.connected_types)
    centroids = place_cluster_centroids(displayed_clusters, interest_region, toward=toward)
    slot_radii = cluster_slot_radius(centroids, interest_region)

    trace: dict[str, list] = {"interest": [], "connected": [], "overlap": []}
    cluster_of = displayed_clusters.cluster_of()
    schedule = AnnealSchedule.for_region(interest_region)
    positions: dict[str, Point] = {}
    positions.update(
        layout_interest_nodes(
            cluster_of,
            {n: link_counts.get(n, 0) for n in cluster_of},
            centroids,
            slot_radii,
            interest_region,
            schedule,
            seed,
            trace=trace["interest"],
        )
    )

    for offset, (type_name, ids) in enumerate(sorted(connected_by_type.items())):
        target_region = region_map[type_name]
        anchors = {
            nid: map_to_region(positions[nid], interest_region, target_region)
            for nid in sampled
        }
        type_links = {nid: links[nid] for nid in ids}
        type_schedule = AnnealSchedule.for_region(target_region)
        positions.update(
            layout_connected_nodes(
                type_links,
                anchors,
                target_region,
                type_schedule,
                seed + offset + 1,
                trace=trace["connected"],
            )
        )

    radii = {node_id: config.node_radius for node_id in positions}
    region_of = {}
    for node_id in positions:
        region_of[node_id] = region_map[kg.node(node_id).node_type]
    positions = resolve_overlaps(
        positions, radii, region_of=region_of, seed=seed, trace=trace["overlap"]
    )

    members: dict[int, list[str]] = {}
    for node_id, cid in cluster_of.items():
        members.setdefault(cid, []).append(node_id)
    hulls = compute_hulls(members, positions, radii)

    pie_links = {
        node_id: [(iid, cluster_of[iid]) for iid in node_links]
        for node_id, node_links in links.items()
        if node_id in positions
    }
    pies = compute_pie_wedges(pie_links)

    layout = ContextLayout(
        regions=tuple(sorted(regions, key=lambda r: r.type)),
        positions=positions,
        radii=radii,
        cluster_of=cluster_of,
        centroids=centroids,
        hulls=hulls,
        pies=pies,
        emphasis=EmphasisState.empty(),
        seed=seed,
        iteration_trace=trace,
    )
    return PipelineResult(
        layout=layout,
        cluster_set=cluster_set,
        displayed_clusters=displayed_clusters,
        sample=sample,
        subgraph=subgraph,
        preference=pref,
    )


def _round(value: float) -> float:
    return round(float(value), 6)


def export_layout(result_or_layout, displayed_clusters: ClusterSet | None = None) -> dict:
    """Layout as a plain JSON-ready dict with coordinates rounded to 1e-6."""
    if isinstance(result_or_layout, PipelineResult):
        layout = result_or_layout.layout
        displayed_clusters = result_or_layout.displayed_clusters
    else:
        layout = result_or_layout

    nodes = []
    for node_id in sorted(layout.positions):
        x, y = layout.positions[node_id]
        entry: dict = {"id": node_id, "x": _round(x), "y": _round(y), "r": _round(layout.radii[node_id])}
        if node_id in layout.cluster_of:
            entry["cluster"] = layout.cluster_of[node_id]
        if node_id in layout.pies:
            entry["pie"] = [
                {"cluster": cid, "frac": _round(frac)} for cid, frac in layout.pies[node_id]
            ]
        nodes.append(entry)

    emphasis = {
        "nodes": [
            {"id": nid, "scale": _round(scale)}
            for nid, scale in sorted(layout.emphasis.node_sizes.items())
        ],
        "edges": sorted(layout.emphasis.highlighted_edges),
        "bundles": [
            {
                "id": b.id,
                "anchor": [_round(b.anchor[0]), _round(b.anchor[1])],
                "edges": list(b.edge_ids),
                "expanded": b.expanded,
            }
            for b in layout.emphasis.bundles
        ],
        "paths": [
            {"criterion": p.criterion, "nodes": list(p.node_ids), "edges": list(p.edge_ids)}
            for p in layout.emphasis.highlighted_paths
        ],
    }

    out = {
        "seed": layout.seed,
        "regions": [
            {
                "type": r.type,
                "cx": _round(r.center[0]),
                "cy": _round(r.center[1]),
                "r": _round(r.radius),
            }
            for r in layout.regions
        ],
        "nodes": nodes,
        "hulls": [
            {
                "cluster": cid,
                "points": [[_round(x), _round(y)] for x, y in layout.hulls[cid]],
            }
            for cid in sorted(layout.hulls)
        ],
        "emphasis": emphasis,
    }
    if displayed_clusters is not None:
        out["clusters"] = [
            {"id": c.id, "label": c.label, "size": len(c.member_ids)}
            for c in displayed_clusters.clusters
        ]
    return out


def export_layout_json(result_or_layout, displayed_clusters: ClusterSet | None = None) -> str:
    """Canonical byte layout: sorted keys, compact separators."""
    return json.dumps(
        export_layout(result_or_layout, displayed_clusters), sort_keys=True, separators=(",", ":")
    )
