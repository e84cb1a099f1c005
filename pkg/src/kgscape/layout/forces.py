"""Annealed force refinement: centroid-anchored interest passes, pseudo-anchor
connected passes, and pairwise overlap resolution.

The force model is the classic pair: repulsion k^2/d between displayed nodes,
attraction d^2/k along pseudo-edges only (a node's own cluster centroid in the
interest pass, its fixed pseudo-interest anchors in the connected pass).
Per-iteration displacement is capped by a temperature that starts at one eighth
of the squared region diameter and decays by 0.94 per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .geometry import Point, TypeRegion, radial_radius

CLAMP_FACTOR = 0.98
R_MIN_FACTOR = 0.15
R_MAX_FACTOR = 0.85
JITTER_LIMIT = 2.0
OVERLAP_MARGIN = 2.0
OVERLAP_MIN_MOVE = 0.5
# The connected pass scales only its repulsion constant below the region-based
# area/sqrt(n) value; attraction keeps the full k (step stability depends on
# it), while weaker repulsion keeps anchor sub-clusters tight relative to the
# inter-group spacing.
CONNECTED_REPULSION_FACTOR = 0.4


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float
    decay: float = 0.94
    main_iterations: int = 100
    connected_iterations: int = 80
    connected_t_scale: float = 0.2
    overlap_iterations_max: int = 10

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")

    @classmethod
    def for_region(cls, region: TypeRegion, **overrides) -> "AnnealSchedule":
        """Initial temperature from the active region: (diameter^2) / 8."""
        return cls(t0=(2.0 * region.radius) ** 2 / 8.0, **overrides)


def _cap_displacements(disp: np.ndarray, limit: float) -> np.ndarray:
    lengths = np.linalg.norm(disp, axis=1)
    factor = np.ones(len(disp))
    over = lengths > limit
    factor[over] = limit / lengths[over]
    return disp * factor[:, None]


def _repulsion(P: np.ndarray, k_per_node: np.ndarray) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    dist = np.maximum(dist, 1e-9)
    strength = (k_per_node[:, None] ** 2) / dist
    return (diff / dist[:, :, None] * strength[:, :, None]).sum(axis=1)


def layout_interest_nodes(
    cluster_of: Mapping[str, int],
    link_counts: Mapping[str, int],
    centroids: Mapping[int, Point],
    slot_radii: Mapping[int, float],
    region: TypeRegion,
    schedule: AnnealSchedule,
    seed: int,
    trace: list[dict] | None = None,
) -> dict[str, Point]:
    """Position interest nodes inside their cluster slots.

    Nodes start on a ring around their centroid whose radius encodes their
    connected-node count, then anneal under global repulsion and a pseudo-edge
    pull to their own fixed centroid. Positions are clamped to the cluster slot
    disc every iteration, which keeps every node strictly inside its slot.
    """
    ids = sorted(cluster_of)
    if not ids:
        return {}

    c_max: dict[int, int] = {}
    for node_id, cid in cluster_of.items():
        c_max[cid] = max(c_max.get(cid, 0), link_counts.get(node_id, 0))
    sizes: dict[int, int] = {}
    for cid in cluster_of.values():
        sizes[cid] = sizes.get(cid, 0) + 1

    # Angles are spread uniformly around each centroid (members in id order),
    # with a seeded per-cluster rotation; symmetric configurations stay
    # symmetric under the force loop.
    member_index: dict[str, int] = {}
    per_cluster_seen: dict[int, int] = {}
    for node_id in ids:
        cid = cluster_of[node_id]
        member_index[node_id] = per_cluster_seen.get(cid, 0)
        per_cluster_seen[cid] = member_index[node_id] + 1
    rotations = {
        cid: float(np.random.default_rng(seed + cid).uniform(0.0, 2.0 * math.pi))
        for cid in sizes
    }

    P = np.empty((len(ids), 2))
    k_per_node = np.empty(len(ids))
    centers = np.empty((len(ids), 2))
    slot_limit = np.empty(len(ids))
    for i, node_id in enumerate(ids):
        cid = cluster_of[node_id]
        slot = slot_radii[cid]
        r = radial_radius(
            link_counts.get(node_id, 0), c_max[cid], R_MIN_FACTOR * slot, R_MAX_FACTOR * slot
        )
        angle = rotations[cid] + 2.0 * math.pi * member_index[node_id] / sizes[cid]
        cx, cy = centroids[cid]
        P[i] = (cx + r * math.cos(angle), cy + r * math.sin(angle))
        centers[i] = (cx, cy)
        k_per_node[i] = slot / math.sqrt(sizes[cid])
        slot_limit[i] = slot * CLAMP_FACTOR

    t = schedule.t0
    for _ in range(schedule.main_iterations):
        disp = _repulsion(P, k_per_node)
        to_center = centers - P
        dist = np.linalg.norm(to_center, axis=1)
        pull = np.where(dist > 1e-9, (dist ** 2) / k_per_node / np.maximum(dist, 1e-9), 0.0)
        disp += to_center * pull[:, None]
        disp = _cap_displacements(disp, t)
        P += disp
        offset = P - centers
        lengths = np.linalg.norm(offset, axis=1)
        over = lengths > slot_limit
        if over.any():
            P[over] = centers[over] + offset[over] * (slot_limit[over] / lengths[over])[:, None]
        if trace is not None:
            trace.append({"t": t, "max_disp": float(np.linalg.norm(disp, axis=1).max())})
        t *= schedule.decay
    return {node_id: (float(x), float(y)) for node_id, (x, y) in zip(ids, P)}


def map_to_region(point: Point, source: TypeRegion, target: TypeRegion) -> Point:
    """Similarity transform taking the source disc onto the target disc."""
    scale = target.radius / source.radius
    return (
        target.center[0] + (point[0] - source.center[0]) * scale,
        target.center[1] + (point[1] - source.center[1]) * scale,
    )


def layout_connected_nodes(
    links: Mapping[str, Sequence[str]],
    anchors: Mapping[str, Point],
    region: TypeRegion,
    schedule: AnnealSchedule,
    seed: int,
    trace: list[dict] | None = None,
) -> dict[str, Point]:
    """Position connected nodes near their fixed pseudo-interest anchors.

    Initialization is the mean of a node's anchors plus a small seeded jitter;
    the anneal runs the connected pass length at a fifth of the region
    temperature, with attraction along links to anchors and repulsion between
    connected nodes only.
    """
    ids = sorted(links)
    if not ids:
        return {}
    for node_id in ids:
        if not links[node_id]:
            raise ValueError(f"connected node {node_id} has no links")
    rng = np.random.default_rng(seed)

    k = region.radius / math.sqrt(len(ids))
    P = np.empty((len(ids), 2))
    for i, node_id in enumerate(ids):
        pts = np.array([anchors[a] for a in links[node_id]])
        jitter_r = JITTER_LIMIT * math.sqrt(rng.uniform())
        jitter_a = rng.uniform(0.0, 2.0 * math.pi)
        P[i] = pts.mean(axis=0) + (jitter_r * math.cos(jitter_a), jitter_r * math.sin(jitter_a))

    anchor_arrays = [np.array([anchors[a] for a in links[node_id]]) for node_id in ids]
    k_per_node = np.full(len(ids), CONNECTED_REPULSION_FACTOR * k)

    t = schedule.t0 * schedule.connected_t_scale
    for _ in range(schedule.connected_iterations):
        disp = _repulsion(P, k_per_node)
        for i in range(len(ids)):
            delta = anchor_arrays[i] - P[i]
            dist = np.linalg.norm(delta, axis=1)
            mask = dist > 1e-9
            if mask.any():
                disp[i] += ((delta[mask] / dist[mask, None]) * ((dist[mask] ** 2) / k)[:, None]).sum(
                    axis=0
                )
        disp = _cap_displacements(disp, t)
        P += disp
        for i in range(len(ids)):
            P[i] = region.clamp((float(P[i, 0]), float(P[i, 1])), CLAMP_FACTOR)
        if trace is not None:
            trace.append({"t": t, "max_disp": float(np.linalg.norm(disp, axis=1).max())})
        t *= schedule.decay
    return {node_id: (float(x), float(y)) for node_id, (x, y) in zip(ids, P)}


def resolve_overlaps(
    positions: Mapping[str, Point],
    radii: Mapping[str, float],
    *,
    region_of: Mapping[str, TypeRegion] | None = None,
    seed: int = 0,
    max_iterations: int = 10,
    margin: float = OVERLAP_MARGIN,
    trace: list[float] | None = None,
) -> dict[str, Point]:
    """Push overlapping pairs apart symmetrically, half the deficit each.

    Coincident centers separate along a seeded unit vector. Runs up to
    max_iterations, stopping early once the largest displacement falls under
    half a layout unit; nodes are re-clamped to their regions each iteration.
    """
    ids = sorted(positions)
    pos = {i: (float(positions[i][0]), float(positions[i][1])) for i in ids}
    rng = np.random.default_rng(seed)
    for _ in range(max_iterations):
        moved: dict[str, list[float]] = {i: [0.0, 0.0] for i in ids}
        for a_idx in range(len(ids)):
            for b_idx in range(a_idx + 1, len(ids)):
                a, b = ids[a_idx], ids[b_idx]
                ax, ay = pos[a]
                bx, by = pos[b]
                dx, dy = bx - ax, by - ay
                dist = math.hypot(dx, dy)
                target = radii.get(a, 0.0) + radii.get(b, 0.0) + margin
                if dist >= target:
                    continue
                if dist < 1e-9:
                    angle = rng.uniform(0.0, 2.0 * math.pi)
                    ux, uy = math.cos(angle), math.sin(angle)
                else:
                    ux, uy = dx / dist, dy / dist
                push = (target - dist) / 2.0
                moved[a][0] -= ux * push
                moved[a][1] -= uy * push
                moved[b][0] += ux * push
                moved[b][1] += uy * push
        max_move = 0.0
        for i in ids:
            mx, my = moved[i]
            if mx or my:
                new = (pos[i][0] + mx, pos[i][1] + my)
                if region_of is not None and i in region_of:
                    new = region_of[i].clamp(new, CLAMP_FACTOR)
                max_move = max(max_move, math.dist(pos[i], new))
                pos[i] = new
        if trace is not None:
            trace.append(max_move)
        if max_move < OVERLAP_MIN_MOVE:
            break
    return pos
