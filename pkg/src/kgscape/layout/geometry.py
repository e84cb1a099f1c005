"""Region partitioning, arc placement, radial spacing, hulls, and pie wedges."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..clustering import ClusterSet

Point = tuple[float, float]

HULL_PADDING = 8.0
STUB_SIDES = 16
REGION_RADIUS_FACTOR = 0.4
ARC_RADIUS_FACTOR = 0.7
MIN_REGION_FLOOR = 0.1


@dataclass(frozen=True)
class TypeRegion:
    type: str
    center: Point
    radius: float

    def contains(self, point: Point, slack: float = 0.0) -> bool:
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        return math.hypot(dx, dy) <= self.radius + slack

    def clamp(self, point: Point, factor: float = 0.98) -> Point:
        """Pull a point back inside the disc at factor * radius."""
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        dist = math.hypot(dx, dy)
        limit = self.radius * factor
        if dist <= limit or dist == 0.0:
            return point
        scale = limit / dist
        return (self.center[0] + dx * scale, self.center[1] + dy * scale)


def partition_regions(
    type_positions: Mapping[str, Point],
    counts: Mapping[str, int],
    *,
    spacing: float = 300.0,
) -> list[TypeRegion]:
    """Disjoint discs around the embedded type centers.

    Radii scale with sqrt(node count), capped at 0.4 of the minimum pairwise
    center distance so discs can never touch; the cap is hit by the largest
    region. Types with no displayed nodes keep a small floor radius.
    """
    types = sorted(type_positions)
    if not types:
        raise ValueError("no types to partition")
    if len(types) == 1:
        return [TypeRegion(type=types[0], center=type_positions[types[0]], radius=spacing)]

    min_dist = min(
        math.dist(type_positions[a], type_positions[b])
        for i, a in enumerate(types)
        for b in types[i + 1 :]
    )
    cap = REGION_RADIUS_FACTOR * min_dist
    max_count = max((counts.get(t, 0) for t in types), default=0)
    regions = []
    for t in types:
        if max_count > 0:
            radius = cap * math.sqrt(counts.get(t, 0) / max_count)
        else:
            radius = cap
        radius = max(radius, cap * MIN_REGION_FLOOR)
        regions.append(TypeRegion(type=t, center=type_positions[t], radius=radius))
    return regions


def place_cluster_centroids(
    cluster_set: ClusterSet,
    region: TypeRegion,
    *,
    toward: Point | None = None,
) -> dict[int, Point]:
    """Equally spaced centroids along a 180 degree arc at 0.7 region radius.

    The arc bulges away from `toward` (typically the nearest connected-type
    region) so its opening faces that region; cluster order follows the
    ClusterSet ordering. A single cluster sits at the region center.
    """
    ids = [c.id for c in cluster_set.clusters]
    if len(ids) == 1:
        return {ids[0]: region.center}
    if toward is not None and toward != region.center:
        azimuth = math.atan2(toward[1] - region.center[1], toward[0] - region.center[0])
    else:
        azimuth = 0.0
    start = azimuth + math.pi / 2.0
    arc_radius = ARC_RADIUS_FACTOR * region.radius
    step = math.pi / (len(ids) - 1)
    out = {}
    for j, cluster_id in enumerate(ids):
        angle = start + j * step
        out[cluster_id] = (
            region.center[0] + arc_radius * math.cos(angle),
            region.center[1] + arc_radius * math.sin(angle),
        )
    return out


def cluster_slot_radius(centroids: Mapping[int, Point], region: TypeRegion) -> dict[int, float]:
    """Radius of the disc each cluster may occupy: limited by the region border
    and by half the distance to the nearest other centroid."""
    out = {}
    for cid, center in centroids.items():
        border = region.radius - math.dist(center, region.center)
        nearest = min(
            (math.dist(center, other) for oid, other in centroids.items() if oid != cid),
            default=2.0 * region.radius,
        )
        out[cid] = max(min(border, nearest / 2.0), 1e-6)
    return out


def radial_radius(c_i: float, c_max: float, r_min: float, r_max: float) -> float:
    """Linear radial offset by connected-node count; c_max of zero degenerates to r_min."""
    if c_max <= 0:
        return r_min
    return r_min + (c_i / c_max) * (r_max - r_min)


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Monotone-chain convex hull, counter-clockwise, no repeated last point."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return list(pts)

    def cross(o: Point, a: Point, b: Point) -> float:
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def compute_hulls(
    members: Mapping[int, Sequence[str]],
    positions: Mapping[str, Point],
    radii: Mapping[str, float],
) -> dict[int, list[Point]]:
    """Offset convex hull per cluster.

    Every member center is expanded into a 16-gon of radius (max member radius
    + padding) and the hull is taken over the union, which both offsets the
    hull outward and yields the disc / capsule shape for 1 and 2 member
    clusters.
    """
    out: dict[int, list[Point]] = {}
    for cluster_id, member_ids in members.items():
        if not member_ids:
            raise ValueError(f"cluster {cluster_id} has no members")
        offset = max(radii.get(m, 0.0) for m in member_ids) + HULL_PADDING
        expanded: list[Point] = []
        for m in member_ids:
            x, y = positions[m]
            for s in range(STUB_SIDES):
                angle = 2.0 * math.pi * s / STUB_SIDES
                expanded.append((x + offset * math.cos(angle), y + offset * math.sin(angle)))
        out[cluster_id] = convex_hull(expanded)
    return out


def compute_pie_wedges(
    links: Mapping[str, Sequence[tuple[str, int]]],
) -> dict[str, list[tuple[int, float]]]:
    """Fraction of links per interest cluster for each connected node.

    Single-cluster nodes get one wedge of 1.0 (rendered solid); wedges are
    ordered by cluster id.
    """
    out: dict[str, list[tuple[int, float]]] = {}
    for node_id, node_links in links.items():
        if not node_links:
            raise ValueError(f"connected node {node_id} has no links")
        counts: dict[int, int] = {}
        for _interest_id, cluster_id in node_links:
            counts[cluster_id] = counts.get(cluster_id, 0) + 1
        total = sum(counts.values())
        out[node_id] = [(cid, counts[cid] / total) for cid in sorted(counts)]
    return out


def is_solid(pie: Sequence[tuple[int, float]]) -> bool:
    return len(pie) == 1
