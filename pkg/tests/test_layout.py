from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgscape.clustering import Cluster, ClusterSet
from kgscape.fixtures import random_fixture_document
from kgscape.layout.engine import build_layout, export_layout_json
from kgscape.layout.forces import (
    AnnealSchedule,
    layout_connected_nodes,
    layout_interest_nodes,
    map_to_region,
    resolve_overlaps,
)
from kgscape.layout.geometry import (
    TypeRegion,
    cluster_slot_radius,
    compute_hulls,
    compute_pie_wedges,
    convex_hull,
    partition_regions,
    place_cluster_centroids,
    radial_radius,
)
from kgscape.layout.stress import arrange_ontology, normalized_stress
from kgscape.model import Ontology, derive_ontology, distance_matrix, load_graph
from kgscape.preferences import UserPreference

from conftest import point_in_polygon


def line_ontology(names):
    relations = tuple((a, b, "r") for a, b in zip(names, names[1:]))
    return Ontology(types=tuple(sorted(names)), relations=relations, connected=True)


class TestArrangeOntology:
    def test_two_types_exact_spacing(self):
        dm = distance_matrix(line_ontology(["A", "B"]))
        pos = arrange_ontology(dm, 300.0)
        assert math.dist(pos["A"], pos["B"]) == pytest.approx(300.0, abs=1e-6)

    def test_path_ratio_close_to_two(self):
        dm = distance_matrix(line_ontology(["A", "B", "C"]))
        pos = arrange_ontology(dm, 300.0)
        ratio = math.dist(pos["A"], pos["C"]) / math.dist(pos["A"], pos["B"])
        assert 1.8 <= ratio <= 2.0 + 1e-9

    def test_single_type_at_origin(self):
        onto = Ontology(types=("Solo",), relations=(), connected=True)
        pos = arrange_ontology(distance_matrix(onto), 300.0)
        assert pos == {"Solo": (0.0, 0.0)}

    def test_centroid_at_origin(self):
        dm = distance_matrix(line_ontology(["A", "B", "C", "D"]))
        pos = arrange_ontology(dm, 250.0)
        xs = [p[0] for p in pos.values()]
        ys = [p[1] for p in pos.values()]
        assert abs(sum(xs)) < 1e-6 and abs(sum(ys)) < 1e-6

    def test_low_stress_on_small_trees(self):
        rnd = random.Random(0)
        for _ in range(10):
            n = rnd.randint(3, 8)
            names = [f"T{i}" for i in range(n)]
            edges = [(names[rnd.randrange(i)], names[i], "r") for i in range(1, n)]
            onto = Ontology(types=tuple(sorted(names)), relations=tuple(edges), connected=True)
            dm = distance_matrix(onto)
            pos = arrange_ontology(dm, 300.0)
            assert normalized_stress(pos, dm, 300.0) <= 0.05


class TestPartitionRegions:
    def test_two_types_rule(self):
        regions = partition_regions({"A": (0.0, 0.0), "B": (300.0, 0.0)}, {"A": 5, "B": 5})
        assert all(r.radius <= 120.0 + 1e-9 for r in regions)
        a, b = regions
        assert math.dist(a.center, b.center) > a.radius + b.radius

    def test_equal_counts_equal_radii(self):
        regions = partition_regions(
            {"A": (0.0, 0.0), "B": (300.0, 0.0), "C": (150.0, 260.0)},
            {"A": 9, "B": 9, "C": 9},
        )
        radii = {r.radius for r in regions}
        assert len(radii) == 1

    def test_three_type_fixture_no_overlaps(self):
        rnd = random.Random(1)
        for _ in range(20):
            positions = {f"T{i}": (rnd.uniform(-500, 500), rnd.uniform(-500, 500)) for i in range(3)}
            counts = {t: rnd.randint(1, 50) for t in positions}
            regions = partition_regions(positions, counts)
            # Exhaustive pairwise scan.
            for i, a in enumerate(regions):
                for b in regions[i + 1 :]:
                    assert math.dist(a.center, b.center) > a.radius + b.radius

    def test_single_type_radius_is_spacing(self):
        regions = partition_regions({"A": (3.0, 4.0)}, {"A": 10}, spacing=300.0)
        assert regions[0].radius == 300.0


def cluster_set_of(sizes):
    clusters = tuple(
        Cluster(id=i, member_ids=tuple(f"c{i}m{j}" for j in range(s)), label=str(i), centroid_feature=float(i))
        for i, s in enumerate(sizes)
    )
    return ClusterSet(clusters, attribute="v", kind="numeric", values={})


class TestArcPlacement:
    def test_single_cluster_at_center(self):
        region = TypeRegion("T", (10.0, -4.0), 100.0)
        centroids = place_cluster_centroids(cluster_set_of([4]), region)
        assert centroids[0] == region.center

    def test_three_clusters_quarter_spacing(self):
        region = TypeRegion("T", (0.0, 0.0), 100.0)
        centroids = place_cluster_centroids(cluster_set_of([2, 2, 2]), region)
        angles = []
        for cid in (0, 1, 2):
            x, y = centroids[cid]
            angles.append(math.atan2(y, x))
        rel = [(a - angles[0]) % (2 * math.pi) for a in angles]
        assert rel[0] == pytest.approx(0.0)
        assert rel[1] == pytest.approx(math.pi / 2, abs=1e-9)
        assert rel[2] == pytest.approx(math.pi, abs=1e-9)
        for cid in (0, 1, 2):
            assert math.dist(centroids[cid], region.center) == pytest.approx(70.0)

    def test_five_clusters_equal_chords(self):
        region = TypeRegion("T", (0.0, 0.0), 80.0)
        centroids = place_cluster_centroids(cluster_set_of([1] * 5), region)
        chords = [
            math.dist(centroids[i], centroids[i + 1]) for i in range(4)
        ]
        expected = 2 * 0.7 * 80.0 * math.sin(math.pi / 8)  # chord formula check
        for chord in chords:
            assert chord == pytest.approx(expected, abs=1e-6)
            assert chord == pytest.approx(chords[0], abs=1e-6)

    def test_arc_order_matches_cluster_order(self):
        region = TypeRegion("T", (0.0, 0.0), 90.0)
        toward = (500.0, 120.0)
        centroids = place_cluster_centroids(cluster_set_of([1] * 6), region, toward=toward)
        start = math.atan2(centroids[0][1], centroids[0][0])
        unwrapped = []
        for cid in range(6):
            x, y = centroids[cid]
            unwrapped.append((math.atan2(y, x) - start) % (2 * math.pi))
        assert unwrapped == sorted(unwrapped)


class TestRadialRadius:
    def test_endpoints(self):
        assert radial_radius(10, 10, 5.0, 60.0) == 60.0
        assert radial_radius(0, 10, 5.0, 60.0) == 5.0

    def test_direct_arithmetic(self):
        assert radial_radius(3, 10, 10.0, 60.0) == pytest.approx(25.0, abs=1e-12)

    def test_degenerate_cmax(self):
        assert radial_radius(0, 0, 7.0, 50.0) == 7.0

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(min_value=0, max_value=1000),
        st.integers(min_value=1, max_value=1000),
        st.floats(min_value=0, max_value=100, allow_nan=False),
        st.floats(min_value=0, max_value=100, allow_nan=False),
    )
    def test_formula_exact(self, c_i, c_max, r_min, extra):
        c_i = min(c_i, c_max)
        r_max = r_min + extra
        expected = r_min + (c_i / c_max) * (r_max - r_min)
        assert abs(radial_radius(c_i, c_max, r_min, r_max) - expected) <= 1e-9


class TestInterestPass:
    def region(self):
        return TypeRegion("T", (0.0, 0.0), 120.0)

    def test_single_node_stays_near_centroid(self):
        region = self.region()
        schedule = AnnealSchedule.for_region(region)
        positions = layout_interest_nodes(
            {"solo": 0}, {"solo": 3}, {0: region.center}, {0: region.radius}, region, schedule, seed=1
        )
        r_max = 0.85 * region.radius
        assert math.dist(positions["solo"], region.center) <= r_max + 1e-9

    def test_two_identical_nodes_symmetric(self):
        region = self.region()
        schedule = AnnealSchedule.for_region(region)
        positions = layout_interest_nodes(
            {"a": 0, "b": 0},
            {"a": 4, "b": 4},
            {0: region.center},
            {0: region.radius},
            region,
            schedule,
            seed=3,
        )
        mid = (
            (positions["a"][0] + positions["b"][0]) / 2,
            (positions["a"][1] + positions["b"][1]) / 2,
        )
        assert math.dist(mid, region.center) / region.radius <= 1e-3

    def test_three_by_ten_fixture_strictly_inside_slots(self):
        region = self.region()
        cs = cluster_set_of([10, 10, 10])
        centroids = place_cluster_centroids(cs, region)
        slots = cluster_slot_radius(centroids, region)
        cluster_of = {m: c.id for c in cs.clusters for m in c.member_ids}
        links = {m: (i % 5) for i, m in enumerate(sorted(cluster_of))}
        schedule = AnnealSchedule.for_region(region)
        positions = layout_interest_nodes(
            cluster_of, links, centroids, slots, region, schedule, seed=9
        )
        for node_id, pos in positions.items():
            cid = cluster_of[node_id]
            assert math.dist(pos, centroids[cid]) < slots[cid]

    def test_trace_temperature_decays_by_constant_factor(self):
        region = self.region()
        schedule = AnnealSchedule.for_region(region)
        trace: list[dict] = []
        layout_interest_nodes(
            {"a": 0, "b": 0, "c": 0},
            {"a": 1, "b": 2, "c": 3},
            {0: region.center},
            {0: region.radius},
            region,
            schedule,
            seed=0,
            trace=trace,
        )
        assert len(trace) == schedule.main_iterations
        assert trace[0]["t"] == pytest.approx((2 * region.radius) ** 2 / 8.0)
        for prev, cur in zip(trace, trace[1:]):
            assert cur["t"] == pytest.approx(prev["t"] * 0.94, rel=1e-12)
            assert cur["t"] < prev["t"]


class TestConnectedPass:
    def test_single_link_lands_near_anchor(self):
        region = TypeRegion("C", (400.0, 0.0), 100.0)
        schedule = AnnealSchedule.for_region(region)
        anchor = (420.0, 10.0)
        positions = layout_connected_nodes(
            {"n": ["a1"]}, {"a1": anchor}, region, schedule, seed=2
        )
        k = region.radius / 1.0
        assert math.dist(positions["n"], anchor) <= k

    def test_equal_links_on_perpendicular_bisector(self):
        region = TypeRegion("C", (0.0, 0.0), 100.0)
        schedule = AnnealSchedule.for_region(region)
        a, b = (-30.0, 0.0), (30.0, 0.0)
        positions = layout_connected_nodes(
            {"n": ["a1", "a2"]}, {"a1": a, "a2": b}, region, schedule, seed=4
        )
        lateral = abs(positions["n"][0])  # bisector is x = 0
        assert lateral / math.dist(a, b) <= 1e-2

    def test_map_to_region_similarity_transform(self):
        src = TypeRegion("A", (0.0, 0.0), 100.0)
        dst = TypeRegion("B", (500.0, 200.0), 50.0)
        assert map_to_region((0.0, 0.0), src, dst) == (500.0, 200.0)
        assert map_to_region((100.0, 0.0), src, dst) == (550.0, 200.0)
        assert map_to_region((0.0, -40.0), src, dst) == (500.0, 180.0)


class TestResolveOverlaps:
    def test_two_body_push_apart(self):
        positions = {"a": (0.0, 0.0), "b": (6.0, 0.0)}
        out = resolve_overlaps(positions, {"a": 5.0, "b": 5.0})
        assert math.dist(out["a"], out["b"]) >= 12.0 - 1e-9

    def test_no_overlap_is_fixed_point(self):
        positions = {"a": (0.0, 0.0), "b": (50.0, 0.0)}
        out = resolve_overlaps(positions, {"a": 5.0, "b": 5.0})
        assert out == positions

    def test_coincident_nodes_separate(self):
        positions = {"a": (1.0, 1.0), "b": (1.0, 1.0)}
        out = resolve_overlaps(positions, {"a": 4.0, "b": 4.0}, seed=7)
        assert math.dist(out["a"], out["b"]) > 0.0


class TestHullsAndPies:
    def test_triangle_hull_contains_members(self):
        positions = {"a": (0.0, 0.0), "b": (40.0, 0.0), "c": (20.0, 30.0)}
        hulls = compute_hulls({0: ["a", "b", "c"]}, positions, {k: 5.0 for k in positions})
        for p in positions.values():
            assert point_in_polygon(hulls[0], p)

    def test_single_member_sixteen_gon(self):
        hulls = compute_hulls({0: ["a"]}, {"a": (10.0, 10.0)}, {"a": 5.0})
        poly = hulls[0]
        assert len(poly) == 16
        for x, y in poly:
            assert math.dist((x, y), (10.0, 10.0)) == pytest.approx(13.0)  # 5 + 8 padding

    def test_convex_hull_monotone_chain(self):
        pts = [(0, 0), (10, 0), (10, 10), (0, 10), (5, 5), (2, 8)]
        hull = convex_hull(pts)
        assert sorted(hull) == [(0.0, 0.0), (0.0, 10.0), (10.0, 0.0), (10.0, 10.0)]

    def test_pie_fractions(self):
        pies = compute_pie_wedges(
            {
                "even": [("i1", 0), ("i2", 0), ("i3", 1), ("i4", 1)],
                "solid": [("i1", 2), ("i2", 2)],
                "quarter": [("i1", 0), ("i2", 1), ("i3", 1), ("i4", 1)],
            }
        )
        assert pies["even"] == [(0, 0.5), (1, 0.5)]
        assert pies["solid"] == [(2, 1.0)]
        assert pies["quarter"] == [(0, 0.25), (1, 0.75)]
        for pie in pies.values():
            assert abs(sum(f for _, f in pie) - 1.0) <= 1e-9


class TestFullPipeline:
    def test_deterministic_export(self, academic_kg, academic_ontology, paper_2018_pref):
        a = export_layout_json(
            build_layout(academic_kg, academic_ontology, paper_2018_pref, seed=11)
        )
        b = export_layout_json(
            build_layout(academic_kg, academic_ontology, paper_2018_pref, seed=11)
        )
        assert a == b

    def test_region_containment(self, academic_kg, academic_ontology, paper_2018_pref):
        result = build_layout(academic_kg, academic_ontology, paper_2018_pref, seed=5)
        regions = {r.type: r for r in result.layout.regions}
        for node_id, pos in result.layout.positions.items():
            region = regions[academic_kg.node(node_id).node_type]
            assert math.dist(pos, region.center) <= region.radius

    def test_hull_containment(self, academic_kg, academic_ontology, paper_2018_pref):
        result = build_layout(academic_kg, academic_ontology, paper_2018_pref, seed=5)
        for cid, members in result.displayed_clusters.member_map().items():
            for m in members:
                assert point_in_polygon(result.layout.hulls[cid], result.layout.positions[m])

    def test_arc_order_preserved(self, academic_kg, academic_ontology, paper_2018_pref):
        result = build_layout(academic_kg, academic_ontology, paper_2018_pref, seed=5)
        layout = result.layout
        region = layout.region_for("Paper")
        ordered = [c.id for c in result.displayed_clusters.clusters]
        angles = []
        for cid in ordered:
            x, y = layout.centroids[cid]
            angles.append(math.atan2(y - region.center[1], x - region.center[0]))
        start = angles[0]
        unwrapped = [(a - start) % (2 * math.pi) for a in angles]
        assert unwrapped == sorted(unwrapped)

    def test_random_fixture_pipeline(self):
        doc = random_fixture_document(3)
        kg = load_graph(doc)
        onto = derive_ontology(kg)
        pref = UserPreference("T0", "value", "10", ("T1", "T2"))
        result = build_layout(kg, onto, pref, seed=2)
        regions = {r.type: r for r in result.layout.regions}
        for node_id, pos in result.layout.positions.items():
            region = regions[kg.node(node_id).node_type]
            assert math.dist(pos, region.center) <= region.radius
