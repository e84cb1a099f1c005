from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgscape.fixtures import FIXTURE_MANIFEST
from kgscape.model import (
    GraphDocumentError,
    Ontology,
    UnknownTypeError,
    canonical_value,
    derive_ontology,
    distance_matrix,
    load_graph,
    query_instances,
    serialize_graph,
)
from kgscape.preferences import UserPreference


def minimal_document():
    return {
        "meta": {"name": "mini"},
        "nodes": [
            {"id": "n1", "type": "Paper", "label": "P one", "attributes": {"year": 2018}},
            {"id": "n2", "type": "Author", "label": "A one", "attributes": {}},
        ],
        "edges": [
            {"id": "e1", "source": "n1", "target": "n2", "relation": "writtenBy", "attributes": {}}
        ],
    }


class TestLoadGraph:
    def test_minimal_document(self):
        kg = load_graph(minimal_document())
        assert len(kg.nodes) == 2
        assert len(kg.edges) == 1

    def test_dangling_endpoint_rejected(self):
        doc = minimal_document()
        doc["edges"][0]["target"] = "ghost"
        with pytest.raises(GraphDocumentError, match="ghost"):
            load_graph(doc)

    def test_duplicate_node_id_rejected(self):
        doc = minimal_document()
        doc["nodes"].append(dict(doc["nodes"][0]))
        with pytest.raises(GraphDocumentError, match="duplicate"):
            load_graph(doc)

    def test_self_loop_rejected_by_default(self):
        doc = minimal_document()
        doc["edges"][0]["target"] = "n1"
        with pytest.raises(GraphDocumentError, match="self-loop"):
            load_graph(doc)
        assert len(load_graph(doc, allow_self_loops=True).edges) == 1

    def test_declared_numeric_with_text_value_rejected(self):
        doc = minimal_document()
        doc["meta"]["attribute_kinds"] = {"Paper": {"year": "numeric"}}
        doc["nodes"][0]["attributes"]["year"] = "about 2018"
        with pytest.raises(GraphDocumentError, match="mixed attribute kinds"):
            load_graph(doc)

    def test_kind_inference(self):
        doc = minimal_document()
        doc["nodes"][0]["attributes"]["title"] = "Graph study"
        kg = load_graph(doc)
        assert kg.attribute_kind("Paper", "year") == "numeric"
        assert kg.attribute_kind("Paper", "title") == "text"

    def test_academic_fixture_counts_match_manifest(self, academic_document):
        # Independent one-pass count over the raw document.
        counts: dict[str, int] = {}
        for node in academic_document["nodes"]:
            counts[node["type"]] = counts.get(node["type"], 0) + 1
        assert counts == FIXTURE_MANIFEST["types"]
        kg = load_graph(academic_document)
        for type_name, expected in FIXTURE_MANIFEST["types"].items():
            assert len(kg.nodes_of_type(type_name)) == expected

    def test_round_trip_is_fixed_point(self, academic_document):
        kg = load_graph(academic_document)
        doc1 = serialize_graph(kg)
        doc2 = serialize_graph(load_graph(doc1))
        assert doc1 == doc2


class TestCanonicalValue:
    def test_numeric_normalization(self):
        assert canonical_value(2018) == "2018"
        assert canonical_value("2,018.0") == "2018"
        assert canonical_value(" 40.5 ") == "40.5"
        assert canonical_value("Tier A") == "Tier A"
        assert canonical_value({"value": 12, "unit": "year"}) == "12"


class TestDeriveOntology:
    def test_direct_projection(self):
        kg = load_graph(minimal_document())
        onto = derive_ontology(kg)
        assert onto.types == ("Author", "Paper")
        assert onto.relations == (("Paper", "Author", "writtenBy"),)

    def test_empty_graph(self):
        onto = derive_ontology(load_graph({"meta": {}, "nodes": [], "edges": []}))
        assert onto.types == ()
        assert onto.relations == ()

    def test_academic_fixture_manifest(self, academic_kg):
        onto = derive_ontology(academic_kg)
        assert len(onto.types) == len(FIXTURE_MANIFEST["types"])
        assert sorted({r for _, _, r in onto.relations}) == FIXTURE_MANIFEST["relations"]


def _bfs_oracle(types, adjacency, start):
    from collections import deque

    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in adjacency[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


class TestDistanceMatrix:
    def test_path_ontology(self):
        onto = Ontology(
            types=("A", "B", "C"),
            relations=(("A", "B", "r"), ("B", "C", "r")),
            connected=True,
        )
        dm = distance_matrix(onto)
        assert dm.dist("A", "C") == 2.0
        assert dm.dist("A", "B") == 1.0

    def test_zero_diagonal(self):
        onto = Ontology(types=("A", "B"), relations=(("A", "B", "r"),), connected=True)
        dm = distance_matrix(onto)
        assert dm.dist("A", "A") == 0.0

    def test_disconnected_penalty(self):
        # Path A-B-C-D (max finite 3) plus isolated pair E-F.
        onto = Ontology(
            types=("A", "B", "C", "D", "E", "F"),
            relations=(("A", "B", "r"), ("B", "C", "r"), ("C", "D", "r"), ("E", "F", "r")),
            connected=False,
        )
        dm = distance_matrix(onto)
        assert dm.dist("A", "D") == 3.0
        assert dm.dist("A", "E") == 4.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=2, max_value=15), st.randoms(use_true_random=False))
    def test_symmetric_zero_diagonal_property(self, n, rnd):
        types = tuple(f"T{i}" for i in range(n))
        edges = []
        for i in range(1, n):
            j = rnd.randrange(i)
            edges.append((types[j], types[i], "r"))
        extra = rnd.randrange(0, n)
        for _ in range(extra):
            a, b = rnd.sample(range(n), 2)
            edges.append((types[min(a, b)], types[max(a, b)], "r"))
        onto = Ontology(types=types, relations=tuple(sorted(set(edges))), connected=True)
        dm = distance_matrix(onto)
        assert np.allclose(dm.d, dm.d.T)
        assert np.all(np.diag(dm.d) == 0)
        adjacency = {t: set() for t in types}
        for s, t, _ in onto.relations:
            adjacency[s].add(t)
            adjacency[t].add(s)
        for start in types:
            oracle = _bfs_oracle(types, adjacency, start)
            for other in types:
                assert dm.dist(start, other) == oracle[other]


class TestQueryInstances:
    def test_2018_papers_and_authors(self, academic_kg):
        pref = UserPreference("Paper", "year", "2018", ("Author",))
        sub = query_instances(academic_kg, pref)
        assert len(sub.interest_nodes) == 40
        assert all(n.node_type == "Author" for n in sub.connected_nodes)
        flagged = {n.id for n in sub.interest_nodes if n.id in sub.answer_ids}
        expected = {
            n.id
            for n in academic_kg.nodes_of_type("Paper")
            if n.attributes.get("year") == 2018
        }
        assert flagged == expected and flagged

    def test_empty_connected_types(self, academic_kg):
        pref = UserPreference("Paper", "year", "2018", ())
        sub = query_instances(academic_kg, pref)
        assert sub.connected_nodes == ()
        assert sub.edges == ()

    def test_connected_sizes_match_adjacency_scan(self, academic_kg, academic_document):
        pref = UserPreference("Paper", "year", "2016", ("Author", "Concept"))
        sub = query_instances(academic_kg, pref)
        # Independent scan over the raw document.
        types = {n["id"]: n["type"] for n in academic_document["nodes"]}
        connected = set()
        for edge in academic_document["edges"]:
            s_type, t_type = types[edge["source"]], types[edge["target"]]
            if s_type == "Paper" and t_type in ("Author", "Concept"):
                connected.add(edge["target"])
            elif t_type == "Paper" and s_type in ("Author", "Concept"):
                connected.add(edge["source"])
        assert {n.id for n in sub.connected_nodes} == connected

    def test_unknown_interest_type(self, academic_kg):
        pref = UserPreference("Planet", "year", "2018", ())
        with pytest.raises(UnknownTypeError):
            query_instances(academic_kg, pref)

    def test_edges_join_interest_to_connected_only(self, academic_kg):
        pref = UserPreference("Paper", "year", "2018", ("Author",))
        sub = query_instances(academic_kg, pref)
        interest = {n.id for n in sub.interest_nodes}
        connected = {n.id for n in sub.connected_nodes}
        for edge in sub.edges:
            assert (edge.source in interest) != (edge.source in connected)
            sides = {edge.source in interest, edge.target in interest}
            assert sides == {True, False}
