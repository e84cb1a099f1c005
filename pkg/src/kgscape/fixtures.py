"""Bundled synthetic fixtures: an academic graph, generators for random graphs,
and the 40-question template corpus used to exercise preference extraction.

Everything here is deterministic; the academic fixture always produces the
same document and FIXTURE_MANIFEST records its intended shape.
"""

from __future__ import annotations

import json
import random
from typing import Any

from .model import KnowledgeGraph, load_graph

FIXTURE_MANIFEST = {
    "name": "academic",
    "types": {"Paper": 40, "Author": 60, "Concept": 20},
    "relations": ["cites", "hasConcept", "writtenBy"],
}

_TOPIC_WORDS = [
    "graph", "layout", "volume", "flow", "color", "network", "terrain", "scatter",
    "uncertainty", "stream", "tree", "glyph", "interaction", "perception", "map",
    "timeline", "cluster", "embedding", "lens", "field",
]

_FIRST = ["Ada", "Ben", "Cora", "Dev", "Elif", "Femi", "Gail", "Hugo", "Iris", "Jun",
          "Kira", "Liam", "Mona", "Nils", "Ola", "Pia", "Quin", "Rosa", "Sem", "Tova"]
_LAST = ["Alder", "Brook", "Cedar", "Dune", "Elm", "Fern", "Grove", "Heath", "Isle",
         "Juniper", "Kelp", "Loch", "Moor", "Nettle", "Oak"]


def academic_fixture_document() -> dict[str, Any]:
    """40 papers, 60 authors, 20 concepts with writtenBy / hasConcept / cites edges."""
    rng = random.Random(7)
    nodes = []
    edges = []

    concepts = []
    for i in range(20):
        cid = f"c{i:02d}"
        concepts.append(cid)
        nodes.append(
            {
                "id": cid,
                "type": "Concept",
                "label": f"{_TOPIC_WORDS[i].title()} Methods",
                "attributes": {"name": _TOPIC_WORDS[i]},
            }
        )

    authors = []
    for i in range(60):
        aid = f"a{i:02d}"
        authors.append(aid)
        name = f"{_FIRST[i % len(_FIRST)]} {_LAST[i % len(_LAST)]}"
        if i >= len(_FIRST) * 2:
            name = f"{name} Jr"
        nodes.append(
            {
                "id": aid,
                "type": "Author",
                "label": name,
                "attributes": {"name": name, "seniority": rng.randint(1, 30)},
            }
        )

    papers = []
    years = [2015] * 8 + [2016] * 7 + [2017] * 5 + [2018] * 9 + [2019] * 4 + [2020] * 4 + [2021] * 3
    edge_counter = 0
    for i in range(40):
        pid = f"p{i:02d}"
        papers.append(pid)
        year = years[i]
        w1, w2 = rng.sample(_TOPIC_WORDS, 2)
        title = f"{w1.title()} {w2.title()} Study {i:02d}"
        nodes.append(
            {
                "id": pid,
                "type": "Paper",
                "label": title,
                "attributes": {"year": year, "title": title, "citations": rng.randint(0, 120)},
            }
        )
        for order, author in enumerate(rng.sample(authors, rng.randint(1, 3)), start=1):
            edges.append(
                {
                    "id": f"e{edge_counter:03d}",
                    "source": pid,
                    "target": author,
                    "relation": "writtenBy",
                    "attributes": {"order": order},
                }
            )
            edge_counter += 1
        for concept in rng.sample(concepts, rng.randint(1, 2)):
            edges.append(
                {
                    "id": f"e{edge_counter:03d}",
                    "source": pid,
                    "target": concept,
                    "relation": "hasConcept",
                    "attributes": {},
                }
            )
            edge_counter += 1
    for i in range(12):
        a, b = rng.sample(papers, 2)
        edges.append(
            {
                "id": f"e{edge_counter:03d}",
                "source": a,
                "target": b,
                "relation": "cites",
                "attributes": {},
            }
        )
        edge_counter += 1

    return {
        "meta": {
            "name": "academic",
            "attribute_kinds": {"Paper": {"year": "numeric", "title": "text", "citations": "numeric"}},
        },
        "nodes": nodes,
        "edges": edges,
    }


def load_academic_fixture() -> KnowledgeGraph:
    return load_graph(academic_fixture_document())


def template_corpus() -> list[dict[str, Any]]:
    """40 (question, expected elements) pairs built from the fixture vocabulary.

    Questions instantiate the two documented template families, so the offline
    extractor must resolve each one exactly.
    """
    years = [2015, 2016, 2017, 2018, 2019, 2020, 2021, 2014]
    variants = [
        ("Find papers published in {y} and their authors.", ["Author"]),
        ("Show papers published in {y} and their concepts.", ["Concept"]),
        ("Find papers published in {y}, their authors and concepts.", ["Author", "Concept"]),
        ("Show the papers with year {y} and their authors.", ["Author"]),
        ("Find papers whose year is {y}, their concepts and authors.", ["Concept", "Author"]),
    ]
    corpus = []
    for year in years:
        for template, connected in variants:
            corpus.append(
                {
                    "question": template.format(y=year),
                    "interest_type": "Paper",
                    "attribute": "year",
                    "attribute_value": str(year),
                    "connected_types": connected,
                }
            )
    assert len(corpus) == 40
    return corpus


def recorded_completions() -> dict[str, str]:
    """Mock-client recordings for the corpus: question text -> strict JSON answer."""
    out = {}
    for entry in template_corpus():
        out[entry["question"]] = json.dumps(
            {
                "interest_type": entry["interest_type"],
                "attribute": entry["attribute"],
                "attribute_value": entry["attribute_value"],
                "connected_types": entry["connected_types"],
            }
        )
    return out


def subcluster_fixture_document(
    clusters: int = 5,
    interest_per_cluster: int = 10,
    connected_total: int = 60,
    seed: int = 3,
) -> dict[str, Any]:
    """Synthetic two-type graph where every connected node links to interest
    nodes of exactly one cluster; cluster membership is recoverable from the
    connected node id prefix (g<cluster>-...)."""
    rng = random.Random(seed)
    nodes = []
    edges = []
    interest_ids: dict[int, list[str]] = {}
    for c in range(clusters):
        interest_ids[c] = []
        for i in range(interest_per_cluster):
            nid = f"i{c}{i:02d}"
            interest_ids[c].append(nid)
            nodes.append(
                {
                    "id": nid,
                    "type": "Item",
                    "label": f"Item {c}-{i:02d}",
                    # Tight value bands per cluster, far apart between clusters.
                    "attributes": {"score": c * 100 + rng.randint(0, 3)},
                }
            )
    counter = 0
    for j in range(connected_total):
        cluster = j % clusters
        nid = f"g{cluster}-{j:03d}"
        nodes.append(
            {
                "id": nid,
                "type": "Tag",
                "label": f"Tag {j:03d}",
                "attributes": {},
            }
        )
        for interest in rng.sample(interest_ids[cluster], rng.randint(3, 5)):
            edges.append(
                {
                    "id": f"t{counter:04d}",
                    "source": interest,
                    "target": nid,
                    "relation": "taggedWith",
                    "attributes": {},
                }
            )
            counter += 1
    return {
        "meta": {"name": "subcluster", "attribute_kinds": {"Item": {"score": "numeric"}}},
        "nodes": nodes,
        "edges": edges,
    }


def random_fixture_document(seed: int, *, types: int = 3, nodes_per_type: int = 25) -> dict[str, Any]:
    """Random connected-ontology fixture for containment and determinism sweeps."""
    rng = random.Random(seed)
    type_names = [f"T{i}" for i in range(types)]
    nodes = []
    by_type: dict[str, list[str]] = {t: [] for t in type_names}
    for t_index, t in enumerate(type_names):
        for i in range(nodes_per_type):
            nid = f"{t.lower()}n{i:03d}"
            by_type[t].append(nid)
            nodes.append(
                {
                    "id": nid,
                    "type": t,
                    "label": f"{t} node {i:03d}",
                    "attributes": {"value": rng.choice([10, 20, 30, 40]) + t_index},
                }
            )
    edges = []
    counter = 0
    # Star schema: T0 relates to every other type.
    for t in type_names[1:]:
        for nid in by_type[t]:
            for src in rng.sample(by_type[type_names[0]], rng.randint(1, 2)):
                edges.append(
                    {
                        "id": f"e{counter:04d}",
                        "source": src,
                        "target": nid,
                        "relation": f"rel{t}",
                        "attributes": {},
                    }
                )
                counter += 1
    return {
        "meta": {"name": f"random-{seed}"},
        "nodes": nodes,
        "edges": edges,
    }


def scale_fixture_document(total_nodes: int, seed: int = 11) -> dict[str, Any]:
    """Two-type graph sized for runtime measurements; roughly half per type."""
    rng = random.Random(seed)
    interest_count = total_nodes // 2
    connected_count = total_nodes - interest_count
    nodes = []
    edges = []
    interest = []
    for i in range(interest_count):
        nid = f"i{i:05d}"
        interest.append(nid)
        nodes.append(
            {
                "id": nid,
                "type": "Entity",
                "label": f"Entity {i:05d}",
                "attributes": {"rank": rng.randint(0, 9) * 50},
            }
        )
    counter = 0
    for j in range(connected_count):
        nid = f"c{j:05d}"
        nodes.append(
            {"id": nid, "type": "Partner", "label": f"Partner {j:05d}", "attributes": {}}
        )
        for src in rng.sample(interest, min(len(interest), rng.randint(1, 3))):
            edges.append(
                {
                    "id": f"e{counter:05d}",
                    "source": src,
                    "target": nid,
                    "relation": "pairedWith",
                    "attributes": {},
                }
            )
            counter += 1
    return {"meta": {"name": f"scale-{total_nodes}"}, "nodes": nodes, "edges": edges}


NAMED_FIXTURES = {
    "academic": academic_fixture_document,
    "subcluster": subcluster_fixture_document,
}
