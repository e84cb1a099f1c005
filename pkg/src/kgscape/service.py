"""HTTP facade: exploration sessions with persistence and deterministic replay.

Each session pins a graph and a seed at creation. Queries run the full pipeline;
context descriptions append directives; snapshots on disk hold everything needed
to rebuild the exact layout after a restart (graph document, seed, query
parameters, resolved directives).
"""

from __future__ import annotations

import json
import logging
import math
import random
import sys
import threading
import time
import uuid
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .context_ops import (
    DirectiveError,
    PathCaps,
    apply_edge_context,
    apply_neighbor_context,
    apply_path_context,
    expand_bundle,
)
from .insights import encode_features, generate_insights, validate_insights
from .layout.engine import PipelineResult, build_layout, export_layout
from .layout.stress import arrange_ontology
from .llm import LanguageModelClient
from .model import (
    GraphDocumentError,
    KnowledgeGraph,
    Ontology,
    UnknownTypeError,
    derive_ontology,
    distance_matrix,
    load_graph,
)
from .preferences import (
    EDGE,
    NEIGHBOR,
    PATH,
    ClassificationError,
    ContextDirective,
    ExtractionError,
    PreferenceError,
    UserPreference,
    classify_context,
    classify_context_offline,
    extract_preferences,
    extract_preferences_offline,
)
from .fixtures import NAMED_FIXTURES

logger = logging.getLogger("kgscape.service")
SEARCH_CAP = 50


def _directive_to_dict(d: ContextDirective) -> dict:
    return {
        "kind": d.kind,
        "neighbor_metric": d.neighbor_metric,
        "target_type": d.target_type,
        "edge_relation": d.edge_relation,
        "edge_attribute": list(d.edge_attribute) if d.edge_attribute else None,
        "path_source": d.path_source,
        "path_target": d.path_target,
        "path_criterion": d.path_criterion,
    }


def _directive_from_dict(raw: dict) -> ContextDirective:
    attr = raw.get("edge_attribute")
    return ContextDirective(
        kind=raw["kind"],
        neighbor_metric=raw.get("neighbor_metric"),
        target_type=raw.get("target_type"),
        edge_relation=raw.get("edge_relation"),
        edge_attribute=(attr[0], attr[1]) if attr else None,
        path_source=raw.get("path_source"),
        path_target=raw.get("path_target"),
        path_criterion=raw.get("path_criterion"),
    )


@dataclass
class SessionState:
    id: str
    document: dict
    seed: int
    created: float
    updated: float
    kg: KnowledgeGraph
    ontology: Ontology
    question: str | None = None
    budget: int | None = None
    sigma: float | None = None
    preference: UserPreference | None = None
    directives: list[tuple[str, ContextDirective]] = field(default_factory=list)
    result: PipelineResult | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed,
            "created": self.created,
            "updated": self.updated,
            "graph": self.document,
            "question": self.question,
            "budget": self.budget,
            "sigma": self.sigma,
            "directives": [
                {"description": desc, "directive": _directive_to_dict(d)}
                for desc, d in self.directives
            ],
        }


class SessionStore:
    """In-memory sessions backed by JSON snapshot files."""

    def __init__(self, data_dir: str):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionState] = {}
        self._guard = threading.Lock()

    def add(self, state: SessionState) -> None:
        with self._guard:
            self._sessions[state.id] = state
        self.persist(state)

    def persist(self, state: SessionState) -> None:
        path = self.data_dir / f"{state.id}.json"
        path.write_text(json.dumps(state.snapshot(), sort_keys=True), encoding="utf-8")

    def get(self, session_id: str) -> SessionState | None:
        with self._guard:
            state = self._sessions.get(session_id)
        if state is not None:
            return state
        path = self.data_dir / f"{session_id}.json"
        if not path.exists():
            return None
        raw = json.loads(path.read_text(encoding="utf-8"))
        kg = load_graph(raw["graph"])
        state = SessionState(
            id=raw["id"],
            document=raw["graph"],
            seed=raw["seed"],
            created=raw["created"],
            updated=raw["updated"],
            kg=kg,
            ontology=derive_ontology(kg),
            question=raw.get("question"),
            budget=raw.get("budget"),
            sigma=raw.get("sigma"),
            directives=[
                (entry["description"], _directive_from_dict(entry["directive"]))
                for entry in raw.get("directives", [])
            ],
        )
        with self._guard:
            self._sessions.setdefault(session_id, state)
        return self._sessions[session_id]


class CreateSessionBody(BaseModel):
    graph: str | dict
    seed: int | None = None


class QueryBody(BaseModel):
    question: str
    diversity: float | None = None
    budget: int | None = None


class ContextBody(BaseModel):
    description: str


def _answer_subgraph(result: PipelineResult) -> dict:
    """Answer nodes plus their displayed edges and partners."""
    answers = sorted(result.subgraph.answer_ids & set(result.layout.positions))
    answer_set = set(answers)
    edges = []
    partner_ids = set()
    for edge in result.subgraph.edges:
        other = None
        if edge.source in answer_set and edge.target in result.layout.positions:
            other = edge.target
        elif edge.target in answer_set and edge.source in result.layout.positions:
            other = edge.source
        if other is not None:
            partner_ids.add(other)
            edges.append(
                {"id": edge.id, "source": edge.source, "target": edge.target, "relation": edge.relation}
            )
    kg = result.subgraph
    by_id = {n.id: n for n in (*kg.interest_nodes, *kg.connected_nodes)}
    nodes = [
        {"id": nid, "label": by_id[nid].label, "type": by_id[nid].node_type, "answer": nid in answer_set}
        for nid in sorted(answer_set | partner_ids)
    ]
    return {"nodes": nodes, "edges": sorted(edges, key=lambda e: e["id"])}


def create_app(
    config: ServiceConfig | None = None,
    client: LanguageModelClient | None = None,
) -> FastAPI:
    """Build the service. A supplied client enables the live extraction route
    even in offline mode (tests inject a deterministic mock this way)."""
    config = config or ServiceConfig.from_env()
    store = SessionStore(config.data_dir)
    live_client = client if client is not None else config.make_client()
    jobs: dict[str, dict] = {}
    app = FastAPI(title="kgscape", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        logger.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "ms": round((time.perf_counter() - start) * 1000, 2),
                }
            )
        )
        return response

    def error(status: int, message: str, **extra) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": message, **extra})

    def run_query(state: SessionState, question: str, budget: int | None, sigma: float | None):
        attributes = state.kg.attributes_by_type()
        if live_client is not None:
            pref = extract_preferences(question, state.ontology, live_client, attributes=attributes)
        else:
            pref = extract_preferences_offline(question, state.ontology, attributes=attributes)
        result = build_layout(
            state.kg,
            state.ontology,
            pref,
            seed=state.seed,
            config=config.engine,
            budget=budget,
            sigma=sigma,
        )
        layout = result.layout
        for _desc, directive in state.directives:
            layout = _inject_path_nodes(state, layout, _apply_directive(state, layout, directive))
        state.question = question
        state.budget = budget
        state.sigma = sigma
        state.preference = pref
        state.result = PipelineResult(
            layout=layout,
            cluster_set=result.cluster_set,
            displayed_clusters=result.displayed_clusters,
            sample=result.sample,
            subgraph=result.subgraph,
            preference=pref,
        )
        state.updated = time.time()
        store.persist(state)

    def _apply_directive(state: SessionState, layout, directive: ContextDirective):
        if directive.kind == NEIGHBOR:
            return apply_neighbor_context(layout, directive, state.kg)
        if directive.kind == EDGE:
            return apply_edge_context(layout, directive, state.kg)
        if directive.kind == PATH:
            return apply_path_context(layout, directive, state.kg, PathCaps())
        raise DirectiveError(f"unknown directive kind {directive.kind!r}")

    def _inject_path_nodes(state: SessionState, layout, emphasis):
        """Give highlighted path nodes missing from the layout a position in
        their type region; existing positions are never touched."""
        missing = sorted(
            {
                node_id
                for path in emphasis.highlighted_paths
                for node_id in path.node_ids
                if node_id not in layout.positions
            }
        )
        if not missing:
            return layout.with_emphasis(emphasis)
        regions = {r.type: r for r in layout.regions}
        positions = dict(layout.positions)
        radii = dict(layout.radii)
        golden = math.pi * (3.0 - math.sqrt(5.0))
        for index, node_id in enumerate(missing):
            region = regions[state.kg.node(node_id).node_type]
            r = region.radius * 0.5 * math.sqrt((index + 1) / (len(missing) + 1))
            angle = golden * index
            positions[node_id] = (
                region.center[0] + r * math.cos(angle),
                region.center[1] + r * math.sin(angle),
            )
            radii[node_id] = config.engine.node_radius
        return dc_replace(layout, positions=positions, radii=radii, emphasis=emphasis)

    def ensure_replayed(state: SessionState) -> None:
        """Rebuild the layout from snapshot data after a restart."""
        if state.result is not None or state.question is None:
            return
        attributes = state.kg.attributes_by_type()
        pref = extract_preferences_offline(state.question, state.ontology, attributes=attributes) \
            if live_client is None else extract_preferences(
                state.question, state.ontology, live_client, attributes=attributes)
        result = build_layout(
            state.kg,
            state.ontology,
            pref,
            seed=state.seed,
            config=config.engine,
            budget=state.budget,
            sigma=state.sigma,
        )
        layout = result.layout
        for _desc, directive in state.directives:
            layout = _inject_path_nodes(state, layout, _apply_directive(state, layout, directive))
        state.preference = pref
        state.result = PipelineResult(
            layout=layout,
            cluster_set=result.cluster_set,
            displayed_clusters=result.displayed_clusters,
            sample=result.sample,
            subgraph=result.subgraph,
            preference=pref,
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if isinstance(body.graph, str):
            maker = NAMED_FIXTURES.get(body.graph)
            if maker is None:
                return error(400, f"unknown graph name {body.graph!r}")
            document = maker()
        else:
            document = body.graph
        elements = len(document.get("nodes", [])) + len(document.get("edges", []))
        if elements > config.max_graph_elements:
            return error(413, f"graph has {elements} elements; limit is {config.max_graph_elements}")
        try:
            kg = load_graph(document)
        except GraphDocumentError as exc:
            return error(400, str(exc))
        seed = body.seed if body.seed is not None else random.SystemRandom().randint(0, 2**31 - 1)
        now = time.time()
        state = SessionState(
            id=uuid.uuid4().hex[:12],
            document=document,
            seed=seed,
            created=now,
            updated=now,
            kg=kg,
            ontology=derive_ontology(kg),
        )
        store.add(state)
        return {"session_id": state.id, "seed": seed}

    def _get_state(session_id: str) -> SessionState | None:
        return store.get(session_id)

    @app.post("/sessions/{session_id}/query")
    def query(session_id: str, body: QueryBody):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        if not body.question.strip():
            return error(422, "question is empty")
        elements = len(state.kg.nodes) + len(state.kg.edges)
        if elements > config.async_threshold:
            job_id = uuid.uuid4().hex[:8]
            jobs[job_id] = {"status": "pending", "session": session_id}

            def runner():
                try:
                    with state.lock:
                        run_query(state, body.question, body.budget, body.diversity)
                    jobs[job_id] = {"status": "done", "session": session_id}
                except Exception as exc:  # pragma: no cover - surfaced via poll
                    jobs[job_id] = {"status": "error", "detail": str(exc)}

            threading.Thread(target=runner, daemon=True).start()
            return JSONResponse(
                status_code=202,
                content={"job": job_id, "poll": f"/sessions/{session_id}/jobs/{job_id}"},
            )
        try:
            with state.lock:
                run_query(state, body.question, body.budget, body.diversity)
        except ExtractionError as exc:
            return error(422, str(exc), repair_log=exc.repair_log)
        except (PreferenceError, UnknownTypeError, ValueError) as exc:
            return error(422, str(exc))
        return _query_response(state)

    def _displayed_edges(state: SessionState) -> list[dict]:
        """Edges of the rendered subgraph, for on-demand drawing client-side."""
        shown = set(state.result.layout.positions)
        out = []
        for edge in state.result.subgraph.edges:
            if edge.source in shown and edge.target in shown:
                out.append(
                    {
                        "id": edge.id,
                        "source": edge.source,
                        "target": edge.target,
                        "relation": edge.relation,
                    }
                )
        return sorted(out, key=lambda e: e["id"])

    def _query_response(state: SessionState) -> dict:
        result = state.result
        return {
            "layout": export_layout(result),
            "preference": state.preference.as_dict(),
            "answer_subgraph": _answer_subgraph(result),
            "displayed_edges": _displayed_edges(state),
            "sample": {
                "truncated": result.sample.truncated,
                "count": len(result.sample.ids),
                "quotas": {str(k): v for k, v in result.sample.plan.quotas.items()},
            },
        }

    @app.get("/sessions/{session_id}/jobs/{job_id}")
    def poll_job(session_id: str, job_id: str):
        job = jobs.get(job_id)
        if job is None or job.get("session") != session_id:
            return error(404, f"unknown job {job_id!r}")
        if job["status"] == "pending":
            return JSONResponse(status_code=202, content={"status": "pending"})
        if job["status"] == "error":
            return error(422, job["detail"])
        state = _get_state(session_id)
        return _query_response(state)

    @app.post("/sessions/{session_id}/context")
    def context(session_id: str, body: ContextBody):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        with state.lock:
            ensure_replayed(state)
            if state.result is None:
                return error(409, "no query has run in this session yet")
            # Path endpoints must name nodes of the current subgraph.
            subgraph_ids = state.result.subgraph.node_ids()
            labels = {
                node.label: node.id for node in state.kg.nodes if node.id in subgraph_ids
            }
            try:
                if live_client is not None:
                    directive = classify_context(
                        body.description, state.preference, state.ontology, live_client, node_labels=labels
                    )
                else:
                    directive = classify_context_offline(
                        body.description,
                        state.preference,
                        state.ontology,
                        node_labels=labels,
                        relations=sorted({e.relation for e in state.kg.edges}),
                    )
                emphasis = _apply_directive(state, state.result.layout, directive)
            except (ClassificationError, DirectiveError) as exc:
                return error(422, str(exc))
            layout = _inject_path_nodes(state, state.result.layout, emphasis)
            state.result = PipelineResult(
                layout=layout,
                cluster_set=state.result.cluster_set,
                displayed_clusters=state.result.displayed_clusters,
                sample=state.result.sample,
                subgraph=state.result.subgraph,
                preference=state.preference,
            )
            state.directives.append((body.description, directive))
            state.updated = time.time()
            store.persist(state)
            return {
                "layout": export_layout(state.result),
                "directive": _directive_to_dict(directive),
                "displayed_edges": _displayed_edges(state),
            }

    @app.get("/sessions/{session_id}/insights")
    def insights(session_id: str):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        with state.lock:
            ensure_replayed(state)
            if state.result is None:
                return error(409, "no query has run in this session yet")
            features = encode_features(state.result.layout, state.kg)
            report = generate_insights(
                features,
                state.preference,
                state.ontology,
                live_client,
                state.kg,
                question=state.question or "",
            )
            report = validate_insights(report, state.kg)
            return report.as_dict()

    @app.get("/sessions/{session_id}/ontology")
    def ontology_view(session_id: str):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        dm = distance_matrix(state.ontology)
        positions = arrange_ontology(dm, config.engine.spacing)
        return {
            "types": [
                {"type": t, "x": round(positions[t][0], 6), "y": round(positions[t][1], 6)}
                for t in state.ontology.types
            ],
            "relations": [
                {"source": s, "target": t, "relation": r} for s, t, r in state.ontology.relations
            ],
            "distances": {
                a: {b: dm.dist(a, b) for b in dm.order} for a in dm.order
            },
        }

    @app.get("/sessions/{session_id}/nodes")
    def search_nodes(session_id: str, name: str = ""):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        needle = name.strip().lower()
        hits = []
        for node in sorted(state.kg.nodes, key=lambda n: (n.label, n.id)):
            if needle and needle in node.label.lower():
                hits.append({"id": node.id, "label": node.label, "type": node.node_type})
                if len(hits) >= SEARCH_CAP:
                    break
        return {"matches": hits}

    @app.post("/sessions/{session_id}/bundles/{bundle_id}/expand")
    def expand(session_id: str, bundle_id: str):
        state = _get_state(session_id)
        if state is None:
            return error(404, f"unknown session {session_id!r}")
        with state.lock:
            ensure_replayed(state)
            if state.result is None:
                return error(409, "no query has run in this session yet")
            try:
                emphasis = expand_bundle(state.result.layout.emphasis, bundle_id)
            except DirectiveError as exc:
                return error(404, str(exc))
            expanded_edges = set(emphasis.highlighted_edges)
            for bundle in emphasis.bundles:
                if bundle.id == bundle_id:
                    expanded_edges.update(bundle.edge_ids)
            emphasis = dc_replace(emphasis, highlighted_edges=frozenset(expanded_edges))
            layout = state.result.layout.with_emphasis(emphasis)
            state.result = PipelineResult(
                layout=layout,
                cluster_set=state.result.cluster_set,
                displayed_clusters=state.result.displayed_clusters,
                sample=state.result.sample,
                subgraph=state.result.subgraph,
                preference=state.preference,
            )
            state.updated = time.time()
            store.persist(state)
            return {
                "layout": export_layout(state.result),
                "displayed_edges": _displayed_edges(state),
            }

    return app


def configure_logging() -> None:
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.INFO)
