"""kgscape: preference-driven, ontology-aware knowledge-graph layout and exploration."""

from .config import EngineConfig, ServiceConfig
from .model import (
    DistanceMatrix,
    Edge,
    GraphDocumentError,
    InterestSubgraph,
    KnowledgeGraph,
    Node,
    Ontology,
    derive_ontology,
    distance_matrix,
    load_graph,
    query_instances,
    serialize_graph,
)
from .preferences import (
    ContextDirective,
    UserPreference,
    classify_context,
    classify_context_offline,
    extract_preferences,
    extract_preferences_offline,
)
from .layout.engine import ContextLayout, PipelineResult, build_layout, export_layout, export_layout_json

__all__ = [
    "ContextDirective",
    "ContextLayout",
    "DistanceMatrix",
    "Edge",
    "EngineConfig",
    "GraphDocumentError",
    "InterestSubgraph",
    "KnowledgeGraph",
    "Node",
    "Ontology",
    "PipelineResult",
    "ServiceConfig",
    "UserPreference",
    "build_layout",
    "classify_context",
    "classify_context_offline",
    "derive_ontology",
    "distance_matrix",
    "export_layout",
    "export_layout_json",
    "extract_preferences",
    "extract_preferences_offline",
    "load_graph",
    "query_instances",
    "serialize_graph",
]
