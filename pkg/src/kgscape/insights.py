"""Structural feature encoding and language-model insight reports.

Features are extracted deterministically from the displayed subgraph. Report
generation goes through the client when one is available; a deterministic
fallback renders the same facts, and a validation pass strips any entity name
the graph does not know.
"""

from __future__ import annotations

import re
import statistics
from dataclasses import dataclass, replace
from typing import Mapping, TYPE_CHECKING

from .context_ops import displayed_degree
from .llm import CompletionError, LanguageModelClient, Prompt, extract_json_object, load_prompt_template
from .model import KnowledgeGraph, Ontology
from .preferences import UserPreference, schema_summary

if TYPE_CHECKING:
    from .layout.engine import ContextLayout

INSIGHT_PROMPT_FILE = "insight_generation_v1.txt"
HUB_COUNT = 5
OUTLIER_FRACTION = 0.25


@dataclass(frozen=True)
class FeatureSummary:
    cluster_sizes: Mapping[int, int]
    degree_stats: Mapping[str, tuple[int, float, int]]
    hubs: tuple[tuple[str, int], ...]
    bridges: tuple[tuple[str, int, int], ...]
    outlier_clusters: tuple[int, ...]


@dataclass(frozen=True)
class InsightBullet:
    text: str
    refs: tuple[str, ...]


@dataclass(frozen=True)
class InsightReport:
    bullets: tuple[InsightBullet, ...]
    fallback_used: bool = False
    validation_log: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "bullets": [{"text": b.text, "refs": list(b.refs)} for b in self.bullets],
            "fallback_used": self.fallback_used,
            "validation_log": list(self.validation_log),
        }


def encode_features(layout: "ContextLayout", kg: KnowledgeGraph) -> FeatureSummary:
    """Deterministic structural summary of the displayed subgraph."""
    cluster_sizes: dict[int, int] = {}
    for cid in layout.cluster_of.values():
        cluster_sizes[cid] = cluster_sizes.get(cid, 0) + 1

    degree = displayed_degree(layout, kg)
    per_type: dict[str, list[int]] = {}
    for node_id, deg in degree.items():
        per_type.setdefault(kg.node(node_id).node_type, []).append(deg)
    degree_stats = {
        t: (min(values), float(statistics.median(values)), max(values))
        for t, values in sorted(per_type.items())
    }

    hubs = tuple(
        (node_id, degree[node_id])
        for node_id in sorted(degree, key=lambda n: (-degree[n], n))[:HUB_COUNT]
    )

    bridges_raw = []
    for node_id, pie in layout.pies.items():
        distinct = len(pie)
        if distinct >= 2:
            bridges_raw.append((node_id, distinct, degree.get(node_id, 0)))
    bridges = tuple(sorted(bridges_raw, key=lambda b: (-b[1], -b[2], b[0])))

    outliers: tuple[int, ...] = ()
    if cluster_sizes:
        median_size = statistics.median(cluster_sizes.values())
        threshold = max(1.0, OUTLIER_FRACTION * median_size)
        outliers = tuple(sorted(cid for cid, size in cluster_sizes.items() if size <= threshold))

    return FeatureSummary(
        cluster_sizes=dict(sorted(cluster_sizes.items())),
        degree_stats=degree_stats,
        hubs=hubs,
        bridges=bridges,
        outlier_clusters=outliers,
    )


def _features_text(features: FeatureSummary, kg: KnowledgeGraph) -> str:
    lines = ["Cluster sizes: " + ", ".join(f"cluster {c}: {n}" for c, n in features.cluster_sizes.items())]
    for t, (lo, mid, hi) in features.degree_stats.items():
        lines.append(f"Degree for {t}: min {lo}, median {mid:g}, max {hi}")
    hub_bits = ", ".join(f'"{kg.node(n).label}" ({n}, degree {d})' for n, d in features.hubs)
    lines.append(f"Hubs: {hub_bits or 'none'}")
    bridge_bits = ", ".join(
        f'"{kg.node(n).label}" ({n}, {c} clusters, degree {d})' for n, c, d in features.bridges[:HUB_COUNT]
    )
    lines.append(f"Bridging nodes: {bridge_bits or 'none'}")
    lines.append(
        "Outlier clusters: " + (", ".join(str(c) for c in features.outlier_clusters) or "none")
    )
    return "\n".join(lines)


def _fallback_report(features: FeatureSummary, kg: KnowledgeGraph) -> InsightReport:
    bullets = []
    size_text = ", ".join(f"cluster {c} holds {n} nodes" for c, n in features.cluster_sizes.items())
    bullets.append(InsightBullet(text=f"Cluster sizes: {size_text}.", refs=()))

    if features.hubs:
        top = features.hubs[0]
        names = ", ".join(f'"{kg.node(n).label}"' for n, _ in features.hubs)
        bullets.append(
            InsightBullet(
                text=f"Highest-degree nodes: {names}; the busiest has degree {top[1]}.",
                refs=tuple(n for n, _ in features.hubs),
            )
        )
    if features.bridges:
        names = ", ".join(f'"{kg.node(n).label}"' for n, _c, _d in features.bridges[:HUB_COUNT])
        bullets.append(
            InsightBullet(
                text=f"Bridging nodes linked to multiple clusters: {names}.",
                refs=tuple(n for n, _c, _d in features.bridges[:HUB_COUNT]),
            )
        )
    else:
        bullets.append(InsightBullet(text="No node bridges more than one cluster.", refs=()))

    stats_text = "; ".join(
        f"{t} degree spans {lo} to {hi} (median {mid:g})"
        for t, (lo, mid, hi) in features.degree_stats.items()
    )
    bullets.append(InsightBullet(text=f"Degree distribution: {stats_text}.", refs=()))
    if features.outlier_clusters:
        listed = ", ".join(str(c) for c in features.outlier_clusters)
        bullets.append(InsightBullet(text=f"Unusually small clusters: {listed}.", refs=()))
    return InsightReport(bullets=tuple(bullets), fallback_used=True)


def generate_insights(
    features: FeatureSummary,
    pref: UserPreference,
    ontology: Ontology,
    client: LanguageModelClient | None,
    kg: KnowledgeGraph,
    question: str = "",
) -> InsightReport:
    """Render the feature summary into bullets; never fails (fallback guaranteed)."""
    if client is None:
        return _fallback_report(features, kg)
    prompt = Prompt(
        system=load_prompt_template(INSIGHT_PROMPT_FILE),
        user=(
            f"Question: {question or pref.attribute_value}\n"
            f"Schema:\n{schema_summary(ontology)}\n\n"
            f"Features:\n{_features_text(features, kg)}"
        ),
    )
    try:
        payload = extract_json_object(client.complete(prompt))
        bullets = tuple(
            InsightBullet(text=str(b["text"]), refs=tuple(str(r) for r in b.get("refs", ())))
            for b in payload["bullets"]
        )
        if not bullets:
            raise ValueError("empty bullets")
        return InsightReport(bullets=bullets, fallback_used=False)
    except (CompletionError, ValueError, KeyError, TypeError):
        return _fallback_report(features, kg)


_QUOTED = re.compile(r'"([^"]+)"')


def validate_insights(report: InsightReport, kg: KnowledgeGraph) -> InsightReport:
    """Strip quoted entity names that match no node label (case-insensitive exact).

    Unknown refs are dropped as well; everything stripped is logged. Running
    the validation twice changes nothing.
    """
    known_labels = {n.label.lower() for n in kg.nodes}
    log = list(report.validation_log)
    bullets = []
    for bullet in report.bullets:
        text = bullet.text
        for name in _QUOTED.findall(text):
            if name.lower() not in known_labels:
                text = text.replace(f'"{name}"', "").strip()
                text = re.sub(r"\s{2,}", " ", text)
                text = re.sub(r"\s+([,.;])", r"\1", text)
                if name not in log:
                    log.append(name)
        refs = []
        for ref in bullet.refs:
            if kg.has_node(ref):
                refs.append(ref)
            elif ref not in log:
                log.append(ref)
        bullets.append(InsightBullet(text=text, refs=tuple(refs)))
    return replace(report, bullets=tuple(bullets), validation_log=tuple(log))
